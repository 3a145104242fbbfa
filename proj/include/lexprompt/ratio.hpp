#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace lexprompt {

// Exact count-based fraction. Losses and accuracies are kept as counts so
// comparisons and the loss + accuracy == 1 identity never see float drift.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const noexcept { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

  friend std::strong_ordering operator<=>(const Ratio& a, const Ratio& b) noexcept {
    const auto lhs = static_cast<unsigned __int128>(a.num) * b.den;
    const auto rhs = static_cast<unsigned __int128>(b.num) * a.den;
    return lhs <=> rhs;
  }
  friend bool operator==(const Ratio& a, const Ratio& b) noexcept {
    return (a <=> b) == std::strong_ordering::equal;
  }

  // Representation-level equality (same numerator and denominator).
  bool identical(const Ratio& other) const noexcept {
    return num == other.num && den == other.den;
  }

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

// |a - b|. Stays on the shared denominator when the inputs already share one.
inline Ratio abs_diff(const Ratio& a, const Ratio& b) {
  if (a.den == b.den) {
    return {a.num > b.num ? a.num - b.num : b.num - a.num, a.den};
  }
  const std::uint64_t lhs = a.num * b.den;
  const std::uint64_t rhs = b.num * a.den;
  return {lhs > rhs ? lhs - rhs : rhs - lhs, a.den * b.den};
}

}  // namespace lexprompt
