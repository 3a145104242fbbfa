#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace lexprompt {

// Seeded generator with fully specified output. std::mt19937_64 is pinned
// by the standard; the distributions in <random> are not, so bounded draws
// and shuffling are implemented here to replicate across toolchains.
class SeededRng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+rejection/v1";

  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Fisher-Yates; only the first `prefix` slots are finalized.
  template <typename T>
  void partial_shuffle(std::span<T> items, std::size_t prefix) {
    for (std::size_t i = 0; i < prefix && i + 1 < items.size(); ++i) {
      const auto j = i + static_cast<std::size_t>(below(items.size() - i));
      using std::swap;
      swap(items[i], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    partial_shuffle(items, items.size());
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lexprompt
