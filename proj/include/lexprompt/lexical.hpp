#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lexprompt/oracle.hpp"
#include "lexprompt/prompt.hpp"

namespace lexprompt {

struct Candidate {
  enum class Kind { word, remove };

  Kind kind = Kind::word;
  std::string surface;  // empty for Kind::remove
  std::optional<double> probability;

  static Candidate word(std::string surface, std::optional<double> probability = std::nullopt) {
    return {Kind::word, std::move(surface), probability};
  }
  static Candidate deletion() { return {Kind::remove, {}, std::nullopt}; }

  bool is_delete() const noexcept { return kind == Kind::remove; }
  // Human-readable form; "<delete>" for the delete token.
  std::string label() const { return is_delete() ? "<delete>" : surface; }

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// C_i: provider words in provider order followed by the delete token.
struct CandidateSet {
  std::size_t position = 0;
  std::vector<Candidate> candidates;
};

// Queries the provider with `d` masked at `position` and keeps the first k
// words that are nonempty, whitespace-free, distinct, and different from
// the current word (case-sensitive). The delete token is always appended.
CandidateSet build_candidates(FillMaskProvider& provider, const TaskDescription& d,
                              std::size_t position, std::size_t k);

struct NeighborVariant {
  TaskDescription description;
  std::size_t position;
  std::string candidate;
};

// All single-word substitutions: up to k per position, ordered by
// (position, provider rank). Words carrying a {placeholder} are kept fixed.
std::vector<NeighborVariant> neighborhood(FillMaskProvider& provider, const TaskDescription& d,
                                          std::size_t k);

}  // namespace lexprompt
