#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lexprompt/eval.hpp"
#include "lexprompt/prompt.hpp"
#include "lexprompt/ratio.hpp"

namespace lexprompt {

using LossFunction = std::function<Ratio(const TaskDescription&)>;

struct InfluenceScore {
  std::size_t word_index = 0;
  Ratio base_loss;
  Ratio deleted_loss;
  // |base_loss - deleted_loss|
  Ratio influence;

  friend bool operator==(const InfluenceScore&, const InfluenceScore&) = default;
};

// Deletion influence of every word, in word order. The base loss is
// evaluated once; a one-word description gets influence 0 without a
// deletion evaluation.
std::vector<InfluenceScore> compute_influence(const LossFunction& loss, const TaskDescription& d);

std::vector<InfluenceScore> compute_influence(ProxyObjective& objective, const TaskDescription& d);

// ceil(fraction * n), with fraction in (0, 1].
std::size_t target_count(std::size_t n, double fraction);

// Most influential first; equal influence keeps the earlier word first.
std::vector<std::size_t> select_targets(std::span<const InfluenceScore> scores, double fraction);

// Same count as select_targets, positions drawn by seeded shuffle.
std::vector<std::size_t> random_targets(std::size_t n, double fraction, std::uint64_t seed);

}  // namespace lexprompt
