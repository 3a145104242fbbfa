#include "lexprompt/influence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lexprompt/error.hpp"
#include "lexprompt/rng.hpp"

namespace lexprompt {

std::vector<InfluenceScore> compute_influence(const LossFunction& loss, const TaskDescription& d) {
  const Ratio base = loss(d);
  std::vector<InfluenceScore> scores;
  scores.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.size() == 1) {
      scores.push_back({i, base, base, Ratio{0, base.den}});
      continue;
    }
    const Ratio deleted = loss(d.without_word(i));
    scores.push_back({i, base, deleted, abs_diff(base, deleted)});
  }
  return scores;
}

std::vector<InfluenceScore> compute_influence(ProxyObjective& objective, const TaskDescription& d) {
  return compute_influence([&](const TaskDescription& x) { return objective.loss(x); }, d);
}

std::size_t target_count(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("target fraction must be in (0, 1]");
  }
  // The epsilon keeps products such as 0.7 * 20 from rounding up past 14.
  const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(count, n == 0 ? 0 : 1, n);
}

std::vector<std::size_t> select_targets(std::span<const InfluenceScore> scores, double fraction) {
  if (scores.empty()) throw InvalidArgument("no influence scores to select from");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].influence != scores[b].influence) {
      return scores[a].influence > scores[b].influence;
    }
    return scores[a].word_index < scores[b].word_index;
  });
  order.resize(target_count(scores.size(), fraction));
  std::vector<std::size_t> out;
  out.reserve(order.size());
  for (auto i : order) out.push_back(scores[i].word_index);
  return out;
}

std::vector<std::size_t> random_targets(std::size_t n, double fraction, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("no words to select from");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SeededRng rng(seed);
  rng.shuffle(std::span(order));
  order.resize(target_count(n, fraction));
  return order;
}

}  // namespace lexprompt
