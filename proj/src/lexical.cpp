#include "lexprompt/lexical.hpp"

#include <algorithm>
#include <set>

#include "lexprompt/error.hpp"
#include "lexprompt/text.hpp"

namespace lexprompt {

namespace {

std::vector<FillCandidate> filtered_words(FillMaskProvider& provider, const TaskDescription& d,
                                          std::size_t position, std::size_t k) {
  if (position >= d.size()) throw PositionOutOfRange(position, d.size());
  if (k == 0) throw InvalidArgument("candidate count k must be at least 1");
  // One extra slot so dropping the current word still leaves k.
  auto raw = provider.fill_mask(d.masked(position, kMaskToken), k + 1);
  const auto& original = d.word(position);
  std::set<std::string> seen;
  std::vector<FillCandidate> out;
  for (auto& c : raw) {
    if (out.size() == k) break;
    if (c.word.empty() || c.word == original) continue;
    if (std::any_of(c.word.begin(), c.word.end(), [](char ch) { return is_space(ch); })) continue;
    if (!seen.insert(c.word).second) continue;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

CandidateSet build_candidates(FillMaskProvider& provider, const TaskDescription& d,
                              std::size_t position, std::size_t k) {
  CandidateSet set{position, {}};
  for (auto& c : filtered_words(provider, d, position, k)) {
    set.candidates.push_back(Candidate::word(std::move(c.word), c.probability));
  }
  set.candidates.push_back(Candidate::deletion());
  return set;
}

std::vector<NeighborVariant> neighborhood(FillMaskProvider& provider, const TaskDescription& d,
                                          std::size_t k) {
  std::vector<NeighborVariant> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (has_placeholder(d.word(i))) continue;
    for (auto& c : filtered_words(provider, d, i, k)) {
      out.push_back({d.with_word(i, c.word), i, c.word});
    }
  }
  return out;
}

}  // namespace lexprompt
