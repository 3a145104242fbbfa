#pragma once

#include <atomic>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexprompt/cache.hpp"
#include "lexprompt/oracle.hpp"
#include "lexprompt/prompt.hpp"
#include "lexprompt/ratio.hpp"
#include "lexprompt/task_data.hpp"

namespace lexprompt {

// Maps a raw completion to a verbalizer label under the verbalizer's policy:
//   first_token      first whitespace token, punctuation-stripped, case-folded
//   contains_unique  exactly one token anywhere in the response is a label
//   label_tag        text inside the last <label>...</label> pair
// Pure; no match is a value, not an error.
std::optional<std::string> match_response(std::string_view raw, const Verbalizer& v);

struct EvaluationRecord {
  std::string prompt_hash;
  std::string task_id;
  std::string raw_response;
  std::optional<std::string> matched_label;
  bool correct = false;

  friend bool operator==(const EvaluationRecord&, const EvaluationRecord&) = default;
};

struct BatchResult {
  std::vector<EvaluationRecord> records;
  std::size_t correct_count = 0;
  std::size_t oracle_calls = 0;
  std::size_t cache_hits = 0;

  Ratio accuracy() const { return {correct_count, records.size()}; }
  Ratio loss() const { return {records.size() - correct_count, records.size()}; }

  friend bool operator==(const BatchResult&, const BatchResult&) = default;
};

// Scores templates on task batches through an oracle, answering from the
// cache whenever the (prompt, oracle identity, decoding) key is known.
class Evaluator {
 public:
  Evaluator(CompletionOracle& oracle, ResponseCache& cache) : oracle_(oracle), cache_(cache) {}

  BatchResult evaluate_batch(const PromptTemplate& t, std::span<const TaskInstance> batch,
                             const Verbalizer& verbalizer);

  // Batch evaluations requested, and those that reached the oracle at least once.
  std::size_t evaluations() const noexcept { return evaluations_; }
  std::size_t oracle_evaluations() const noexcept { return oracle_evaluations_; }
  std::size_t oracle_calls() const noexcept { return oracle_calls_; }

  CompletionOracle& oracle() noexcept { return oracle_; }

 private:
  CompletionOracle& oracle_;
  ResponseCache& cache_;
  std::atomic<std::size_t> evaluations_{0};
  std::atomic<std::size_t> oracle_evaluations_{0};
  std::atomic<std::size_t> oracle_calls_{0};
};

// L_ref: proxy loss of a description, everything else in the template and
// the reference batch held fixed.
class ProxyObjective {
 public:
  ProxyObjective(Evaluator& evaluator, PromptTemplate base, std::vector<TaskInstance> batch,
                 Verbalizer verbalizer);

  Ratio loss(const TaskDescription& d);
  BatchResult evaluate(const TaskDescription& d);

  const PromptTemplate& base_template() const noexcept { return base_; }
  const std::vector<TaskInstance>& batch() const noexcept { return batch_; }

 private:
  Evaluator& evaluator_;
  PromptTemplate base_;
  std::vector<TaskInstance> batch_;
  Verbalizer verbalizer_;
};

}  // namespace lexprompt
