#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lexprompt/cache.hpp"
#include "lexprompt/error.hpp"
#include "lexprompt/influence.hpp"
#include "lexprompt/lexical.hpp"
#include "lexprompt/oracle.hpp"
#include "lexprompt/prompt.hpp"
#include "lexprompt/ratio.hpp"
#include "lexprompt/task_data.hpp"

namespace lexprompt {

enum class OrderMode { influence, random };

std::string_view to_string(OrderMode m) noexcept;
OrderMode parse_order_mode(std::string_view s);

struct OptimizationParams {
  std::size_t reference_size = 100;
  std::size_t candidate_k = 30;
  double target_fraction = 0.7;
  std::uint64_t seed = 0;
  OrderMode order = OrderMode::influence;

  void validate() const;

  friend bool operator==(const OptimizationParams&, const OptimizationParams&) = default;
};

struct CandidateLoss {
  Candidate candidate;
  Ratio loss;

  friend bool operator==(const CandidateLoss&, const CandidateLoss&) = default;
};

struct IterationRecord {
  std::size_t step = 0;
  std::size_t position = 0;       // index in the initial description
  std::size_t current_index = 0;  // index in the description being edited
  std::string original_word;
  bool skipped = false;           // word carries a placeholder; left untouched
  std::vector<CandidateLoss> tried;
  std::optional<Candidate> best_candidate;
  Ratio loss_before;
  Ratio loss_after;
  bool accepted = false;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct ReferenceInfo {
  std::string pool_name;
  std::uint64_t seed = 0;
  std::vector<std::string> ids;

  friend bool operator==(const ReferenceInfo&, const ReferenceInfo&) = default;
};

struct OptimizationTrace {
  TaskDescription initial_description;
  OptimizationParams params;
  ReferenceInfo reference;
  std::vector<InfluenceScore> influence;
  std::vector<std::size_t> targets;
  std::vector<IterationRecord> iterations;
  TaskDescription final_description;
  Ratio initial_loss;
  Ratio final_loss;
  std::optional<std::string> aborted;  // cause, when the run stopped early

  friend bool operator==(const OptimizationTrace&, const OptimizationTrace&) = default;
};

// Raised when the oracle or provider fails after influence ranking; the
// trace holds every iteration completed before the failure.
class RunAborted : public Error {
 public:
  RunAborted(OptimizationTrace partial, const std::string& cause)
      : Error("optimization aborted: " + cause), trace_(std::move(partial)) {}
  const OptimizationTrace& trace() const noexcept { return trace_; }

 private:
  OptimizationTrace trace_;
};

// The greedy single pass over an arbitrary proxy loss:
//   1. influence of every word on the initial description (once);
//   2. targets = most influential ceil(fraction * n) words, or a seeded
//      random order of the same size;
//   3. for each target, candidates from the current description; the
//      lowest-loss candidate (first in candidate order on ties) replaces
//      the word only if strictly better than the current loss.
OptimizationTrace optimize_description(const LossFunction& loss, FillMaskProvider& provider,
                                       const TaskDescription& initial,
                                       const OptimizationParams& params);

struct RunStats {
  std::size_t evaluations = 0;
  std::size_t oracle_evaluations = 0;
  std::size_t oracle_calls = 0;
};

struct OptimizationResult {
  PromptTemplate optimized;
  OptimizationTrace trace;
  RunStats stats;
};

// Samples the proxy batch once from `proxy_pool`, then optimizes the
// template's description against it. Only the description changes.
OptimizationResult optimize(CompletionOracle& oracle, FillMaskProvider& provider,
                            const PromptTemplate& t, const TaskPool& proxy_pool,
                            const OptimizationParams& params, ResponseCache& cache);

// Re-applies the accepted substitutions to the initial description after
// checking every trace invariant. Throws CorruptTrace.
TaskDescription replay(const OptimizationTrace& trace);

nlohmann::json trace_to_json(const OptimizationTrace& trace);
OptimizationTrace trace_from_json(const nlohmann::json& j);
void write_trace_file(const std::filesystem::path& path, const OptimizationTrace& trace);
OptimizationTrace read_trace_file(const std::filesystem::path& path);

}  // namespace lexprompt
