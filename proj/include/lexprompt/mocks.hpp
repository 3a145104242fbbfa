#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "lexprompt/oracle.hpp"
#include "lexprompt/prompt.hpp"
#include "lexprompt/task_data.hpp"

namespace lexprompt {

// Offline replay: responses looked up by sha256(prompt). Transcript files
// hold one {"prompt_hash", "response"} object per line. Unknown prompts
// raise OracleFailure.
class TranscriptOracle : public CompletionOracle {
 public:
  TranscriptOracle(std::unordered_map<std::string, std::string> table, std::string identity);

  static TranscriptOracle load(const std::filesystem::path& transcript);

  std::string complete(const std::string& prompt) override;
  std::string identity() const override { return identity_; }

 private:
  std::unordered_map<std::string, std::string> table_;
  std::string identity_;
};

struct LossRule {
  enum class Kind { contains_word, word_at };

  Kind kind = Kind::contains_word;
  std::string word;
  std::size_t position = 0;  // word_at only
  double delta = 0.0;

  bool holds(const TaskDescription& d) const;
};

// Declarative proxy loss: base_loss plus the delta of every rule that
// holds, clamped to [0, 1].
struct RuleSpec {
  double base_loss = 0.5;
  std::vector<LossRule> rules;

  double loss_for(const TaskDescription& d) const;

  static RuleSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Language-model-free oracle for optimizer tests. It reads the description
// back out of the rendered prompt, identifies the task by its question
// block, and answers task i of N correctly iff (i + 0.5) / N >= loss. Over
// the full task list the error count is exactly #{i : (i + 0.5) / N < loss}.
class RuleOracle : public CompletionOracle {
 public:
  RuleOracle(RuleSpec spec, const PromptTemplate& t, std::vector<TaskInstance> tasks,
             Verbalizer verbalizer);

  std::string complete(const std::string& prompt) override;
  std::string identity() const override { return identity_; }

  TaskDescription extract_description(const std::string& prompt) const;
  const RuleSpec& spec() const noexcept { return spec_; }

 private:
  RuleSpec spec_;
  std::vector<TaskInstance> tasks_;
  Verbalizer verbalizer_;
  std::string header_prefix_;
  std::string header_marker_;
  std::map<std::size_t, std::unordered_map<std::string, std::size_t>> tails_by_length_;
  std::string identity_;
};

// Wraps another oracle and counts complete() calls.
class CountingOracle : public CompletionOracle {
 public:
  explicit CountingOracle(CompletionOracle& inner) : inner_(inner) {}

  std::string complete(const std::string& prompt) override {
    ++calls_;
    return inner_.complete(prompt);
  }
  std::string identity() const override { return inner_.identity(); }
  DecodingParams decoding() const override { return inner_.decoding(); }
  std::size_t parallelism() const override { return inner_.parallelism(); }

  std::size_t calls() const noexcept { return calls_; }

 private:
  CompletionOracle& inner_;
  std::atomic<std::size_t> calls_{0};
};

// Oracle backed by a callable; handy in tests.
class FunctionOracle : public CompletionOracle {
 public:
  FunctionOracle(std::function<std::string(const std::string&)> fn, std::string identity)
      : fn_(std::move(fn)), identity_(std::move(identity)) {}

  std::string complete(const std::string& prompt) override { return fn_(prompt); }
  std::string identity() const override { return identity_; }

 private:
  std::function<std::string(const std::string&)> fn_;
  std::string identity_;
};

// Fill-mask provider from a pinned table. Lookup order: the exact masked
// text, then the word index of the mask, else no candidates.
class StaticFillMaskProvider : public FillMaskProvider {
 public:
  StaticFillMaskProvider() = default;

  void set_text(std::string masked_text, std::vector<FillCandidate> candidates);
  void set_position(std::size_t position, std::vector<FillCandidate> candidates);

  static StaticFillMaskProvider from_json(const nlohmann::json& j);
  static StaticFillMaskProvider load(const std::filesystem::path& path);

 protected:
  std::vector<FillCandidate> do_fill_mask(std::string_view masked_text, std::size_t k) override;

 private:
  std::unordered_map<std::string, std::vector<FillCandidate>> by_text_;
  std::map<std::size_t, std::vector<FillCandidate>> by_position_;
};

}  // namespace lexprompt
