#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexprompt/prompt.hpp"

namespace lexprompt {

// One labeled example (X, Y).
struct TaskInstance {
  std::string id;
  SlotMap slots;
  std::string gold;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

class TaskPool {
 public:
  // Validates: nonempty, unique ids, every gold is a verbalizer label.
  TaskPool(std::string name, std::vector<TaskInstance> instances, Verbalizer verbalizer);

  const std::string& name() const noexcept { return name_; }
  const std::vector<TaskInstance>& instances() const noexcept { return instances_; }
  const Verbalizer& verbalizer() const noexcept { return verbalizer_; }
  std::size_t size() const noexcept { return instances_.size(); }

 private:
  std::string name_;
  std::vector<TaskInstance> instances_;
  Verbalizer verbalizer_;
};

struct ReferenceBatch {
  std::string pool_name;
  std::uint64_t seed = 0;
  std::vector<TaskInstance> instances;
};

enum class PoolFormat { jsonl, tsv };

PoolFormat parse_pool_format(std::string_view s);

// JSONL: one {"id", "slots", "gold"} object per line; an optional first line
// {"header": {"name", "labels", "match_policy"}} declares the verbalizer.
// TSV: a header row naming the columns; "gold" holds the answer, "id" is
// optional (ids default to "row<N>"), every other column is a slot.
// When both a file header and `verbalizer` are present they must agree.
TaskPool load_pool(const std::filesystem::path& path, PoolFormat format,
                   std::optional<Verbalizer> verbalizer = std::nullopt,
                   std::string name = {});

// Uniform sample of n instances without replacement, in sampled order.
// Bitwise reproducible for a given (pool, n, seed).
ReferenceBatch sample_reference(const TaskPool& pool, std::size_t n, std::uint64_t seed);

inline std::string render_prompt(const PromptTemplate& t, const TaskInstance& task) {
  return render_prompt(t, task.slots);
}

}  // namespace lexprompt
