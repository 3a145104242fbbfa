#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "lexprompt/optimizer.hpp"
#include "lexprompt/task_data.hpp"

namespace lexprompt::app {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

struct PoolSpec {
  std::filesystem::path path;
  PoolFormat format = PoolFormat::jsonl;
  std::string name;
};

// One run = one JSON config file. Relative paths resolve against the
// config file's directory.
//
//   {
//     "run_dir": "runs/cola",
//     "template": "cola_original.json",
//     "proxy_pool": {"path": "train.jsonl", "format": "jsonl"},
//     "eval_pool":  {"path": "validation.jsonl"},
//     "labels": ["Yes", "No"], "match_policy": "first_token",
//     "oracle":   {"kind": "openai" | "replay" | "rule", ...},
//     "provider": {"kind": "http" | "static", ...},
//     "cache": "cache.jsonl",
//     "params": {"reference_size": 100, "candidate_k": 30,
//                "target_fraction": 0.7, "seed": 0, "order": "influence",
//                "neighborhood_k": 10}
//   }
struct RunConfig {
  std::filesystem::path base_dir;
  std::filesystem::path run_dir;
  std::filesystem::path template_path;
  std::optional<PoolSpec> proxy_pool;
  std::optional<PoolSpec> eval_pool;
  std::optional<Verbalizer> verbalizer;
  nlohmann::json oracle;
  nlohmann::json provider;
  std::filesystem::path cache_path;
  OptimizationParams params;
  std::size_t neighborhood_k = 10;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Command-line overrides; unset fields keep the config value.
struct Overrides {
  std::optional<std::filesystem::path> run_dir;
  std::optional<std::filesystem::path> template_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> seeds;
  std::optional<OrderMode> order;
  std::optional<std::size_t> candidate_k;
  std::optional<std::size_t> reference_size;
  std::optional<double> target_fraction;
  std::optional<std::size_t> neighborhood_k;
  std::string pool = "eval";  // evaluate/neighborhood: "eval" or "proxy"
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

TaskPool load_pool(const RunConfig& cfg, const PoolSpec& spec);
std::unique_ptr<CompletionOracle> make_oracle(const RunConfig& cfg, const PromptTemplate& t);
std::unique_ptr<FillMaskProvider> make_provider(const RunConfig& cfg);

int cmd_optimize(const RunConfig& cfg, std::size_t seeds, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& cfg, const std::string& pool, std::ostream& out,
                 std::ostream& err);
int cmd_influence(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_neighborhood(const RunConfig& cfg, const std::string& pool, std::ostream& out,
                     std::ostream& err);
int cmd_report(const std::filesystem::path& trace_path,
               const std::optional<std::filesystem::path>& out_path, std::ostream& out,
               std::ostream& err);

std::string render_report(const OptimizationTrace& trace);

}  // namespace lexprompt::app
