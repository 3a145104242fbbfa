#include "lexprompt/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "lexprompt/clients.hpp"
#include "lexprompt/eval.hpp"
#include "lexprompt/lexical.hpp"
#include "lexprompt/mocks.hpp"
#include "lexprompt/text.hpp"

namespace lexprompt::app {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string show(const Ratio& r) { return fixed(r.value()) + " (" + r.str() + ")"; }

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

PoolSpec pool_spec_from(const nlohmann::json& j, const fs::path& base) {
  if (j.is_string()) return {resolve(base, j.get<std::string>()), PoolFormat::jsonl, {}};
  PoolSpec spec;
  spec.path = resolve(base, j.at("path").get<std::string>());
  spec.format = parse_pool_format(j.value("format", std::string("jsonl")));
  spec.name = j.value("name", std::string{});
  return spec;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Maps library errors onto exit codes with a one-line diagnostic.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
}

void require_distinct_pools(const RunConfig& cfg) {
  if (!cfg.proxy_pool || !cfg.eval_pool) return;
  std::error_code ec;
  if (fs::equivalent(cfg.proxy_pool->path, cfg.eval_pool->path, ec)) {
    throw ConfigError("proxy_pool and eval_pool must be different files");
  }
}

const PoolSpec& pick_pool(const RunConfig& cfg, const std::string& which) {
  if (which == "proxy") {
    if (!cfg.proxy_pool) throw ConfigError("config has no proxy_pool");
    return *cfg.proxy_pool;
  }
  if (which != "eval") throw ConfigError("pool must be 'eval' or 'proxy'");
  if (cfg.eval_pool) return *cfg.eval_pool;
  if (cfg.proxy_pool) return *cfg.proxy_pool;
  throw ConfigError("config has no pools");
}

PromptTemplate load_template(const RunConfig& cfg) {
  if (!fs::exists(cfg.template_path)) {
    throw ConfigError("template file " + cfg.template_path.string() + " does not exist");
  }
  return read_template_file(cfg.template_path);
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  try {
    RunConfig cfg;
    cfg.base_dir = base_dir;
    cfg.run_dir = resolve(base_dir, j.value("run_dir", std::string("run")));
    cfg.template_path = resolve(base_dir, j.at("template").get<std::string>());
    if (j.contains("proxy_pool")) cfg.proxy_pool = pool_spec_from(j.at("proxy_pool"), base_dir);
    if (j.contains("eval_pool")) cfg.eval_pool = pool_spec_from(j.at("eval_pool"), base_dir);
    if (j.contains("labels")) {
      cfg.verbalizer = Verbalizer(j.at("labels").get<std::vector<std::string>>(),
                                  parse_match_policy(j.value("match_policy", std::string("first_token"))));
    }
    cfg.oracle = j.value("oracle", nlohmann::json::object());
    cfg.provider = j.value("provider", nlohmann::json::object());
    cfg.cache_path = j.contains("cache") ? resolve(base_dir, j.at("cache").get<std::string>())
                                         : cfg.run_dir / "cache.jsonl";
    if (j.contains("params")) {
      const auto& p = j.at("params");
      cfg.params.reference_size = p.value("reference_size", cfg.params.reference_size);
      cfg.params.candidate_k = p.value("candidate_k", cfg.params.candidate_k);
      cfg.params.target_fraction = p.value("target_fraction", cfg.params.target_fraction);
      cfg.params.seed = p.value("seed", cfg.params.seed);
      cfg.params.order = parse_order_mode(p.value("order", std::string("influence")));
      cfg.neighborhood_k = p.value("neighborhood_k", cfg.neighborhood_k);
    }
    cfg.params.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file " + path.string() + " does not exist");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, fs::absolute(path).parent_path());
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.run_dir) {
    const bool default_cache = cfg.cache_path == cfg.run_dir / "cache.jsonl";
    cfg.run_dir = *o.run_dir;
    if (default_cache) cfg.cache_path = cfg.run_dir / "cache.jsonl";
  }
  if (o.template_path) cfg.template_path = *o.template_path;
  if (o.seed) cfg.params.seed = *o.seed;
  if (o.order) cfg.params.order = *o.order;
  if (o.candidate_k) cfg.params.candidate_k = *o.candidate_k;
  if (o.reference_size) cfg.params.reference_size = *o.reference_size;
  if (o.target_fraction) cfg.params.target_fraction = *o.target_fraction;
  if (o.neighborhood_k) cfg.neighborhood_k = *o.neighborhood_k;
  try {
    cfg.params.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

TaskPool load_pool(const RunConfig& cfg, const PoolSpec& spec) {
  return lexprompt::load_pool(spec.path, spec.format, cfg.verbalizer, spec.name);
}

std::unique_ptr<CompletionOracle> make_oracle(const RunConfig& cfg, const PromptTemplate& t) {
  const auto kind = cfg.oracle.value("kind", std::string{});
  if (kind == "openai") {
    return std::make_unique<OpenAICompletionClient>(OracleConfig::from_json(cfg.oracle));
  }
  if (kind == "replay") {
    return std::make_unique<TranscriptOracle>(TranscriptOracle::load(
        resolve(cfg.base_dir, cfg.oracle.at("transcript").get<std::string>())));
  }
  if (kind == "rule") {
    const auto which = cfg.oracle.value("tasks", std::string("both"));
    std::vector<TaskInstance> tasks;
    std::optional<Verbalizer> verbalizer;
    auto add = [&](const std::optional<PoolSpec>& spec) {
      if (!spec) return;
      auto pool = load_pool(cfg, *spec);
      if (!verbalizer) verbalizer = pool.verbalizer();
      tasks.insert(tasks.end(), pool.instances().begin(), pool.instances().end());
    };
    if (which == "proxy" || which == "both") add(cfg.proxy_pool);
    if (which == "eval" || which == "both") add(cfg.eval_pool);
    if (!verbalizer) throw ConfigError("rule oracle needs at least one pool");
    return std::make_unique<RuleOracle>(RuleSpec::from_json(cfg.oracle), t, std::move(tasks),
                                        *verbalizer);
  }
  throw ConfigError("oracle.kind must be one of openai, replay, rule");
}

std::unique_ptr<FillMaskProvider> make_provider(const RunConfig& cfg) {
  const auto kind = cfg.provider.value("kind", std::string{});
  if (kind == "http") {
    return std::make_unique<HttpFillMaskClient>(FillMaskConfig::from_json(cfg.provider));
  }
  if (kind == "static") {
    if (cfg.provider.contains("table_file")) {
      return std::make_unique<StaticFillMaskProvider>(StaticFillMaskProvider::load(
          resolve(cfg.base_dir, cfg.provider.at("table_file").get<std::string>())));
    }
    return std::make_unique<StaticFillMaskProvider>(
        StaticFillMaskProvider::from_json(cfg.provider.value("table", nlohmann::json::object())));
  }
  throw ConfigError("provider.kind must be one of http, static");
}

std::string render_report(const OptimizationTrace& trace) {
  std::ostringstream os;
  std::size_t accepted = 0;
  for (const auto& it : trace.iterations) accepted += it.accepted ? 1 : 0;

  os << "Run summary\n";
  os << "  status:              " << (trace.aborted ? "aborted: " + *trace.aborted : "complete")
     << "\n";
  os << "  initial description: " << trace.initial_description.render() << "\n";
  os << "  final description:   " << trace.final_description.render() << "\n";
  os << "  proxy loss:          " << show(trace.initial_loss) << " -> " << show(trace.final_loss)
     << "\n";
  os << "  reference batch:     pool '" << trace.reference.pool_name << "', seed "
     << trace.reference.seed << ", " << trace.reference.ids.size() << " tasks\n";
  os << "  params:              k=" << trace.params.candidate_k
     << " fraction=" << fixed(trace.params.target_fraction, 2)
     << " n_ref=" << trace.params.reference_size << " order=" << to_string(trace.params.order)
     << "\n";
  os << "  accepted:            " << accepted << " of " << trace.iterations.size()
     << " iterations\n\n";

  os << "Influence ranking\n";
  std::vector<InfluenceScore> ranked = trace.influence;
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.influence > b.influence;
  });
  for (const auto& s : ranked) {
    os << "  " << pad(std::to_string(s.word_index), 4)
       << pad(trace.initial_description.word(s.word_index), 20) << fixed(s.influence.value())
       << "\n";
  }
  os << "\nIterations\n";
  for (const auto& it : trace.iterations) {
    const std::string best = it.best_candidate ? it.best_candidate->label() : "-";
    const std::string status =
        it.skipped ? "skipped" : (it.accepted ? "accepted" : "rejected");
    os << "  step " << it.step << "  pos " << it.position << "  " << pad(it.original_word, 14)
       << " -> " << pad(best, 14) << " tried " << it.tried.size() << "  loss "
       << fixed(it.loss_before.value()) << " -> " << fixed(it.loss_after.value()) << "  "
       << status << "\n";
  }
  return os.str();
}

int cmd_optimize(const RunConfig& cfg, std::size_t seeds, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (seeds < 1) throw ConfigError("--seeds must be at least 1");
    if (!cfg.proxy_pool) throw ConfigError("optimize needs a proxy_pool");
    require_distinct_pools(cfg);
    const auto tmpl = load_template(cfg);
    const auto proxy = load_pool(cfg, *cfg.proxy_pool);
    std::optional<TaskPool> eval;
    if (cfg.eval_pool) eval = load_pool(cfg, *cfg.eval_pool);
    auto oracle = make_oracle(cfg, tmpl);
    auto provider = make_provider(cfg);
    ResponseCache cache(cfg.cache_path);
    fs::create_directories(cfg.run_dir);

    std::ostringstream summary;
    std::vector<double> final_losses;
    std::vector<double> eval_accuracies;
    std::optional<Ratio> original_eval;
    RunStats totals;

    for (std::size_t s = 0; s < seeds; ++s) {
      auto params = cfg.params;
      params.seed = cfg.params.seed + s;
      const auto tag = "seed" + std::to_string(params.seed);
      OptimizationResult result = [&] {
        try {
          return optimize(*oracle, *provider, tmpl, proxy, params, cache);
        } catch (const RunAborted& e) {
          write_trace_file(cfg.run_dir / ("trace_" + tag + ".json"), e.trace());
          throw;
        }
      }();
      write_trace_file(cfg.run_dir / ("trace_" + tag + ".json"), result.trace);
      write_template_file(cfg.run_dir / ("template_" + tag + ".json"), result.optimized);
      final_losses.push_back(result.trace.final_loss.value());
      totals.evaluations += result.stats.evaluations;
      totals.oracle_evaluations += result.stats.oracle_evaluations;
      totals.oracle_calls += result.stats.oracle_calls;

      summary << "== " << tag << " ==\n" << render_report(result.trace);
      if (eval) {
        Evaluator evaluator(*oracle, cache);
        if (!original_eval) {
          original_eval = evaluator.evaluate_batch(tmpl, eval->instances(), eval->verbalizer()).accuracy();
        }
        const auto acc =
            evaluator.evaluate_batch(result.optimized, eval->instances(), eval->verbalizer())
                .accuracy();
        eval_accuracies.push_back(acc.value());
        totals.oracle_calls += evaluator.oracle_calls();
        summary << "  eval accuracy '" << eval->name() << "': " << show(*original_eval) << " -> "
                << show(acc) << "\n";
      }
      summary << "\n";
    }

    auto mean_sd = [](const std::vector<double>& v) {
      double mean = 0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0;
      for (double x : v) var += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
      return fixed(mean) + " +/- " + fixed(sd);
    };
    summary << "== aggregate over " << seeds << " seed(s) ==\n";
    summary << "  final proxy loss: " << mean_sd(final_losses) << "\n";
    if (!eval_accuracies.empty()) summary << "  eval accuracy:    " << mean_sd(eval_accuracies) << "\n";

    write_text_file(cfg.run_dir / "summary.txt", summary.str());
    out << summary.str();
    out << "oracle calls: " << totals.oracle_calls << " (batch evaluations " << totals.evaluations
        << ", reaching the oracle " << totals.oracle_evaluations << ")\n";
    return kOk;
  });
}

int cmd_evaluate(const RunConfig& cfg, const std::string& pool_name, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const auto tmpl = load_template(cfg);
    const auto pool = load_pool(cfg, pick_pool(cfg, pool_name));
    auto oracle = make_oracle(cfg, tmpl);
    ResponseCache cache(cfg.cache_path);
    Evaluator evaluator(*oracle, cache);
    const auto result = evaluator.evaluate_batch(tmpl, pool.instances(), pool.verbalizer());

    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : result.records) {
      records.push_back({{"task_id", r.task_id},
                         {"prompt_hash", r.prompt_hash},
                         {"raw_response", r.raw_response},
                         {"matched_label", r.matched_label ? nlohmann::json(*r.matched_label)
                                                           : nlohmann::json()},
                         {"correct", r.correct}});
    }
    const nlohmann::json report = {
        {"pool", pool.name()},
        {"template", cfg.template_path.filename().string()},
        {"correct", result.correct_count},
        {"total", result.records.size()},
        {"accuracy", result.accuracy().value()},
        {"records", records},
    };
    fs::create_directories(cfg.run_dir);
    write_text_file(cfg.run_dir / ("evaluate_" + pool.name() + ".json"), report.dump(2) + "\n");
    out << "pool " << pool.name() << ": accuracy " << show(result.accuracy()) << "\n";
    out << "oracle calls: " << result.oracle_calls << ", cache hits: " << result.cache_hits << "\n";
    return kOk;
  });
}

int cmd_influence(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!cfg.proxy_pool) throw ConfigError("influence needs a proxy_pool");
    const auto tmpl = load_template(cfg);
    const auto proxy = load_pool(cfg, *cfg.proxy_pool);
    auto oracle = make_oracle(cfg, tmpl);
    ResponseCache cache(cfg.cache_path);
    Evaluator evaluator(*oracle, cache);
    auto batch = sample_reference(proxy, cfg.params.reference_size, cfg.params.seed);
    ProxyObjective objective(evaluator, tmpl, std::move(batch.instances), proxy.verbalizer());
    const auto scores = compute_influence(objective, tmpl.description);
    const auto order = select_targets(scores, 1.0);

    std::ostringstream table;
    table << "word\tindex\tinfluence\n";
    for (auto idx : order) {
      table << tmpl.description.word(idx) << "\t" << idx << "\t"
            << fixed(scores[idx].influence.value()) << "\n";
    }
    fs::create_directories(cfg.run_dir);
    write_text_file(cfg.run_dir / "influence.tsv", table.str());
    out << "base proxy loss " << show(scores.front().base_loss) << "\n" << table.str();
    return kOk;
  });
}

int cmd_neighborhood(const RunConfig& cfg, const std::string& pool_name, std::ostream& out,
                     std::ostream& err) {
  return guarded(err, [&] {
    const auto tmpl = load_template(cfg);
    const auto pool = load_pool(cfg, pick_pool(cfg, pool_name));
    auto oracle = make_oracle(cfg, tmpl);
    auto provider = make_provider(cfg);
    ResponseCache cache(cfg.cache_path);
    Evaluator evaluator(*oracle, cache);

    const auto original =
        evaluator.evaluate_batch(tmpl, pool.instances(), pool.verbalizer()).accuracy();
    std::ostringstream csv;
    csv << "variant_text,changed_position,candidate,accuracy\n";
    const auto variants = neighborhood(*provider, tmpl.description, cfg.neighborhood_k);
    for (const auto& v : variants) {
      const auto acc = evaluator
                           .evaluate_batch(tmpl.with_description(v.description), pool.instances(),
                                           pool.verbalizer())
                           .accuracy();
      csv << csv_field(v.description.render()) << "," << v.position << ","
          << csv_field(v.candidate) << "," << fixed(acc.value(), 6) << "\n";
    }
    fs::create_directories(cfg.run_dir);
    write_text_file(cfg.run_dir / "neighborhood.csv", csv.str());
    out << "original accuracy " << show(original) << "; " << variants.size()
        << " neighborhood variants written to " << (cfg.run_dir / "neighborhood.csv").string()
        << "\n";
    return kOk;
  });
}

int cmd_report(const fs::path& trace_path, const std::optional<fs::path>& out_path,
               std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!fs::exists(trace_path)) throw ConfigError("trace file " + trace_path.string() + " does not exist");
    const auto trace = read_trace_file(trace_path);
    replay(trace);
    const auto text = render_report(trace);
    if (out_path) write_text_file(*out_path, text);
    out << text;
    return kOk;
  });
}

}  // namespace lexprompt::app
