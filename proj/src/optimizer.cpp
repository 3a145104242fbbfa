#include "lexprompt/optimizer.hpp"

#include <fstream>

#include "lexprompt/eval.hpp"
#include "lexprompt/rng.hpp"
#include "lexprompt/text.hpp"

namespace lexprompt {

std::string_view to_string(OrderMode m) noexcept {
  return m == OrderMode::random ? "random" : "influence";
}

OrderMode parse_order_mode(std::string_view s) {
  if (s == "influence") return OrderMode::influence;
  if (s == "random") return OrderMode::random;
  throw ConfigError("unknown order mode '" + std::string(s) + "'");
}

void OptimizationParams::validate() const {
  if (reference_size < 1) throw InvalidArgument("reference_size must be at least 1");
  if (candidate_k < 1) throw InvalidArgument("candidate_k must be at least 1");
  if (!(target_fraction > 0.0 && target_fraction <= 1.0)) {
    throw InvalidArgument("target_fraction must be in (0, 1]");
  }
}

namespace {

// Words of the initial description addressed by their original position;
// deleted words leave a hole so later targets keep their identity.
class EditedDescription {
 public:
  explicit EditedDescription(const TaskDescription& d) {
    for (const auto& w : d.words()) slots_.emplace_back(w);
  }

  bool present(std::size_t position) const {
    return position < slots_.size() && slots_[position].has_value();
  }
  const std::string& word(std::size_t position) const { return *slots_.at(position); }

  std::size_t current_index(std::size_t position) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < position; ++i) idx += slots_[i] ? 1 : 0;
    return idx;
  }

  void apply(std::size_t position, const Candidate& c) {
    if (c.is_delete()) {
      slots_.at(position).reset();
    } else {
      slots_.at(position) = c.surface;
    }
  }

  TaskDescription current() const {
    std::vector<std::string> words;
    for (const auto& s : slots_) {
      if (s) words.push_back(*s);
    }
    return TaskDescription(std::move(words));
  }

 private:
  std::vector<std::optional<std::string>> slots_;
};

constexpr std::uint64_t kOrderSeedSalt = 0x9E3779B97F4A7C15ULL;

}  // namespace

OptimizationTrace optimize_description(const LossFunction& loss, FillMaskProvider& provider,
                                       const TaskDescription& initial,
                                       const OptimizationParams& params) {
  params.validate();

  OptimizationTrace trace{
      .initial_description = initial,
      .params = params,
      .final_description = initial,
  };
  trace.influence = compute_influence(loss, initial);
  trace.initial_loss = trace.influence.front().base_loss;
  trace.final_loss = trace.initial_loss;
  trace.targets = params.order == OrderMode::influence
                      ? select_targets(trace.influence, params.target_fraction)
                      : random_targets(initial.size(), params.target_fraction,
                                       params.seed ^ kOrderSeedSalt);

  EditedDescription edited(initial);
  TaskDescription current = initial;
  Ratio current_loss = trace.initial_loss;

  try {
    for (std::size_t step = 0; step < trace.targets.size(); ++step) {
      const std::size_t position = trace.targets[step];
      IterationRecord rec{
          .step = step,
          .position = position,
          .current_index = edited.current_index(position),
          .original_word = edited.word(position),
          .loss_before = current_loss,
          .loss_after = current_loss,
      };
      if (has_placeholder(rec.original_word)) {
        rec.skipped = true;
        trace.iterations.push_back(std::move(rec));
        continue;
      }

      const auto set = build_candidates(provider, current, rec.current_index, params.candidate_k);
      std::optional<Ratio> best_loss;
      for (const auto& c : set.candidates) {
        if (c.is_delete() && current.size() == 1) continue;
        const auto variant = c.is_delete() ? current.without_word(rec.current_index)
                                           : current.with_word(rec.current_index, c.surface);
        const Ratio l = loss(variant);
        rec.tried.push_back({c, l});
        if (!best_loss || l < *best_loss) {
          best_loss = l;
          rec.best_candidate = c;
        }
      }

      if (best_loss && *best_loss < current_loss) {
        edited.apply(position, *rec.best_candidate);
        current = edited.current();
        current_loss = *best_loss;
        rec.accepted = true;
        rec.loss_after = current_loss;
      }
      trace.iterations.push_back(std::move(rec));
      trace.final_description = current;
      trace.final_loss = current_loss;
    }
  } catch (const Error& e) {
    trace.aborted = e.what();
    throw RunAborted(std::move(trace), e.what());
  }
  return trace;
}

OptimizationResult optimize(CompletionOracle& oracle, FillMaskProvider& provider,
                            const PromptTemplate& t, const TaskPool& proxy_pool,
                            const OptimizationParams& params, ResponseCache& cache) {
  params.validate();
  auto batch = sample_reference(proxy_pool, params.reference_size, params.seed);
  ReferenceInfo reference{batch.pool_name, batch.seed, {}};
  for (const auto& inst : batch.instances) reference.ids.push_back(inst.id);

  Evaluator evaluator(oracle, cache);
  ProxyObjective objective(evaluator, t, std::move(batch.instances), proxy_pool.verbalizer());
  auto loss = [&](const TaskDescription& d) { return objective.loss(d); };

  OptimizationTrace trace = [&] {
    try {
      return optimize_description(loss, provider, t.description, params);
    } catch (RunAborted& e) {
      auto partial = e.trace();
      partial.reference = reference;
      throw RunAborted(std::move(partial), *e.trace().aborted);
    }
  }();
  trace.reference = std::move(reference);

  RunStats stats{evaluator.evaluations(), evaluator.oracle_evaluations(), evaluator.oracle_calls()};
  return {t.with_description(trace.final_description), std::move(trace), stats};
}

TaskDescription replay(const OptimizationTrace& trace) {
  const auto fail = [](const std::string& why) { throw CorruptTrace(why); };
  const auto n = trace.initial_description.size();

  if (!trace.aborted && trace.iterations.size() != trace.targets.size()) {
    fail("iteration count " + std::to_string(trace.iterations.size()) + " != target count " +
         std::to_string(trace.targets.size()));
  }
  if (trace.iterations.size() > trace.targets.size()) fail("more iterations than targets");

  EditedDescription edited(trace.initial_description);
  Ratio loss = trace.initial_loss;
  for (std::size_t t = 0; t < trace.iterations.size(); ++t) {
    const auto& it = trace.iterations[t];
    const auto where = "iteration " + std::to_string(t) + ": ";
    if (it.step != t) fail(where + "step out of sequence");
    if (it.position != trace.targets[t] || it.position >= n) fail(where + "position mismatch");
    if (!edited.present(it.position) || edited.word(it.position) != it.original_word) {
      fail(where + "original word mismatch");
    }
    if (!(it.loss_before == loss)) fail(where + "loss_before breaks the loss chain");
    if (it.accepted) {
      if (!(it.loss_after < it.loss_before)) fail(where + "accepted without strict improvement");
      if (!it.best_candidate) fail(where + "accepted without a candidate");
      edited.apply(it.position, *it.best_candidate);
    } else if (!(it.loss_after == it.loss_before)) {
      fail(where + "rejected step changed the loss");
    }
    loss = it.loss_after;
  }
  if (!(trace.final_loss == loss)) fail("final_loss does not match the last iteration");
  if (trace.final_loss > trace.initial_loss) fail("final_loss exceeds initial_loss");

  TaskDescription result = [&] {
    try {
      return edited.current();
    } catch (const EmptyDescription&) {
      throw CorruptTrace("replay deletes every word");
    }
  }();
  if (!(result == trace.final_description)) fail("replayed description differs from final");
  return result;
}

namespace {

nlohmann::json ratio_json(const Ratio& r) { return {{"num", r.num}, {"den", r.den}}; }

Ratio ratio_from(const nlohmann::json& j) {
  return {j.at("num").get<std::uint64_t>(), j.at("den").get<std::uint64_t>()};
}

nlohmann::json candidate_json(const Candidate& c) {
  nlohmann::json j = {{"kind", c.is_delete() ? "delete" : "word"}};
  if (!c.is_delete()) j["word"] = c.surface;
  if (c.probability) j["probability"] = *c.probability;
  return j;
}

Candidate candidate_from(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  std::optional<double> p;
  if (j.contains("probability")) p = j.at("probability").get<double>();
  if (kind == "delete") return Candidate::deletion();
  if (kind != "word") throw CorruptTrace("unknown candidate kind '" + kind + "'");
  return Candidate::word(j.at("word").get<std::string>(), p);
}

}  // namespace

nlohmann::json trace_to_json(const OptimizationTrace& trace) {
  using nlohmann::json;
  json influence = json::array();
  for (const auto& s : trace.influence) {
    influence.push_back({{"index", s.word_index},
                         {"word", trace.initial_description.word(s.word_index)},
                         {"base_loss", ratio_json(s.base_loss)},
                         {"deleted_loss", ratio_json(s.deleted_loss)},
                         {"influence", ratio_json(s.influence)}});
  }
  json iterations = json::array();
  for (const auto& it : trace.iterations) {
    json tried = json::array();
    for (const auto& cl : it.tried) {
      tried.push_back({{"candidate", candidate_json(cl.candidate)}, {"loss", ratio_json(cl.loss)}});
    }
    iterations.push_back({
        {"step", it.step},
        {"position", it.position},
        {"current_index", it.current_index},
        {"original_word", it.original_word},
        {"skipped", it.skipped},
        {"candidates_tried", it.tried.size()},
        {"tried", tried},
        {"best_candidate", it.best_candidate ? candidate_json(*it.best_candidate) : json()},
        {"loss_before", ratio_json(it.loss_before)},
        {"loss_after", ratio_json(it.loss_after)},
        {"accepted", it.accepted},
    });
  }
  return {
      {"format", "lexprompt-trace/1"},
      {"status", trace.aborted ? "aborted" : "complete"},
      {"error", trace.aborted ? json(*trace.aborted) : json()},
      {"params",
       {{"reference_size", trace.params.reference_size},
        {"candidate_k", trace.params.candidate_k},
        {"target_fraction", trace.params.target_fraction},
        {"seed", trace.params.seed},
        {"order", to_string(trace.params.order)},
        {"rng", SeededRng::kAlgorithm}}},
      {"reference",
       {{"pool", trace.reference.pool_name},
        {"seed", trace.reference.seed},
        {"ids", trace.reference.ids}}},
      {"initial_description", trace.initial_description.render()},
      {"initial_loss", ratio_json(trace.initial_loss)},
      {"influence", influence},
      {"targets", trace.targets},
      {"iterations", iterations},
      {"final_description", trace.final_description.render()},
      {"final_loss", ratio_json(trace.final_loss)},
  };
}

OptimizationTrace trace_from_json(const nlohmann::json& j) {
  try {
    const auto& p = j.at("params");
    OptimizationTrace trace{
        .initial_description = TaskDescription::parse(j.at("initial_description").get<std::string>()),
        .params =
            {
                .reference_size = p.at("reference_size").get<std::size_t>(),
                .candidate_k = p.at("candidate_k").get<std::size_t>(),
                .target_fraction = p.at("target_fraction").get<double>(),
                .seed = p.at("seed").get<std::uint64_t>(),
                .order = parse_order_mode(p.at("order").get<std::string>()),
            },
        .reference =
            {
                j.at("reference").at("pool").get<std::string>(),
                j.at("reference").at("seed").get<std::uint64_t>(),
                j.at("reference").at("ids").get<std::vector<std::string>>(),
            },
        .targets = j.at("targets").get<std::vector<std::size_t>>(),
        .final_description = TaskDescription::parse(j.at("final_description").get<std::string>()),
        .initial_loss = ratio_from(j.at("initial_loss")),
        .final_loss = ratio_from(j.at("final_loss")),
    };
    if (j.contains("error") && !j.at("error").is_null()) {
      trace.aborted = j.at("error").get<std::string>();
    }
    for (const auto& s : j.at("influence")) {
      trace.influence.push_back({s.at("index").get<std::size_t>(), ratio_from(s.at("base_loss")),
                                 ratio_from(s.at("deleted_loss")), ratio_from(s.at("influence"))});
    }
    for (const auto& r : j.at("iterations")) {
      IterationRecord it{
          .step = r.at("step").get<std::size_t>(),
          .position = r.at("position").get<std::size_t>(),
          .current_index = r.at("current_index").get<std::size_t>(),
          .original_word = r.at("original_word").get<std::string>(),
          .skipped = r.at("skipped").get<bool>(),
          .loss_before = ratio_from(r.at("loss_before")),
          .loss_after = ratio_from(r.at("loss_after")),
          .accepted = r.at("accepted").get<bool>(),
      };
      for (const auto& cl : r.at("tried")) {
        it.tried.push_back({candidate_from(cl.at("candidate")), ratio_from(cl.at("loss"))});
      }
      if (!r.at("best_candidate").is_null()) it.best_candidate = candidate_from(r.at("best_candidate"));
      trace.iterations.push_back(std::move(it));
    }
    return trace;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptTrace(std::string("malformed trace: ") + e.what());
  } catch (const EmptyDescription&) {
    throw CorruptTrace("malformed trace: empty description");
  }
}

void write_trace_file(const std::filesystem::path& path, const OptimizationTrace& trace) {
  write_text_file(path, trace_to_json(trace).dump(2) + "\n");
}

OptimizationTrace read_trace_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptTrace(path.string() + ": " + e.what());
  }
  return trace_from_json(j);
}

}  // namespace lexprompt
