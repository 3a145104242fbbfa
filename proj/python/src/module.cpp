#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lexprompt/cache.hpp"
#include "lexprompt/error.hpp"
#include "lexprompt/eval.hpp"
#include "lexprompt/influence.hpp"
#include "lexprompt/mocks.hpp"
#include "lexprompt/optimizer.hpp"

namespace py = pybind11;
using namespace lexprompt;

namespace {

class PyCompletionOracle : public CompletionOracle {
 public:
  using CompletionOracle::CompletionOracle;

  std::string complete(const std::string& prompt) override {
    PYBIND11_OVERRIDE_PURE(std::string, CompletionOracle, complete, prompt);
  }
  std::string identity() const override {
    PYBIND11_OVERRIDE_PURE(std::string, CompletionOracle, identity);
  }
};

class PyFillMaskProvider : public FillMaskProvider {
 public:
  using FillMaskProvider::FillMaskProvider;

 protected:
  std::vector<FillCandidate> do_fill_mask(std::string_view masked_text, std::size_t k) override {
    py::gil_scoped_acquire gil;
    py::function fn = py::get_override(static_cast<const FillMaskProvider*>(this), "fill");
    if (!fn) throw ProviderFailure("python provider does not define fill()");
    std::vector<FillCandidate> out;
    for (auto item : fn(std::string(masked_text), k)) {
      auto pair = item.cast<py::tuple>();
      out.push_back({pair[0].cast<std::string>(), pair[1].cast<double>()});
    }
    return out;
  }
};

nlohmann::json to_json(const py::handle& obj) {
  auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return nlohmann::json::parse(text);
}

py::object from_json(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict batch_dict(const BatchResult& r) {
  py::dict d;
  d["correct"] = r.correct_count;
  d["total"] = r.records.size();
  d["accuracy"] = r.accuracy().value();
  d["oracle_calls"] = r.oracle_calls;
  d["cache_hits"] = r.cache_hits;
  py::list records;
  for (const auto& rec : r.records) {
    py::dict x;
    x["task_id"] = rec.task_id;
    x["response"] = rec.raw_response;
    x["matched_label"] = rec.matched_label ? py::cast(*rec.matched_label) : py::none();
    x["correct"] = rec.correct;
    records.append(x);
  }
  d["records"] = records;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lexprompt, m) {
  m.doc() = "Greedy word-substitution prompt optimizer";

  static py::exception<Error> base(m, "LexpromptError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<OracleFailure>(m, "OracleFailure", base.ptr());
  py::register_exception<RunAborted>(m, "RunAborted", base.ptr());
  py::register_exception<MissingPlaceholder>(m, "MissingPlaceholder", base.ptr());
  py::register_exception<BadMaskCount>(m, "BadMaskCount", base.ptr());
  py::register_exception<EmptyDescription>(m, "EmptyDescription", base.ptr());

  py::class_<Ratio>(m, "Ratio")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("num"), py::arg("den"))
      .def_readonly("num", &Ratio::num)
      .def_readonly("den", &Ratio::den)
      .def("__float__", &Ratio::value)
      .def(py::self == py::self)
      .def(py::self < py::self)
      .def("__repr__", [](const Ratio& r) { return "Ratio(" + r.str() + ")"; });

  py::class_<TaskDescription>(m, "TaskDescription")
      .def(py::init(&TaskDescription::parse), py::arg("text"))
      .def_property_readonly("words", &TaskDescription::words)
      .def("render", &TaskDescription::render)
      .def("with_word", &TaskDescription::with_word)
      .def("without_word", &TaskDescription::without_word)
      .def("masked", &TaskDescription::masked, py::arg("index"), py::arg("marker") = kMaskToken)
      .def("__len__", &TaskDescription::size)
      .def("__str__", &TaskDescription::render)
      .def(py::self == py::self);

  py::class_<Verbalizer>(m, "Verbalizer")
      .def(py::init([](std::vector<std::string> labels, const std::string& policy) {
             return Verbalizer(std::move(labels), parse_match_policy(policy));
           }),
           py::arg("labels"), py::arg("policy") = "first_token")
      .def_property_readonly("labels", &Verbalizer::labels)
      .def("match", [](const Verbalizer& v, const std::string& raw) { return match_response(raw, v); });

  py::class_<PromptTemplate>(m, "PromptTemplate")
      .def_static("from_dict", [](const py::dict& d) { return template_from_json(to_json(d)); })
      .def_static("load", &read_template_file)
      .def("to_dict", [](const PromptTemplate& t) { return from_json(template_to_json(t)); })
      .def("save", [](const PromptTemplate& t, const std::filesystem::path& p) {
        write_template_file(p, t);
      })
      .def_property_readonly("description", [](const PromptTemplate& t) { return t.description; })
      .def("with_description", &PromptTemplate::with_description)
      .def("render", [](const PromptTemplate& t, const std::map<std::string, std::string>& slots) {
        return render_prompt(t, SlotMap(slots.begin(), slots.end()));
      });

  py::class_<TaskPool>(m, "TaskPool")
      .def_static(
          "load",
          [](const std::filesystem::path& path, const std::string& format) {
            return load_pool(path, parse_pool_format(format));
          },
          py::arg("path"), py::arg("format") = "jsonl")
      .def_property_readonly("name", &TaskPool::name)
      .def_property_readonly("ids",
                             [](const TaskPool& p) {
                               std::vector<std::string> ids;
                               for (const auto& t : p.instances()) ids.push_back(t.id);
                               return ids;
                             })
      .def_property_readonly("verbalizer", &TaskPool::verbalizer)
      .def("__len__", &TaskPool::size)
      .def("sample_ids", [](const TaskPool& p, std::size_t n, std::uint64_t seed) {
        std::vector<std::string> ids;
        for (const auto& t : sample_reference(p, n, seed).instances) ids.push_back(t.id);
        return ids;
      });

  py::class_<ResponseCache>(m, "ResponseCache")
      .def(py::init<>())
      .def(py::init<const std::filesystem::path&>(), py::arg("path"))
      .def("__len__", &ResponseCache::size);

  py::class_<CompletionOracle, PyCompletionOracle>(m, "CompletionOracle")
      .def(py::init<>())
      .def("complete", &CompletionOracle::complete)
      .def("identity", &CompletionOracle::identity);

  py::class_<TranscriptOracle, CompletionOracle>(m, "TranscriptOracle")
      .def_static("load", &TranscriptOracle::load);

  py::class_<RuleOracle, CompletionOracle>(m, "RuleOracle")
      .def(py::init([](const py::dict& spec, const PromptTemplate& t, const TaskPool& pool) {
             return RuleOracle(RuleSpec::from_json(to_json(spec)), t, pool.instances(),
                               pool.verbalizer());
           }),
           py::arg("spec"), py::arg("template"), py::arg("pool"));

  py::class_<FillMaskProvider, PyFillMaskProvider>(m, "FillMaskProvider")
      .def(py::init<>())
      .def("fill_mask", [](FillMaskProvider& p, const std::string& text, std::size_t k) {
        std::vector<std::pair<std::string, double>> out;
        for (auto& c : p.fill_mask(text, k)) out.emplace_back(std::move(c.word), c.probability);
        return out;
      });

  py::class_<StaticFillMaskProvider, FillMaskProvider>(m, "StaticFillMaskProvider")
      .def(py::init<>())
      .def_static("from_dict", [](const py::dict& d) { return StaticFillMaskProvider::from_json(to_json(d)); })
      .def_static("load", &StaticFillMaskProvider::load)
      .def("set_position",
           [](StaticFillMaskProvider& p, std::size_t pos,
              const std::vector<std::pair<std::string, double>>& words) {
             std::vector<FillCandidate> c;
             for (const auto& [w, prob] : words) c.push_back({w, prob});
             p.set_position(pos, std::move(c));
           });

  py::class_<OptimizationParams>(m, "OptimizationParams")
      .def(py::init([](std::size_t reference_size, std::size_t candidate_k, double target_fraction,
                       std::uint64_t seed, const std::string& order) {
             OptimizationParams p{reference_size, candidate_k, target_fraction, seed,
                                  parse_order_mode(order)};
             p.validate();
             return p;
           }),
           py::arg("reference_size") = 100, py::arg("candidate_k") = 30,
           py::arg("target_fraction") = 0.7, py::arg("seed") = 0, py::arg("order") = "influence")
      .def_readonly("reference_size", &OptimizationParams::reference_size)
      .def_readonly("candidate_k", &OptimizationParams::candidate_k)
      .def_readonly("target_fraction", &OptimizationParams::target_fraction)
      .def_readonly("seed", &OptimizationParams::seed)
      .def_property_readonly("order", [](const OptimizationParams& p) {
        return std::string(to_string(p.order));
      });

  m.def(
      "evaluate",
      [](CompletionOracle& oracle, const PromptTemplate& t, const TaskPool& pool,
         ResponseCache* cache) {
        ResponseCache scratch;
        BatchResult r;
        {
          py::gil_scoped_release release;
          Evaluator ev(oracle, cache ? *cache : scratch);
          r = ev.evaluate_batch(t, pool.instances(), pool.verbalizer());
        }
        return batch_dict(r);
      },
      py::arg("oracle"), py::arg("template"), py::arg("pool"), py::arg("cache") = nullptr);

  m.def(
      "influence",
      [](CompletionOracle& oracle, const PromptTemplate& t, const TaskPool& pool,
         std::size_t reference_size, std::uint64_t seed) {
        std::vector<InfluenceScore> scores;
        {
          py::gil_scoped_release release;
          ResponseCache cache;
          Evaluator ev(oracle, cache);
          auto batch = sample_reference(pool, reference_size, seed);
          ProxyObjective obj(ev, t, std::move(batch.instances), pool.verbalizer());
          scores = compute_influence(obj, t.description);
        }
        std::vector<std::pair<std::string, Ratio>> out;
        for (const auto& s : scores) out.emplace_back(t.description.word(s.word_index), s.influence);
        return out;
      },
      py::arg("oracle"), py::arg("template"), py::arg("pool"), py::arg("reference_size") = 100,
      py::arg("seed") = 0);

  m.def(
      "optimize",
      [](CompletionOracle& oracle, FillMaskProvider& provider, const PromptTemplate& t,
         const TaskPool& proxy_pool, const OptimizationParams& params, ResponseCache* cache) {
        ResponseCache scratch;
        std::optional<OptimizationResult> result;
        {
          py::gil_scoped_release release;
          result = optimize(oracle, provider, t, proxy_pool, params, cache ? *cache : scratch);
        }
        return py::make_tuple(result->optimized, from_json(trace_to_json(result->trace)));
      },
      py::arg("oracle"), py::arg("provider"), py::arg("template"), py::arg("proxy_pool"),
      py::arg("params") = OptimizationParams{}, py::arg("cache") = nullptr);

  m.def(
      "replay_trace",
      [](const py::dict& trace) { return replay(trace_from_json(to_json(trace))); },
      py::arg("trace"));
}
