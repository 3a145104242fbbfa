#include <gtest/gtest.h>

#include <sstream>

#include "lexprompt/app.hpp"
#include "lexprompt/text.hpp"
#include "support.hpp"

using namespace lexprompt;
using testsupport::fixture;
using testsupport::TempDir;

namespace {

app::RunConfig config_in(const std::string& rel, const TempDir& dir) {
  auto cfg = app::load_run_config(fixture(rel));
  app::Overrides ov;
  ov.run_dir = dir.path();
  app::apply_overrides(cfg, ov);
  return cfg;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(Config, DefaultParams) {
  const auto cfg = app::run_config_from_json(
      nlohmann::json::parse(R"({"template":"t.json","oracle":{},"provider":{}})"), "/base");
  EXPECT_EQ(cfg.params.reference_size, 100u);
  EXPECT_EQ(cfg.params.candidate_k, 30u);
  EXPECT_DOUBLE_EQ(cfg.params.target_fraction, 0.7);
  EXPECT_EQ(cfg.params.seed, 0u);
  EXPECT_EQ(cfg.params.order, OrderMode::influence);
  EXPECT_EQ(cfg.neighborhood_k, 10u);
  EXPECT_EQ(cfg.template_path, std::filesystem::path("/base/t.json"));
  EXPECT_EQ(cfg.run_dir, std::filesystem::path("/base/run"));
  EXPECT_EQ(cfg.cache_path, std::filesystem::path("/base/run/cache.jsonl"));
}

TEST(Config, OverridesWin) {
  TempDir dir;
  auto cfg = app::load_run_config(fixture("cola/planted.json"));
  EXPECT_EQ(cfg.params.candidate_k, 3u);
  app::Overrides ov;
  ov.run_dir = dir.path();
  ov.candidate_k = 5;
  ov.order = OrderMode::random;
  ov.seed = 9;
  app::apply_overrides(cfg, ov);
  EXPECT_EQ(cfg.params.candidate_k, 5u);
  EXPECT_EQ(cfg.params.order, OrderMode::random);
  EXPECT_EQ(cfg.params.seed, 9u);
  EXPECT_EQ(cfg.cache_path, dir / "cache.jsonl");

  ov = {};
  ov.target_fraction = 0.0;
  EXPECT_THROW(app::apply_overrides(cfg, ov), ConfigError);
}

TEST(Config, Errors) {
  EXPECT_THROW(app::load_run_config("/nonexistent/config.json"), ConfigError);
  EXPECT_THROW(app::run_config_from_json(nlohmann::json::object(), "/"), ConfigError);
  EXPECT_THROW(app::run_config_from_json(
                   nlohmann::json::parse(R"({"template":"t","params":{"candidate_k":0}})"), "/"),
               ConfigError);
}

TEST(CmdOptimize, PlantedRunWritesArtifacts) {
  TempDir dir;
  const auto cfg = config_in("cola/planted.json", dir);
  std::ostringstream out, err;
  ASSERT_EQ(app::cmd_optimize(cfg, 1, out, err), 0) << err.str();

  const auto trace = read_trace_file(dir / "trace_seed0.json");
  EXPECT_EQ(trace.final_loss, (Ratio{3, 10}));
  EXPECT_LE(trace.final_loss, trace.initial_loss);
  const auto tmpl = read_template_file(dir / "template_seed0.json");
  EXPECT_EQ(tmpl.description.render(), "Does this repeat make sense?");
  const auto summary = read_text_file(dir / "summary.txt");
  EXPECT_NE(summary.find("accepted:            1 of 4 iterations"), std::string::npos) << summary;
  EXPECT_NE(out.str().find("oracle calls:"), std::string::npos);
}

TEST(CmdOptimize, ThreeSeeds) {
  TempDir dir;
  const auto cfg = config_in("cola/planted.json", dir);
  std::ostringstream out, err;
  ASSERT_EQ(app::cmd_optimize(cfg, 3, out, err), 0) << err.str();
  for (int s = 0; s < 3; ++s) {
    EXPECT_TRUE(std::filesystem::exists(dir / ("trace_seed" + std::to_string(s) + ".json")));
  }
  const auto summary = read_text_file(dir / "summary.txt");
  EXPECT_NE(summary.find("aggregate over 3 seed(s)"), std::string::npos);
  EXPECT_NE(summary.find("final proxy loss: 0.3000 +/- 0.0000"), std::string::npos) << summary;
}

TEST(CmdOptimize, RandomOrder) {
  TempDir dir;
  auto cfg = config_in("cola/planted.json", dir);
  cfg.params.order = OrderMode::random;
  std::ostringstream out, err;
  ASSERT_EQ(app::cmd_optimize(cfg, 1, out, err), 0) << err.str();
  const auto trace = read_trace_file(dir / "trace_seed0.json");
  EXPECT_EQ(trace.params.order, OrderMode::random);
  EXPECT_LE(trace.final_loss, trace.initial_loss);
}

TEST(CmdOptimize, ProxyAndEvalMustDiffer) {
  TempDir dir;
  auto cfg = config_in("cola/eval.json", dir);
  cfg.eval_pool = cfg.proxy_pool;
  std::ostringstream out, err;
  EXPECT_EQ(app::cmd_optimize(cfg, 1, out, err), 1);
  EXPECT_NE(err.str().find("different"), std::string::npos);
}

TEST(CmdReport, ShowsAcceptedSubstitution) {
  TempDir dir;
  const auto cfg = config_in("cola/planted.json", dir);
  std::ostringstream out, err;
  ASSERT_EQ(app::cmd_optimize(cfg, 1, out, err), 0) << err.str();
  std::ostringstream rep;
  ASSERT_EQ(app::cmd_report(dir / "trace_seed0.json", dir / "report.txt", rep, err), 0);
  EXPECT_NE(rep.str().find("accepted:            1 of 4"), std::string::npos) << rep.str();
  EXPECT_NE(rep.str().find("sentence       -> repeat"), std::string::npos) << rep.str();
  EXPECT_EQ(read_text_file(dir / "report.txt"), rep.str());
}

TEST(CmdReport, BadInputs) {
  TempDir dir;
  std::ostringstream out, err;
  EXPECT_NE(app::cmd_report(dir / "missing.json", std::nullopt, out, err), 0);
  write_text_file(dir / "bad.json", "{\"format\":1}");
  EXPECT_EQ(app::cmd_report(dir / "bad.json", std::nullopt, out, err), 2);
}

TEST(CmdEvaluate, ReplayFixtureAndWarmCache) {
  TempDir dir;
  const auto cfg = config_in("harness/config.json", dir);
  std::ostringstream out1, out2, err;
  ASSERT_EQ(app::cmd_evaluate(cfg, "eval", out1, err), 0) << err.str();
  EXPECT_NE(out1.str().find("accuracy 0.6000 (12/20)"), std::string::npos) << out1.str();
  EXPECT_NE(out1.str().find("oracle calls: 20, cache hits: 0"), std::string::npos);
  const auto report1 = read_text_file(dir / "evaluate_mmlu_fixture.json");

  ASSERT_EQ(app::cmd_evaluate(cfg, "eval", out2, err), 0) << err.str();
  EXPECT_NE(out2.str().find("oracle calls: 0, cache hits: 20"), std::string::npos) << out2.str();
  EXPECT_EQ(read_text_file(dir / "evaluate_mmlu_fixture.json"), report1);
}

TEST(CmdEvaluate, MissingTemplate) {
  TempDir dir;
  auto cfg = config_in("harness/config.json", dir);
  cfg.template_path = dir / "nope.json";
  std::ostringstream out, err;
  EXPECT_NE(app::cmd_evaluate(cfg, "eval", out, err), 0);
  EXPECT_NE(err.str().find("nope.json"), std::string::npos);
}

TEST(CmdNeighborhood, AtMostKPerWord) {
  TempDir dir;
  const auto cfg = config_in("cola/eval.json", dir);
  std::ostringstream out, err;
  ASSERT_EQ(app::cmd_neighborhood(cfg, "eval", out, err), 0) << err.str();
  const auto csv = read_text_file(dir / "neighborhood.csv");
  EXPECT_EQ(csv.rfind("variant_text,changed_position,candidate,accuracy\n", 0), 0u);
  EXPECT_LE(count_lines(csv) - 1, 50u);
  EXPECT_EQ(count_lines(csv) - 1, 14u);  // "make" at position 3 is the word itself
  EXPECT_NE(csv.find("Does this sentence make meaning?,4,meaning?,0.500000\n"), std::string::npos)
      << csv;
}

TEST(CmdInfluence, SingleWordDescription) {
  TempDir dir;
  auto tmpl = read_template_file(fixture("cola/template.json"));
  tmpl.description = TaskDescription::parse("Sensible?");
  write_template_file(dir / "one.json", tmpl);
  auto cfg = config_in("cola/planted.json", dir);
  cfg.template_path = dir / "one.json";
  std::ostringstream out, err;
  ASSERT_EQ(app::cmd_influence(cfg, out, err), 0) << err.str();
  EXPECT_EQ(read_text_file(dir / "influence.tsv"), "word\tindex\tinfluence\nSensible?\t0\t0.0000\n");
}

TEST(CmdInfluence, RankedTable) {
  TempDir dir;
  auto cfg = config_in("cola/planted.json", dir);
  cfg.oracle["rules"] = nlohmann::json::parse(R"([{"contains":"sentence","delta":-0.3}])");
  std::ostringstream out, err;
  ASSERT_EQ(app::cmd_influence(cfg, out, err), 0) << err.str();
  const auto tsv = read_text_file(dir / "influence.tsv");
  EXPECT_EQ(tsv.rfind("word\tindex\tinfluence\nsentence\t2\t0.3000\nDoes\t0\t0.0000\n", 0), 0u)
      << tsv;
}
