#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "lexprompt/error.hpp"
#include "lexprompt/rng.hpp"
#include "lexprompt/task_data.hpp"
#include "lexprompt/text.hpp"
#include "support.hpp"

using namespace lexprompt;
using testsupport::TempDir;

TEST(TaskPool, Validation) {
  auto tasks = testsupport::yes_no_tasks(3);
  EXPECT_NO_THROW(TaskPool("p", tasks, testsupport::yes_no()));
  EXPECT_THROW(TaskPool("p", {}, testsupport::yes_no()), InvalidArgument);

  auto dup = tasks;
  dup[2].id = dup[0].id;
  EXPECT_THROW(TaskPool("p", dup, testsupport::yes_no()), InvalidArgument);

  auto bad = tasks;
  bad[1].gold = "Maybe";
  EXPECT_THROW(TaskPool("p", bad, testsupport::yes_no()), LabelMismatch);
}

TEST(LoadPool, JsonlWithHeader) {
  const auto pool = load_pool(testsupport::fixture("harness/tasks.jsonl"), PoolFormat::jsonl);
  EXPECT_EQ(pool.name(), "mmlu_fixture");
  EXPECT_EQ(pool.size(), 20u);
  EXPECT_EQ(pool.verbalizer().labels(), (std::vector<std::string>{"A", "B", "C", "D"}));
  EXPECT_EQ(pool.instances()[1].slots.at("option_B"), "Paris");
}

TEST(LoadPool, HeaderMustAgreeWithConfig) {
  EXPECT_THROW(load_pool(testsupport::fixture("harness/tasks.jsonl"), PoolFormat::jsonl,
                         Verbalizer({"Yes", "No"})),
               ConfigError);
  EXPECT_NO_THROW(load_pool(testsupport::fixture("harness/tasks.jsonl"), PoolFormat::jsonl,
                            Verbalizer({"A", "B", "C", "D"})));
}

TEST(LoadPool, Tsv) {
  TempDir dir;
  write_text_file(dir / "p.tsv", "sentence\tgold\nHe walk.\tNo\nShe walks.\tYes\n");
  const auto pool = load_pool(dir / "p.tsv", PoolFormat::tsv, testsupport::yes_no(), "tsv");
  ASSERT_EQ(pool.size(), 2u);
  EXPECT_EQ(pool.instances()[0].id, "row1");
  EXPECT_EQ(pool.instances()[1].slots.at("sentence"), "She walks.");
  EXPECT_EQ(pool.instances()[1].gold, "Yes");
}

TEST(LoadPool, TsvIdColumn) {
  TempDir dir;
  write_text_file(dir / "p.tsv", "id\tsentence\tgold\nx1\ta\tNo\nx2\tb\tYes\n");
  const auto pool = load_pool(dir / "p.tsv", PoolFormat::tsv, testsupport::yes_no());
  EXPECT_EQ(pool.instances()[1].id, "x2");
}

TEST(LoadPool, ParseErrorCarriesLine) {
  TempDir dir;
  write_text_file(dir / "p.jsonl",
                  "{\"id\":\"a\",\"slots\":{\"s\":\"x\"},\"gold\":\"Yes\"}\n{not json\n");
  try {
    load_pool(dir / "p.jsonl", PoolFormat::jsonl, testsupport::yes_no());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadPool, NeedsLabels) {
  TempDir dir;
  write_text_file(dir / "p.jsonl", "{\"id\":\"a\",\"slots\":{\"s\":\"x\"},\"gold\":\"Yes\"}\n");
  EXPECT_THROW(load_pool(dir / "p.jsonl", PoolFormat::jsonl), ConfigError);
}

TEST(LoadPool, FormatNames) {
  EXPECT_EQ(parse_pool_format("tsv"), PoolFormat::tsv);
  EXPECT_EQ(parse_pool_format("jsonl"), PoolFormat::jsonl);
  EXPECT_THROW(parse_pool_format("csv"), ConfigError);
}

TEST(SampleReference, ReproducibleSubset) {
  const auto pool = testsupport::yes_no_pool(50);
  const auto a = sample_reference(pool, 10, 7);
  const auto b = sample_reference(pool, 10, 7);
  ASSERT_EQ(a.instances.size(), 10u);
  EXPECT_EQ(a.instances, b.instances);
  EXPECT_EQ(a.pool_name, "proxy");
  EXPECT_EQ(a.seed, 7u);

  std::set<std::string> ids;
  for (const auto& t : a.instances) ids.insert(t.id);
  EXPECT_EQ(ids.size(), 10u);
  EXPECT_NE(sample_reference(pool, 10, 8).instances, a.instances);
}

TEST(SampleReference, MatchesPartialShuffle) {
  const auto pool = testsupport::yes_no_pool(20);
  std::vector<std::size_t> idx(20);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  SeededRng rng(3);
  rng.partial_shuffle(std::span(idx), 5);
  const auto batch = sample_reference(pool, 5, 3);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(batch.instances[i].id, pool.instances()[idx[i]].id);
}

TEST(SampleReference, Bounds) {
  const auto pool = testsupport::yes_no_pool(5);
  EXPECT_THROW(sample_reference(pool, 6, 0), BatchTooLarge);
  EXPECT_THROW(sample_reference(pool, 0, 0), InvalidArgument);
  EXPECT_EQ(sample_reference(pool, 5, 0).instances.size(), 5u);
}

TEST(SeededRng, PinnedStream) {
  // std::mt19937_64 with the default seed is pinned by the standard: the
  // 10000th draw is 9981545732273789042.
  SeededRng rng(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng.next();
  EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(SeededRng, BelowStaysInRange) {
  SeededRng rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
}
