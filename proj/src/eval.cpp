#include "lexprompt/eval.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

#include "lexprompt/error.hpp"
#include "lexprompt/text.hpp"

namespace lexprompt {

namespace {

std::optional<std::string> match_first_token(std::string_view raw, const Verbalizer& v) {
  const auto body = trim(raw);
  std::size_t end = 0;
  while (end < body.size() && !is_space(body[end])) ++end;
  const auto token = strip_punct(body.substr(0, end));
  if (token.empty()) return std::nullopt;
  if (const auto* label = v.find(token)) return *label;
  return std::nullopt;
}

std::optional<std::string> match_contains_unique(std::string_view raw, const Verbalizer& v) {
  const std::string* found = nullptr;
  std::size_t hits = 0;
  for (const auto& tok : split_whitespace(raw)) {
    if (const auto* label = v.find(strip_punct(tok))) {
      found = label;
      ++hits;
    }
  }
  if (hits == 1) return *found;
  return std::nullopt;
}

std::optional<std::string> match_label_tag(std::string_view raw, const Verbalizer& v) {
  constexpr std::string_view kOpen = "<label>";
  constexpr std::string_view kClose = "</label>";
  const auto open = raw.rfind(kOpen);
  if (open == std::string_view::npos) return std::nullopt;
  const auto start = open + kOpen.size();
  const auto close = raw.find(kClose, start);
  if (close == std::string_view::npos) return std::nullopt;
  const auto inner = strip_punct(raw.substr(start, close - start));
  if (const auto* label = v.find(inner)) return *label;
  return std::nullopt;
}

}  // namespace

std::optional<std::string> match_response(std::string_view raw, const Verbalizer& v) {
  switch (v.policy()) {
    case MatchPolicy::first_token:
      return match_first_token(raw, v);
    case MatchPolicy::contains_unique:
      return match_contains_unique(raw, v);
    case MatchPolicy::label_tag:
      return match_label_tag(raw, v);
  }
  return std::nullopt;
}

BatchResult Evaluator::evaluate_batch(const PromptTemplate& t, std::span<const TaskInstance> batch,
                                      const Verbalizer& verbalizer) {
  if (batch.empty()) throw EmptyBatch();
  ++evaluations_;

  const auto oracle_id = oracle_.identity();
  const auto decoding = oracle_.decoding();

  struct Pending {
    std::string prompt;
    std::string key;
    std::optional<std::string> response;
  };
  std::vector<Pending> pending(batch.size());
  std::vector<std::size_t> misses;
  BatchResult result;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto& p = pending[i];
    p.prompt = render_prompt(t, batch[i]);
    p.key = cache_key(p.prompt, oracle_id, decoding);
    p.response = cache_.lookup(p.key);
    if (p.response) {
      ++result.cache_hits;
    } else {
      misses.push_back(i);
    }
  }

  if (!misses.empty()) {
    ++oracle_evaluations_;
    std::vector<std::exception_ptr> errors(batch.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto worker = [&] {
      for (;;) {
        const auto slot = next.fetch_add(1);
        if (slot >= misses.size() || failed.load()) return;
        const auto i = misses[slot];
        try {
          auto response = oracle_.complete(pending[i].prompt);
          ++oracle_calls_;
          cache_.store(pending[i].key, response, oracle_id, decoding);
          pending[i].response = std::move(response);
        } catch (const OracleFailure& e) {
          errors[i] = std::make_exception_ptr(OracleFailure(batch[i].id, e.cause()));
          failed = true;
        } catch (const std::exception& e) {
          errors[i] = std::make_exception_ptr(OracleFailure(batch[i].id, e.what()));
          failed = true;
        }
      }
    };
    const auto threads = std::min(std::max<std::size_t>(oracle_.parallelism(), 1), misses.size());
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(threads);
      for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    result.oracle_calls = misses.size();
  }

  result.records.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    EvaluationRecord rec{sha256_hex(pending[i].prompt), batch[i].id, *pending[i].response,
                         match_response(*pending[i].response, verbalizer), false};
    rec.correct = rec.matched_label && casefold(*rec.matched_label) == casefold(batch[i].gold);
    if (rec.correct) ++result.correct_count;
    result.records.push_back(std::move(rec));
  }
  return result;
}

ProxyObjective::ProxyObjective(Evaluator& evaluator, PromptTemplate base,
                               std::vector<TaskInstance> batch, Verbalizer verbalizer)
    : evaluator_(evaluator),
      base_(std::move(base)),
      batch_(std::move(batch)),
      verbalizer_(std::move(verbalizer)) {
  if (batch_.empty()) throw EmptyBatch();
}

BatchResult ProxyObjective::evaluate(const TaskDescription& d) {
  return evaluator_.evaluate_batch(base_.with_description(d), batch_, verbalizer_);
}

Ratio ProxyObjective::loss(const TaskDescription& d) { return evaluate(d).loss(); }

}  // namespace lexprompt
