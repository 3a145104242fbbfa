#include "lexprompt/mocks.hpp"

#include <algorithm>
#include <fstream>

#include "lexprompt/error.hpp"
#include "lexprompt/text.hpp"

namespace lexprompt {

TranscriptOracle::TranscriptOracle(std::unordered_map<std::string, std::string> table,
                                   std::string identity)
    : table_(std::move(table)), identity_(std::move(identity)) {}

TranscriptOracle TranscriptOracle::load(const std::filesystem::path& transcript) {
  const auto data = read_text_file(transcript);
  std::unordered_map<std::string, std::string> table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    ++line_no;
    auto nl = data.find('\n', pos);
    if (nl == std::string::npos) nl = data.size();
    const auto line = trim(std::string_view(data).substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      table.insert_or_assign(j.at("prompt_hash").get<std::string>(),
                             j.at("response").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(transcript.string(), line_no, e.what());
    }
  }
  return TranscriptOracle(std::move(table), "replay:" + sha256_hex(data));
}

std::string TranscriptOracle::complete(const std::string& prompt) {
  const auto hash = sha256_hex(prompt);
  if (auto it = table_.find(hash); it != table_.end()) return it->second;
  throw OracleFailure("transcript has no response for prompt " + hash);
}

bool LossRule::holds(const TaskDescription& d) const {
  switch (kind) {
    case Kind::contains_word:
      return std::find(d.words().begin(), d.words().end(), word) != d.words().end();
    case Kind::word_at:
      return position < d.size() && d.word(position) == word;
  }
  return false;
}

double RuleSpec::loss_for(const TaskDescription& d) const {
  double loss = base_loss;
  for (const auto& r : rules) {
    if (r.holds(d)) loss += r.delta;
  }
  return std::clamp(loss, 0.0, 1.0);
}

RuleSpec RuleSpec::from_json(const nlohmann::json& j) {
  RuleSpec spec;
  spec.base_loss = j.value("base_loss", 0.5);
  if (j.contains("rules")) {
    for (const auto& r : j.at("rules")) {
      LossRule rule;
      rule.delta = r.at("delta").get<double>();
      if (r.contains("contains")) {
        rule.kind = LossRule::Kind::contains_word;
        rule.word = r.at("contains").get<std::string>();
      } else if (r.contains("word_at")) {
        rule.kind = LossRule::Kind::word_at;
        rule.position = r.at("word_at").get<std::size_t>();
        rule.word = r.at("word").get<std::string>();
      } else {
        throw ConfigError("rule needs 'contains' or 'word_at'");
      }
      spec.rules.push_back(std::move(rule));
    }
  }
  return spec;
}

nlohmann::json RuleSpec::to_json() const {
  nlohmann::json rules_json = nlohmann::json::array();
  for (const auto& r : rules) {
    if (r.kind == LossRule::Kind::contains_word) {
      rules_json.push_back({{"contains", r.word}, {"delta", r.delta}});
    } else {
      rules_json.push_back({{"word_at", r.position}, {"word", r.word}, {"delta", r.delta}});
    }
  }
  return {{"base_loss", base_loss}, {"rules", rules_json}};
}

RuleOracle::RuleOracle(RuleSpec spec, const PromptTemplate& t, std::vector<TaskInstance> tasks,
                       Verbalizer verbalizer)
    : spec_(std::move(spec)), tasks_(std::move(tasks)), verbalizer_(std::move(verbalizer)) {
  if (tasks_.empty()) throw InvalidArgument("rule oracle needs at least one task");
  const auto desc_at = t.header_layout.find("{description}");
  if (desc_at == std::string::npos) throw ConfigError("header_layout lacks {description}");
  const SlotMap specials{{"verbalizer", fill_placeholders(t.verbalizer_text, t.statics)}};
  header_prefix_ = fill_placeholders(t.header_layout.substr(0, desc_at), specials, t.statics);
  header_marker_ = fill_placeholders(
                       t.header_layout.substr(desc_at + std::string_view("{description}").size()),
                       specials, t.statics) +
                   "\n\n";

  std::string ids;
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    auto tail = fill_placeholders(t.layout, tasks_[i].slots, t.statics) + "\n" + t.answer_cue;
    tails_by_length_[tail.size()].emplace(std::move(tail), i);
    ids += tasks_[i].id;
    ids += '\n';
  }
  identity_ = "rule:" + sha256_hex(spec_.to_json().dump() + "\n" + ids);
}

TaskDescription RuleOracle::extract_description(const std::string& prompt) const {
  if (prompt.compare(0, header_prefix_.size(), header_prefix_) != 0) {
    throw OracleFailure("prompt does not start with the template header");
  }
  const auto end = prompt.find(header_marker_, header_prefix_.size());
  if (end == std::string::npos) throw OracleFailure("cannot locate description in prompt");
  return TaskDescription::parse(
      std::string_view(prompt).substr(header_prefix_.size(), end - header_prefix_.size()));
}

std::string RuleOracle::complete(const std::string& prompt) {
  const auto d = extract_description(prompt);
  const double loss = spec_.loss_for(d);

  std::optional<std::size_t> index;
  for (const auto& [len, tails] : tails_by_length_) {
    if (len > prompt.size()) break;
    if (auto it = tails.find(prompt.substr(prompt.size() - len)); it != tails.end()) {
      if (!index || it->second < *index) index = it->second;
    }
  }
  if (!index) throw OracleFailure("prompt matches no known task");

  const auto& gold = tasks_[*index].gold;
  const double u = (static_cast<double>(*index) + 0.5) / static_cast<double>(tasks_.size());
  if (u >= loss) return gold;
  for (const auto& label : verbalizer_.labels()) {
    if (casefold(label) != casefold(gold)) return label;
  }
  return {};
}

void StaticFillMaskProvider::set_text(std::string masked_text,
                                      std::vector<FillCandidate> candidates) {
  by_text_.insert_or_assign(std::move(masked_text), std::move(candidates));
}

void StaticFillMaskProvider::set_position(std::size_t position,
                                          std::vector<FillCandidate> candidates) {
  by_position_.insert_or_assign(position, std::move(candidates));
}

namespace {

std::vector<FillCandidate> candidates_from(const nlohmann::json& arr) {
  std::vector<FillCandidate> out;
  for (const auto& c : arr) {
    out.push_back({c.at("word").get<std::string>(), c.at("probability").get<double>()});
  }
  return out;
}

}  // namespace

StaticFillMaskProvider StaticFillMaskProvider::from_json(const nlohmann::json& j) {
  StaticFillMaskProvider p;
  try {
    if (j.contains("by_text")) {
      for (const auto& [text, arr] : j.at("by_text").items()) p.set_text(text, candidates_from(arr));
    }
    if (j.contains("by_position")) {
      for (const auto& [pos, arr] : j.at("by_position").items()) {
        p.set_position(std::stoul(pos), candidates_from(arr));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("static provider table: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("static provider table: bad position key: ") + e.what());
  }
  return p;
}

StaticFillMaskProvider StaticFillMaskProvider::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<FillCandidate> StaticFillMaskProvider::do_fill_mask(std::string_view masked_text,
                                                                std::size_t) {
  if (auto it = by_text_.find(std::string(masked_text)); it != by_text_.end()) return it->second;
  const auto words = split_whitespace(masked_text);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].find(kMaskToken) != std::string::npos) {
      if (auto it = by_position_.find(i); it != by_position_.end()) return it->second;
      break;
    }
  }
  return {};
}

}  // namespace lexprompt
