#include "lexprompt/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "lexprompt/error.hpp"
#include "lexprompt/text.hpp"

namespace lexprompt {

TaskDescription::TaskDescription(std::vector<std::string> words) : words_(std::move(words)) {
  if (words_.empty()) throw EmptyDescription();
  for (const auto& w : words_) {
    if (w.empty() || std::any_of(w.begin(), w.end(), [](char c) { return is_space(c); })) {
      throw InvalidArgument("description word '" + w + "' is empty or contains whitespace");
    }
  }
}

TaskDescription TaskDescription::parse(std::string_view text) {
  auto words = split_whitespace(text);
  if (words.empty()) throw EmptyDescription();
  return TaskDescription(std::move(words));
}

const std::string& TaskDescription::word(std::size_t i) const {
  if (i >= words_.size()) throw PositionOutOfRange(i, words_.size());
  return words_[i];
}

std::vector<WordToken> TaskDescription::tokens() const {
  std::vector<WordToken> out;
  out.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) out.push_back({words_[i], i});
  return out;
}

std::string TaskDescription::render() const {
  std::string out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (i) out += ' ';
    out += words_[i];
  }
  return out;
}

std::string TaskDescription::masked(std::size_t i, std::string_view marker) const {
  if (i >= words_.size()) throw PositionOutOfRange(i, words_.size());
  std::string out;
  for (std::size_t j = 0; j < words_.size(); ++j) {
    if (j) out += ' ';
    if (j == i) {
      out += marker;
    } else {
      out += words_[j];
    }
  }
  return out;
}

TaskDescription TaskDescription::with_word(std::size_t i, std::string surface) const {
  if (i >= words_.size()) throw PositionOutOfRange(i, words_.size());
  auto words = words_;
  words[i] = std::move(surface);
  return TaskDescription(std::move(words));
}

TaskDescription TaskDescription::without_word(std::size_t i) const {
  if (i >= words_.size()) throw PositionOutOfRange(i, words_.size());
  auto words = words_;
  words.erase(words.begin() + static_cast<std::ptrdiff_t>(i));
  return TaskDescription(std::move(words));
}

TaskDescription parse_description(std::string_view text) { return TaskDescription::parse(text); }

std::string render_description(const TaskDescription& d) { return d.render(); }

namespace {

bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Length of the placeholder name starting after the '{' at `open`, or 0 if
// the brace does not open a placeholder.
std::size_t placeholder_len(std::string_view text, std::size_t open) {
  std::size_t j = open + 1;
  while (j < text.size() && is_ident_char(text[j])) ++j;
  if (j == open + 1 || j >= text.size() || text[j] != '}') return 0;
  return j - open - 1;
}

}  // namespace

bool has_placeholder(std::string_view word) {
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (word[i] == '{' && placeholder_len(word, i) > 0) return true;
  }
  return false;
}

std::string fill_placeholders(std::string_view text, const SlotMap& primary,
                              const SlotMap& fallback) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      out += text[i++];
      continue;
    }
    const std::size_t len = placeholder_len(text, i);
    if (len == 0) {
      out += text[i++];
      continue;
    }
    const auto name = text.substr(i + 1, len);
    const std::string* value = nullptr;
    if (auto it = primary.find(name); it != primary.end()) {
      value = &it->second;
    } else if (auto jt = fallback.find(name); jt != fallback.end()) {
      value = &jt->second;
    }
    if (value == nullptr || trim(*value).empty()) throw MissingPlaceholder(std::string(name));
    out += *value;
    i += len + 2;
  }
  return out;
}

std::string_view to_string(MatchPolicy p) noexcept {
  switch (p) {
    case MatchPolicy::first_token:
      return "first_token";
    case MatchPolicy::contains_unique:
      return "contains_unique";
    case MatchPolicy::label_tag:
      return "label_tag";
  }
  return "first_token";
}

MatchPolicy parse_match_policy(std::string_view s) {
  if (s == "first_token") return MatchPolicy::first_token;
  if (s == "contains_unique") return MatchPolicy::contains_unique;
  if (s == "label_tag") return MatchPolicy::label_tag;
  throw ConfigError("unknown match policy '" + std::string(s) + "'");
}

Verbalizer::Verbalizer(std::vector<std::string> labels, MatchPolicy policy)
    : labels_(std::move(labels)), policy_(policy) {
  if (labels_.size() < 2) throw InvalidArgument("a verbalizer needs at least two labels");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (trim(labels_[i]).empty()) throw InvalidArgument("verbalizer label is empty");
    for (std::size_t j = 0; j < i; ++j) {
      if (casefold(labels_[i]) == casefold(labels_[j])) {
        throw InvalidArgument("verbalizer labels '" + labels_[j] + "' and '" + labels_[i] +
                              "' collide after case folding");
      }
    }
  }
}

const std::string* Verbalizer::find(std::string_view text) const {
  const auto folded = casefold(text);
  for (const auto& label : labels_) {
    if (casefold(label) == folded) return &label;
  }
  return nullptr;
}

PromptTemplate PromptTemplate::with_description(TaskDescription d) const {
  PromptTemplate out = *this;
  out.description = std::move(d);
  return out;
}

std::string render_prompt(const PromptTemplate& t, const SlotMap& slots) {
  SlotMap context = t.statics;
  for (const auto& [k, v] : slots) context.insert_or_assign(k, v);

  const SlotMap header_slots{
      {"description", fill_placeholders(t.description.render(), context)},
      {"verbalizer", fill_placeholders(t.verbalizer_text, context)},
  };

  std::string out = fill_placeholders(t.header_layout, header_slots, context);
  out += "\n\n";
  for (const auto& demo : t.demos) {
    out += demo.input_text;
    out += '\n';
    out += t.answer_cue;
    out += ' ';
    out += demo.answer_text;
    out += "\n\n";
  }
  out += fill_placeholders(t.layout, context);
  out += '\n';
  out += t.answer_cue;
  return out;
}

namespace {

std::string required_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw ConfigError(std::string("template field '") + key + "' must be a string");
  }
  return j.at(key).get<std::string>();
}

}  // namespace

PromptTemplate template_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("template must be a JSON object");
  PromptTemplate t{
      .name = j.value("name", std::string{}),
      .description = TaskDescription::parse(required_string(j, "description")),
      .verbalizer_text = required_string(j, "verbalizer_text"),
      .header_layout = j.value("header_layout", std::string(PromptTemplate::kDefaultHeader)),
      .layout = required_string(j, "layout"),
      .answer_cue = j.value("answer_cue", std::string("Answer:")),
  };
  if (t.header_layout.find("{description}") == std::string::npos) {
    throw ConfigError("header_layout must reference {description}");
  }
  if (j.contains("demos")) {
    for (const auto& d : j.at("demos")) {
      DemoExample demo{d.value("input", std::string{}), d.value("answer", std::string{})};
      if (trim(demo.input_text).empty() || trim(demo.answer_text).empty()) {
        throw ConfigError("demo examples need a nonempty input and answer");
      }
      t.demos.push_back(std::move(demo));
    }
  }
  if (j.contains("static")) {
    for (const auto& [k, v] : j.at("static").items()) t.statics.emplace(k, v.get<std::string>());
  }
  return t;
}

nlohmann::json template_to_json(const PromptTemplate& t) {
  nlohmann::json demos = nlohmann::json::array();
  for (const auto& d : t.demos) demos.push_back({{"input", d.input_text}, {"answer", d.answer_text}});
  nlohmann::json statics = nlohmann::json::object();
  for (const auto& [k, v] : t.statics) statics[k] = v;
  return {
      {"name", t.name},
      {"description", t.description.render()},
      {"verbalizer_text", t.verbalizer_text},
      {"header_layout", t.header_layout},
      {"layout", t.layout},
      {"answer_cue", t.answer_cue},
      {"demos", demos},
      {"static", statics},
  };
}

PromptTemplate read_template_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("template file " + path.string() + ": " + e.what());
  }
  return template_from_json(j);
}

void write_template_file(const std::filesystem::path& path, const PromptTemplate& t) {
  write_text_file(path, template_to_json(t).dump(2) + "\n");
}

}  // namespace lexprompt
