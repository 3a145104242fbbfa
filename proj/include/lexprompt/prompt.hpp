#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lexprompt {

using SlotMap = std::map<std::string, std::string, std::less<>>;

struct WordToken {
  std::string surface;
  std::size_t index = 0;

  friend bool operator==(const WordToken&, const WordToken&) = default;
};

// Ordered, whitespace-delimited words of a task description. Punctuation
// stays attached to its word ("sense?" is one word). Never empty.
class TaskDescription {
 public:
  explicit TaskDescription(std::vector<std::string> words);

  static TaskDescription parse(std::string_view text);

  std::size_t size() const noexcept { return words_.size(); }
  const std::string& word(std::size_t i) const;
  WordToken token(std::size_t i) const { return {word(i), i}; }
  std::vector<WordToken> tokens() const;
  const std::vector<std::string>& words() const noexcept { return words_; }

  std::string render() const;
  // The description with word i rendered as `marker`.
  std::string masked(std::size_t i, std::string_view marker) const;

  TaskDescription with_word(std::size_t i, std::string surface) const;
  // Throws EmptyDescription when removing the only word.
  TaskDescription without_word(std::size_t i) const;

  friend bool operator==(const TaskDescription&, const TaskDescription&) = default;

 private:
  std::vector<std::string> words_;
};

TaskDescription parse_description(std::string_view text);
std::string render_description(const TaskDescription& d);

// True when the word carries a {name} placeholder that rendering fills.
bool has_placeholder(std::string_view word);

enum class MatchPolicy { first_token, contains_unique, label_tag };

std::string_view to_string(MatchPolicy p) noexcept;
MatchPolicy parse_match_policy(std::string_view s);

class Verbalizer {
 public:
  Verbalizer(std::vector<std::string> labels, MatchPolicy policy = MatchPolicy::first_token);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  MatchPolicy policy() const noexcept { return policy_; }
  // Label equal to `text` under case folding, or nullptr.
  const std::string* find(std::string_view text) const;

  friend bool operator==(const Verbalizer&, const Verbalizer&) = default;

 private:
  std::vector<std::string> labels_;
  MatchPolicy policy_;
};

struct DemoExample {
  std::string input_text;
  std::string answer_text;

  friend bool operator==(const DemoExample&, const DemoExample&) = default;
};

// A prompt P(X) = (description, demos, question, verbalizer). Rendering
// lays out
//
//   header_layout  ("{description} {verbalizer}" by default)
//   "\n\n"
//   per demo: input_text "\n" answer_cue " " answer_text "\n\n"
//   layout (question block, filled from the task's slots)
//   "\n" answer_cue
//
// Static text such as emotion suffixes or a CoT trigger belongs in
// header_layout, so it is never part of the optimized description.
struct PromptTemplate {
  static constexpr std::string_view kDefaultHeader = "{description} {verbalizer}";

  std::string name;
  TaskDescription description;
  std::string verbalizer_text;
  std::string header_layout{kDefaultHeader};
  std::string layout;
  std::string answer_cue{"Answer:"};
  std::vector<DemoExample> demos;
  SlotMap statics;

  PromptTemplate with_description(TaskDescription d) const;

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

// Single-pass {name} substitution. Braces that do not enclose an
// identifier are copied verbatim; substituted values are never rescanned.
// Throws MissingPlaceholder for an unknown or empty slot.
std::string fill_placeholders(std::string_view text, const SlotMap& primary,
                              const SlotMap& fallback = {});

std::string render_prompt(const PromptTemplate& t, const SlotMap& slots);

PromptTemplate template_from_json(const nlohmann::json& j);
nlohmann::json template_to_json(const PromptTemplate& t);
PromptTemplate read_template_file(const std::filesystem::path& path);
void write_template_file(const std::filesystem::path& path, const PromptTemplate& t);

}  // namespace lexprompt
