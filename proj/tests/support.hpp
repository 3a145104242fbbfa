#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lexprompt/mocks.hpp"
#include "lexprompt/prompt.hpp"
#include "lexprompt/task_data.hpp"

namespace testsupport {

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(LEXPROMPT_FIXTURES) / rel;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lexprompt_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline lexprompt::PromptTemplate yes_no_template(const std::string& description) {
  return {
      .name = "yes_no",
      .description = lexprompt::TaskDescription::parse(description),
      .verbalizer_text = "Reply with 'Yes' or 'No'.",
      .layout = "Question: {sentence}",
  };
}

inline lexprompt::Verbalizer yes_no() { return lexprompt::Verbalizer({"Yes", "No"}); }

// n tasks with distinct questions and alternating gold labels.
inline std::vector<lexprompt::TaskInstance> yes_no_tasks(std::size_t n) {
  std::vector<lexprompt::TaskInstance> tasks;
  for (std::size_t i = 0; i < n; ++i) {
    tasks.push_back({"q" + std::to_string(i), {{"sentence", "Sentence number " + std::to_string(i) + "."}},
                     i % 2 == 0 ? "Yes" : "No"});
  }
  return tasks;
}

inline lexprompt::TaskPool yes_no_pool(std::size_t n, const std::string& name = "proxy") {
  return lexprompt::TaskPool(name, yes_no_tasks(n), yes_no());
}

}  // namespace testsupport
