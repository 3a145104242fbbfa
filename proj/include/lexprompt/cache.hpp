#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "lexprompt/oracle.hpp"

namespace lexprompt {

// Content hash of everything that determines an oracle response.
std::string cache_key(std::string_view prompt, std::string_view oracle_id,
                      const DecodingParams& decoding);

// Response store keyed by cache_key. With a backing file, records are
// appended one JSON object per line:
//   {"key", "raw_response", "oracle_id", "decoding", "timestamp"}
// A truncated trailing record (interrupted write) is dropped on open; any
// other malformed line raises CacheCorrupt.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(const std::filesystem::path& file);

  ResponseCache(const ResponseCache&) = delete;
  ResponseCache& operator=(const ResponseCache&) = delete;

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& raw_response, std::string_view oracle_id,
             const DecodingParams& decoding);

  std::size_t size() const;
  bool persistent() const noexcept { return file_.has_value(); }

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::optional<std::filesystem::path> file_;
  std::ofstream out_;
};

}  // namespace lexprompt
