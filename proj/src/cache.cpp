#include "lexprompt/cache.hpp"

#include <chrono>
#include <ctime>

#include <json.hpp>

#include "lexprompt/error.hpp"
#include "lexprompt/text.hpp"

namespace lexprompt {

namespace {

nlohmann::json decoding_json(const DecodingParams& d) {
  return {{"temperature", d.temperature}, {"max_tokens", d.max_output_tokens}};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string cache_key(std::string_view prompt, std::string_view oracle_id,
                      const DecodingParams& decoding) {
  const nlohmann::json material = {std::string(prompt), std::string(oracle_id),
                                   decoding_json(decoding)};
  return sha256_hex(material.dump());
}

ResponseCache::ResponseCache(const std::filesystem::path& file) : file_(file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  if (std::filesystem::exists(file)) {
    const std::string data = read_text_file(file);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    std::size_t good_end = 0;
    bool needs_newline = false;
    while (pos < data.size()) {
      ++line_no;
      const auto nl = data.find('\n', pos);
      const bool last = nl == std::string::npos || nl + 1 >= data.size();
      const auto line = std::string_view(data).substr(pos, nl == std::string::npos ? data.size() - pos : nl - pos);
      const auto next = nl == std::string::npos ? data.size() : nl + 1;
      if (trim(line).empty()) {
        pos = next;
        good_end = next;
        continue;
      }
      try {
        const auto j = nlohmann::json::parse(line);
        entries_.insert_or_assign(j.at("key").get<std::string>(),
                                  j.at("raw_response").get<std::string>());
        good_end = next;
        needs_newline = nl == std::string::npos;
      } catch (const nlohmann::json::exception& e) {
        if (!last) {
          throw CacheCorrupt(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        break;
      }
      pos = next;
    }
    if (good_end < data.size()) std::filesystem::resize_file(file, good_end);
    if (needs_newline) {
      std::ofstream fix(file, std::ios::binary | std::ios::app);
      fix << '\n';
    }
  }
  out_.open(file, std::ios::binary | std::ios::app);
  if (!out_) throw Error("cannot open cache file " + file.string());
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::shared_lock lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

void ResponseCache::store(const std::string& key, const std::string& raw_response,
                          std::string_view oracle_id, const DecodingParams& decoding) {
  std::unique_lock lock(mutex_);
  if (!entries_.emplace(key, raw_response).second) return;
  if (!file_) return;
  const nlohmann::json record = {
      {"key", key},
      {"raw_response", raw_response},
      {"oracle_id", std::string(oracle_id)},
      {"decoding", decoding_json(decoding)},
      {"timestamp", utc_timestamp()},
  };
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_) throw Error("failed to append to cache file " + file_->string());
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace lexprompt
