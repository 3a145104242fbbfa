#include "lexprompt/clients.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "lexprompt/error.hpp"

namespace lexprompt {

std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("base_url '" + url + "' has no scheme");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

void OracleConfig::validate() const {
  if (base_url.empty()) throw ConfigError("oracle base_url is required");
  if (model_name.empty()) throw ConfigError("oracle model is required");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (max_output_tokens < 1) throw ConfigError("max_output_tokens must be >= 1");
}

OracleConfig OracleConfig::from_json(const nlohmann::json& j) {
  OracleConfig c;
  c.base_url = j.value("base_url", std::string{});
  c.model_name = j.value("model", std::string{});
  c.api_key_env = j.value("api_key_env", std::string{});
  c.temperature = j.value("temperature", c.temperature);
  c.max_output_tokens = j.value("max_tokens", c.max_output_tokens);
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.validate();
  return c;
}

FillMaskConfig FillMaskConfig::from_json(const nlohmann::json& j) {
  FillMaskConfig c;
  c.base_url = j.value("base_url", std::string{});
  if (c.base_url.empty()) throw ConfigError("fill-mask base_url is required");
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
  return c;
}

namespace {

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

void configure(httplib::Client& cli, double timeout_s) {
  const auto sec = static_cast<time_t>(timeout_s);
  const auto usec = static_cast<time_t>((timeout_s - std::floor(timeout_s)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
}

struct PostOutcome {
  std::string body;
  std::string failure;  // empty on success
};

// POST with retries on transport errors and transient statuses.
PostOutcome post_with_retries(const std::string& host, const std::string& path,
                              const httplib::Headers& headers, const std::string& body,
                              double timeout_s, int max_retries, int backoff_ms) {
  std::string last;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          static_cast<long long>(backoff_ms) * (1LL << std::min(attempt - 1, 16))));
    }
    httplib::Client cli(host);
    configure(cli, timeout_s);
    auto res = cli.Post(path, headers, body, "application/json");
    if (!res) {
      last = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return {res->body, {}};
    last = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
    if (!transient_status(res->status)) break;
  }
  return {{}, last};
}

}  // namespace

OpenAICompletionClient::OpenAICompletionClient(OracleConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (!cfg_.api_key_env.empty()) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') throw AuthMissing(cfg_.api_key_env);
    api_key_ = key;
  }
  std::tie(host_, path_prefix_) = split_base_url(cfg_.base_url);
  in_flight_ = std::make_unique<std::counting_semaphore<>>(
      static_cast<std::ptrdiff_t>(cfg_.parallelism));
}

std::string OpenAICompletionClient::identity() const {
  return "openai:" + cfg_.base_url + "#" + cfg_.model_name;
}

nlohmann::json OpenAICompletionClient::request_body(const std::string& prompt) const {
  return {
      {"model", cfg_.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", cfg_.temperature},
      {"max_tokens", cfg_.max_output_tokens},
  };
}

std::string OpenAICompletionClient::complete(const std::string& prompt) {
  if (prompt.empty()) throw InvalidArgument("prompt is empty");
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  in_flight_->acquire();
  PostOutcome out;
  try {
    out = post_with_retries(host_, path_prefix_ + "/chat/completions", headers,
                            request_body(prompt).dump(), cfg_.timeout_s, cfg_.max_retries,
                            cfg_.backoff_ms);
  } catch (...) {
    in_flight_->release();
    throw;
  }
  in_flight_->release();
  if (!out.failure.empty()) throw OracleFailure(out.failure);

  try {
    const auto j = nlohmann::json::parse(out.body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string{} : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw OracleFailure(std::string("malformed completion response: ") + e.what());
  }
}

HttpFillMaskClient::HttpFillMaskClient(FillMaskConfig cfg) : cfg_(std::move(cfg)) {
  std::tie(host_, path_prefix_) = split_base_url(cfg_.base_url);
}

std::vector<FillCandidate> HttpFillMaskClient::do_fill_mask(std::string_view masked_text,
                                                            std::size_t k) {
  const nlohmann::json body = {{"text", std::string(masked_text)}, {"k", k}};
  const auto out = post_with_retries(host_, path_prefix_ + "/fill_mask", {}, body.dump(),
                                     cfg_.timeout_s, cfg_.max_retries, cfg_.backoff_ms);
  if (!out.failure.empty()) throw ProviderFailure("fill-mask request failed: " + out.failure);
  try {
    const auto reply = nlohmann::json::parse(out.body);
    std::vector<FillCandidate> result;
    for (const auto& c : reply.at("candidates")) {
      result.push_back({c.at("word").get<std::string>(), c.at("probability").get<double>()});
    }
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw ProviderFailure(std::string("malformed fill-mask response: ") + e.what());
  }
}

}  // namespace lexprompt
