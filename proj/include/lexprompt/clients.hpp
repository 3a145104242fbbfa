#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include <json.hpp>

#include "lexprompt/oracle.hpp"

namespace lexprompt {

struct OracleConfig {
  std::string base_url;      // e.g. "http://localhost:8000/v1"
  std::string model_name;
  std::string api_key_env;   // empty: send no Authorization header
  double temperature = 0.0;
  int max_output_tokens = 16;
  double timeout_s = 60.0;
  int max_retries = 3;
  int backoff_ms = 500;      // first retry delay; doubles per attempt
  std::size_t parallelism = 4;

  void validate() const;
  static OracleConfig from_json(const nlohmann::json& j);
};

// OpenAI-compatible chat completions: the prompt goes out as a single user
// message and choices[0].message.content comes back verbatim. Connection
// errors, 408, 429 and 5xx are retried with exponential backoff.
class OpenAICompletionClient : public CompletionOracle {
 public:
  // Throws AuthMissing if api_key_env names an unset variable.
  explicit OpenAICompletionClient(OracleConfig cfg);

  std::string complete(const std::string& prompt) override;
  std::string identity() const override;
  DecodingParams decoding() const override { return {cfg_.temperature, cfg_.max_output_tokens}; }
  std::size_t parallelism() const override { return cfg_.parallelism; }

  nlohmann::json request_body(const std::string& prompt) const;

 private:
  OracleConfig cfg_;
  std::string api_key_;
  std::string host_;
  std::string path_prefix_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

struct FillMaskConfig {
  std::string base_url;  // service root; requests go to POST {base_url}/fill_mask
  double timeout_s = 30.0;
  int max_retries = 2;
  int backoff_ms = 200;

  static FillMaskConfig from_json(const nlohmann::json& j);
};

class HttpFillMaskClient : public FillMaskProvider {
 public:
  explicit HttpFillMaskClient(FillMaskConfig cfg);

 protected:
  std::vector<FillCandidate> do_fill_mask(std::string_view masked_text, std::size_t k) override;

 private:
  FillMaskConfig cfg_;
  std::string host_;
  std::string path_prefix_;
};

// Splits "scheme://host:port/prefix" into ("scheme://host:port", "/prefix").
std::pair<std::string, std::string> split_base_url(const std::string& url);

}  // namespace lexprompt
