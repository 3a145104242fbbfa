#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "lexprompt/clients.hpp"
#include "lexprompt/error.hpp"

using namespace lexprompt;

namespace {

// httplib server on an ephemeral port, torn down with the fixture.
class LocalServer {
 public:
  LocalServer() {
    port_ = server.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LocalServer() {
    server.stop();
    thread_.join();
  }
  std::string url(const std::string& prefix = "") const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }

  httplib::Server server;

 private:
  int port_ = 0;
  std::thread thread_;
};

std::string completion(const std::string& text) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}}
      .dump();
}

OracleConfig config_for(const LocalServer& s) {
  OracleConfig cfg;
  cfg.base_url = s.url("/v1");
  cfg.model_name = "tiny";
  cfg.backoff_ms = 1;
  cfg.timeout_s = 5;
  return cfg;
}

}  // namespace

TEST(OracleConfig, Validation) {
  OracleConfig c;
  EXPECT_THROW(c.validate(), ConfigError);
  c.base_url = "http://x";
  c.model_name = "m";
  EXPECT_NO_THROW(c.validate());
  c.temperature = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c.temperature = 0;
  c.parallelism = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.parallelism = 1;
  c.max_retries = -1;
  EXPECT_THROW(c.validate(), ConfigError);

  const auto parsed = OracleConfig::from_json(nlohmann::json::parse(
      R"({"base_url":"http://h:1/v1","model":"m","max_tokens":4,"parallelism":2})"));
  EXPECT_EQ(parsed.max_output_tokens, 4);
  EXPECT_EQ(parsed.parallelism, 2u);
  EXPECT_EQ(parsed.temperature, 0.0);
}

TEST(SplitBaseUrl, HostAndPrefix) {
  EXPECT_EQ(split_base_url("http://h:8000/v1/"), std::make_pair(std::string("http://h:8000"),
                                                                 std::string("/v1")));
  EXPECT_EQ(split_base_url("https://h"), std::make_pair(std::string("https://h"), std::string()));
  EXPECT_THROW(split_base_url("h:8000"), ConfigError);
}

TEST(OpenAIClient, RetriesAfter429) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
      return;
    }
    res.set_content(completion("Yes"), "application/json");
  });
  OpenAICompletionClient client(config_for(s));
  EXPECT_EQ(client.complete("Is this fine?"), "Yes");
  EXPECT_EQ(hits.load(), 2);
}

TEST(OpenAIClient, GivesUpAfterRetries) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 503;
  });
  auto cfg = config_for(s);
  cfg.max_retries = 2;
  OpenAICompletionClient client(cfg);
  EXPECT_THROW(client.complete("p"), OracleFailure);
  EXPECT_EQ(hits.load(), 3);
}

TEST(OpenAIClient, ClientErrorIsNotRetried) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
  });
  OpenAICompletionClient client(config_for(s));
  EXPECT_THROW(client.complete("p"), OracleFailure);
  EXPECT_EQ(hits.load(), 1);
}

TEST(OpenAIClient, SendsPromptVerbatim) {
  LocalServer s;
  std::string seen_prompt;
  std::string seen_auth;
  nlohmann::json seen;
  s.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    seen_prompt = seen.at("messages").at(0).at("content").get<std::string>();
    seen_auth = req.get_header_value("Authorization");
    res.set_content(completion("  No, it is not.\n"), "application/json");
  });
  ::setenv("LEXPROMPT_TEST_KEY", "sk-test", 1);
  auto cfg = config_for(s);
  cfg.api_key_env = "LEXPROMPT_TEST_KEY";
  OpenAICompletionClient client(cfg);
  const std::string prompt = "Line one\n\n  \"quoted\" \t unicode \xc3\xa9 {brace}\nAnswer:";
  EXPECT_EQ(client.complete(prompt), "  No, it is not.\n");
  EXPECT_EQ(seen_prompt, prompt);
  EXPECT_EQ(seen_auth, "Bearer sk-test");
  EXPECT_EQ(seen.at("model"), "tiny");
  EXPECT_EQ(seen.at("temperature"), 0.0);
  EXPECT_EQ(seen.at("max_tokens"), 16);
  EXPECT_EQ(seen.at("messages").at(0).at("role"), "user");
  EXPECT_EQ(client.identity(), "openai:" + s.url("/v1") + "#tiny");
}

TEST(OpenAIClient, MalformedResponse) {
  LocalServer s;
  s.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"choices\": []}", "application/json");
  });
  OpenAICompletionClient client(config_for(s));
  EXPECT_THROW(client.complete("p"), OracleFailure);
  EXPECT_THROW(client.complete(""), InvalidArgument);
}

TEST(OpenAIClient, ConnectionRefused) {
  OracleConfig cfg;
  cfg.base_url = "http://127.0.0.1:1/v1";
  cfg.model_name = "m";
  cfg.max_retries = 1;
  cfg.backoff_ms = 1;
  cfg.timeout_s = 1;
  OpenAICompletionClient client(cfg);
  EXPECT_THROW(client.complete("p"), OracleFailure);
}

TEST(OpenAIClient, MissingKeyEnv) {
  ::unsetenv("LEXPROMPT_UNSET_KEY");
  OracleConfig cfg;
  cfg.base_url = "https://api.example.com/v1";
  cfg.model_name = "m";
  cfg.api_key_env = "LEXPROMPT_UNSET_KEY";
  EXPECT_THROW(OpenAICompletionClient{cfg}, AuthMissing);
}

TEST(HttpFillMask, RoundTripSortedAndTruncated) {
  LocalServer s;
  nlohmann::json seen;
  s.server.Post("/fill_mask", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    res.set_content(R"({"candidates":[{"word":"that","probability":0.2},)"
                    R"({"word":"this","probability":0.5},{"word":"a","probability":0.1}]})",
                    "application/json");
  });
  HttpFillMaskClient client(FillMaskConfig{s.url(), 5, 0, 1});
  const auto out = client.fill_mask("Does [MASK] sentence make sense?", 2);
  EXPECT_EQ(seen.at("text"), "Does [MASK] sentence make sense?");
  EXPECT_EQ(seen.at("k"), 2);
  EXPECT_EQ(out, (std::vector<FillCandidate>{{"this", 0.5}, {"that", 0.2}}));
  EXPECT_THROW(client.fill_mask("no mask", 2), BadMaskCount);
}

TEST(HttpFillMask, ServerErrors) {
  LocalServer s;
  s.server.Post("/fill_mask", [&](const httplib::Request&, httplib::Response& res) {
    res.status = 400;
  });
  s.server.Post("/bad/fill_mask", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"oops\":1}", "application/json");
  });
  HttpFillMaskClient client(FillMaskConfig{s.url(), 5, 0, 1});
  EXPECT_THROW(client.fill_mask("[MASK]", 1), ProviderFailure);
  HttpFillMaskClient bad(FillMaskConfig{s.url("/bad"), 5, 0, 1});
  EXPECT_THROW(bad.fill_mask("[MASK]", 1), ProviderFailure);
  EXPECT_THROW(FillMaskConfig::from_json(nlohmann::json::object()), ConfigError);
}
