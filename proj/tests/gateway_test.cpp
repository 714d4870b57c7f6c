#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "argbench/error.hpp"
#include "argbench/gateway.hpp"
#include "test_support.hpp"

using namespace argbench;
using namespace argbench::testing;
using nlohmann::json;

namespace {

// Local chat-completions stand-in. Each request pops the next status from
// `script` (200 once it runs out) and records what it saw.
class FakeChatServer {
 public:
  explicit FakeChatServer(std::vector<int> script = {}, std::chrono::milliseconds delay = {})
      : script_(std::move(script)), delay_(delay) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++active_;
      {
        std::lock_guard lock(mu_);
        peak_ = std::max(peak_, now);
        bodies_.push_back(req.body);
        auth_.push_back(req.get_header_value("Authorization"));
      }
      std::this_thread::sleep_for(delay_);
      int status = 200;
      {
        std::lock_guard lock(mu_);
        if (next_ < script_.size()) status = script_[next_++];
      }
      res.status = status;
      if (status == 200) {
        json reply{{"choices", json::array({json{{"message", json{{"role", "assistant"}, {"content", "Answer: yes"}}}}})}};
        res.set_content(reply.dump(), "application/json");
      } else {
        res.set_content("{\"error\":\"scripted\"}", "application/json");
      }
      --active_;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeChatServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  std::size_t requests() const {
    std::lock_guard lock(mu_);
    return bodies_.size();
  }
  std::vector<std::string> bodies() const {
    std::lock_guard lock(mu_);
    return bodies_;
  }
  std::vector<std::string> auth() const {
    std::lock_guard lock(mu_);
    return auth_;
  }
  int peak() const {
    std::lock_guard lock(mu_);
    return peak_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::vector<int> script_;
  std::chrono::milliseconds delay_;
  mutable std::mutex mu_;
  std::size_t next_ = 0;
  std::atomic<int> active_{0};
  int peak_ = 0;
  std::vector<std::string> bodies_;
  std::vector<std::string> auth_;
};

ModelConfig http_config(const std::string& endpoint) {
  ModelConfig c;
  c.provider = Provider::HttpChat;
  c.endpoint = endpoint;
  c.model = "test-model";
  c.api_key_env = "ARGBENCH_TEST_KEY";
  c.timeout_seconds = 5;
  c.max_retries = 2;
  c.backoff_base_ms = 10;
  c.backoff_cap_ms = 25;
  return c;
}

struct KeyGuard {
  KeyGuard() { ::setenv("ARGBENCH_TEST_KEY", "sk-test-123", 1); }
  ~KeyGuard() { ::unsetenv("ARGBENCH_TEST_KEY"); }
};

}  // namespace

TEST(OracleClientTest, AnswersReferenceExamples) {
  OracleClient oracle;
  EXPECT_EQ(oracle.query(kChainPrompt, "a").raw_text, "Answer: no");
  EXPECT_EQ(oracle.query(render_prompt(bind_instance(Topology::linear(3), {"A", "B", "C"}, "x")), "b").raw_text,
            "Answer: yes");
  const auto bad = oracle.query("gibberish", "c");
  EXPECT_EQ(bad.status, TransportStatus::Failed);
  EXPECT_FALSE(bad.error.empty());
}

TEST(ConstantClientTest, AlwaysSameAnswer) {
  ConstantClient yes(true), no(false);
  EXPECT_EQ(yes.query(kChainPrompt, "a").raw_text, "Answer: yes");
  EXPECT_EQ(no.query(kChainPrompt, "a").raw_text, "Answer: no");
  EXPECT_EQ(yes.query(kChainPrompt, "a").instance_id, "a");
}

TEST(FixtureClientTest, PlaysBackRecordedReplies) {
  FixtureClient fixtures(kFixtureDir / "recorded_replies.jsonl");
  EXPECT_EQ(fixtures.size(), 4u);
  const auto r = fixtures.query("ignored", "reply-linear-b");
  EXPECT_EQ(r.status, TransportStatus::Ok);
  EXPECT_NE(r.raw_text.find("Answer: no"), std::string::npos);
  const auto miss = fixtures.query("ignored", "nope");
  EXPECT_EQ(miss.status, TransportStatus::Failed);
}

TEST(FixtureClientTest, LaterDuplicateWinsAndBadLinesAreReported) {
  TempDir dir;
  write_file(dir / "f.jsonl",
             "{\"instance_id\":\"a\",\"raw_text\":\"one\"}\n\n{\"instance_id\":\"a\",\"raw_text\":\"two\"}\n");
  EXPECT_EQ(FixtureClient(dir / "f.jsonl").query("", "a").raw_text, "two");
  write_file(dir / "g.jsonl", "{\"instance_id\":\"a\",\"raw_text\":\"one\"}\n{\"id\":1}\n");
  try {
    FixtureClient client(dir / "g.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(FixtureClient(dir / "none.jsonl"), IoError);
}

TEST(BackoffTest, DoublesAndCaps) {
  using std::chrono::milliseconds;
  EXPECT_EQ(backoff_delay(500, 30000, 1), milliseconds(500));
  EXPECT_EQ(backoff_delay(500, 30000, 2), milliseconds(1000));
  EXPECT_EQ(backoff_delay(500, 30000, 3), milliseconds(2000));
  EXPECT_EQ(backoff_delay(500, 30000, 7), milliseconds(30000));
  EXPECT_EQ(backoff_delay(500, 30000, 200), milliseconds(30000));
  auto prev = milliseconds(0);
  for (int k = 1; k < 100; ++k) {
    const auto d = backoff_delay(300, 20000, k);
    EXPECT_GE(d, prev);
    EXPECT_LE(d, milliseconds(20000));
    prev = d;
  }
}

TEST(ModelConfigTest, LoadsAndValidates) {
  TempDir dir;
  write_file(dir / "m.json",
             R"({"config_version": 1, "provider": "fixtures", "fixtures": "replies.jsonl", "max_concurrency": 3})");
  const auto c = load_model_config(dir / "m.json");
  EXPECT_EQ(c.provider, Provider::Fixtures);
  EXPECT_EQ(c.fixtures, dir / "replies.jsonl");
  EXPECT_EQ(c.max_concurrency, 3u);

  write_file(dir / "v.json", R"({"config_version": 2, "provider": "oracle"})");
  EXPECT_THROW(load_model_config(dir / "v.json"), ValidationError);
  write_file(dir / "h.json", R"({"config_version": 1, "provider": "http-chat", "model": "m", "api_key_env": "K"})");
  EXPECT_THROW(load_model_config(dir / "h.json"), ValidationError);
  write_file(dir / "p.json", R"({"config_version": 1, "provider": "carrier-pigeon"})");
  EXPECT_THROW(load_model_config(dir / "p.json"), ValidationError);
  write_file(dir / "c.json", R"({"config_version": 1, "provider": "oracle", "max_concurrency": 0})");
  EXPECT_THROW(load_model_config(dir / "c.json"), ValidationError);
  EXPECT_THROW(load_model_config(dir / "missing.json"), IoError);
}

TEST(ModelConfigTest, JsonRoundTripNeverStoresKeys) {
  auto c = http_config("http://localhost/x");
  c.temperature = 0.0;
  const auto j = model_config_to_json(c);
  EXPECT_EQ(j.at("api_key_env"), "ARGBENCH_TEST_KEY");
  EXPECT_EQ(j.dump().find("sk-"), std::string::npos);
  const auto back = model_config_from_json(j);
  EXPECT_EQ(back.endpoint, c.endpoint);
  EXPECT_EQ(back.temperature, c.temperature);
  EXPECT_FALSE(back.max_tokens);
}

TEST(QueryModelTest, RejectsEmptyPrompt) {
  EXPECT_THROW(query_model(ModelConfig{}, "", "x"), ValidationError);
  EXPECT_EQ(query_model(ModelConfig{}, kChainPrompt, "x").raw_text, "Answer: no");
}

TEST(HttpChatClientTest, SendsAuthAndBody) {
  KeyGuard key;
  FakeChatServer server;
  auto config = http_config(server.endpoint());
  config.max_tokens = 64;
  HttpChatClient client(config, [](auto) {});
  const auto reply = client.query(kChainPrompt, "id-1");
  ASSERT_EQ(reply.status, TransportStatus::Ok) << reply.error;
  EXPECT_EQ(reply.raw_text, "Answer: yes");
  EXPECT_EQ(reply.attempts, 1);
  ASSERT_EQ(server.requests(), 1u);
  EXPECT_EQ(server.auth()[0], "Bearer sk-test-123");
  const auto body = json::parse(server.bodies()[0]);
  EXPECT_EQ(body.at("model"), "test-model");
  EXPECT_EQ(body.at("messages").size(), 1u);
  EXPECT_EQ(body.at("messages")[0].at("role"), "user");
  EXPECT_EQ(body.at("messages")[0].at("content"), kChainPrompt);
  EXPECT_EQ(body.at("max_tokens"), 64);
  EXPECT_FALSE(body.contains("temperature"));
}

TEST(HttpChatClientTest, RetriesServerErrorsWithBackoff) {
  KeyGuard key;
  FakeChatServer server({503, 429});
  std::vector<std::chrono::milliseconds> sleeps;
  HttpChatClient client(http_config(server.endpoint()), [&](auto d) { sleeps.push_back(d); });
  const auto reply = client.query(kChainPrompt, "id");
  ASSERT_EQ(reply.status, TransportStatus::Ok) << reply.error;
  EXPECT_EQ(reply.attempts, 3);
  EXPECT_EQ(server.requests(), 3u);
  EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(10), std::chrono::milliseconds(20)}));
}

TEST(HttpChatClientTest, GivesUpAfterMaxRetries) {
  KeyGuard key;
  FakeChatServer server({500, 500, 500, 500});
  HttpChatClient client(http_config(server.endpoint()), [](auto) {});
  const auto reply = client.query(kChainPrompt, "id");
  EXPECT_EQ(reply.status, TransportStatus::Failed);
  EXPECT_EQ(reply.attempts, 3);
  EXPECT_EQ(server.requests(), 3u);
  EXPECT_NE(reply.error.find("HTTP 500"), std::string::npos);
}

TEST(HttpChatClientTest, DoesNotRetryClientErrors) {
  KeyGuard key;
  FakeChatServer server({400});
  HttpChatClient client(http_config(server.endpoint()), [](auto) {});
  const auto reply = client.query(kChainPrompt, "id");
  EXPECT_EQ(reply.status, TransportStatus::Failed);
  EXPECT_EQ(reply.attempts, 1);
  EXPECT_EQ(server.requests(), 1u);
}

TEST(HttpChatClientTest, MissingKeyFailsWithoutSending) {
  ::unsetenv("ARGBENCH_TEST_KEY");
  FakeChatServer server;
  HttpChatClient client(http_config(server.endpoint()), [](auto) {});
  const auto reply = client.query(kChainPrompt, "id");
  EXPECT_EQ(reply.status, TransportStatus::Failed);
  EXPECT_EQ(reply.attempts, 0);
  EXPECT_NE(reply.error.find("ARGBENCH_TEST_KEY"), std::string::npos);
  EXPECT_EQ(server.requests(), 0u);
}

TEST(HttpChatClientTest, UnreachableEndpointIsAFailedReply) {
  KeyGuard key;
  auto config = http_config("http://127.0.0.1:1/v1/chat/completions");
  config.timeout_seconds = 1;
  HttpChatClient client(config, [](auto) {});
  const auto reply = client.query(kChainPrompt, "id");
  EXPECT_EQ(reply.status, TransportStatus::Failed);
  EXPECT_EQ(reply.attempts, 3);
}

TEST(HttpChatClientTest, ConcurrencyNeverExceedsLimit) {
  KeyGuard key;
  FakeChatServer server({}, std::chrono::milliseconds(30));
  auto config = http_config(server.endpoint());
  config.max_concurrency = 2;
  HttpChatClient client(config, [](auto) {});
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { client.query(kChainPrompt, "id"); });
  for (auto& t : threads) t.join();
  EXPECT_EQ(server.requests(), 8u);
  EXPECT_LE(server.peak(), 2);
  EXPECT_GE(server.peak(), 1);
}
