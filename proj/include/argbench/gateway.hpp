#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace argbench {

inline constexpr int kModelConfigVersion = 1;

enum class Provider { HttpChat, Oracle, AlwaysYes, AlwaysNo, Fixtures };

std::string to_string(Provider provider);
Provider parse_provider(std::string_view text);

struct ModelConfig {
  Provider provider = Provider::Oracle;
  std::string endpoint;     // http-chat: full URL of the chat-completions route
  std::string model;        // http-chat: model name sent in the request
  double timeout_seconds = 120.0;
  int max_retries = 3;
  int backoff_base_ms = 500;
  int backoff_cap_ms = 30000;
  std::size_t max_concurrency = 1;
  std::string api_key_env;  // http-chat: environment variable holding the key
  std::filesystem::path fixtures;
  // Sent only when set.
  std::optional<double> temperature;
  std::optional<int> max_tokens;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// Reads a config file:
//   {"config_version": 1, "provider": "http-chat", "endpoint": "...",
//    "model": "...", "api_key_env": "...", ...}
// Relative fixture paths resolve against the config file's directory.
ModelConfig load_model_config(const std::filesystem::path& path);
ModelConfig model_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json model_config_to_json(const ModelConfig& config);

enum class TransportStatus { Ok, Failed };

struct ModelReply {
  std::string instance_id;
  std::string raw_text;          // empty when failed
  std::int64_t latency_ms = 0;
  int attempts = 0;
  TransportStatus status = TransportStatus::Ok;
  std::string error;             // set when failed

  static ModelReply failure(std::string instance_id, std::string reason, int attempts, std::int64_t latency_ms = 0);
};

// Shared by every evaluation worker; implementations must be thread-safe.
class ModelClient {
 public:
  virtual ~ModelClient() = default;

  // Never throws for transport problems; they come back as failed replies.
  virtual ModelReply query(std::string_view prompt, std::string_view instance_id) = 0;

  // Upper bound on simultaneous query() calls callers should issue.
  virtual std::size_t max_concurrency() const { return 1; }
};

// Delay before retry number `retry` (1-based): base * 2^(retry-1), capped.
std::chrono::milliseconds backoff_delay(int base_ms, int cap_ms, int retry);

// Solves the puzzle by re-parsing the prompt and running grounded semantics.
class OracleClient final : public ModelClient {
 public:
  ModelReply query(std::string_view prompt, std::string_view instance_id) override;
};

class ConstantClient final : public ModelClient {
 public:
  explicit ConstantClient(bool answer_yes) : answer_yes_(answer_yes) {}
  ModelReply query(std::string_view prompt, std::string_view instance_id) override;

 private:
  bool answer_yes_;
};

// Plays back recorded replies from a JSON Lines file of
// {"instance_id": ..., "raw_text": ...}.
class FixtureClient final : public ModelClient {
 public:
  explicit FixtureClient(const std::filesystem::path& path);
  ModelReply query(std::string_view prompt, std::string_view instance_id) override;
  std::size_t size() const noexcept { return replies_.size(); }

 private:
  std::vector<std::pair<std::string, std::string>> replies_;  // sorted by id
};

// Chat-completions style HTTP client with retries and a concurrency gate.
class HttpChatClient final : public ModelClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpChatClient(ModelConfig config, Sleeper sleeper = {});
  ~HttpChatClient() override;

  ModelReply query(std::string_view prompt, std::string_view instance_id) override;
  std::size_t max_concurrency() const override { return config_.max_concurrency; }

  // Body sent for one prompt.
  nlohmann::json request_body(std::string_view prompt) const;

 private:
  struct Gate;
  ModelConfig config_;
  Sleeper sleeper_;
  std::unique_ptr<Gate> gate_;
};

std::unique_ptr<ModelClient> make_client(const ModelConfig& config);

// Convenience wrapper: builds a client for `config` and sends one prompt.
ModelReply query_model(const ModelConfig& config, std::string_view prompt, std::string_view instance_id);

}  // namespace argbench
