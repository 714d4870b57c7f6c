#include "argbench/gateway.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "argbench/error.hpp"
#include "argbench/puzzle.hpp"
#include "argbench/semantics.hpp"

namespace argbench {

using nlohmann::json;

std::string to_string(Provider provider) {
  switch (provider) {
    case Provider::HttpChat:
      return "http-chat";
    case Provider::Oracle:
      return "oracle";
    case Provider::AlwaysYes:
      return "always-yes";
    case Provider::AlwaysNo:
      return "always-no";
    case Provider::Fixtures:
      return "fixtures";
  }
  return "?";
}

Provider parse_provider(std::string_view text) {
  for (auto p : {Provider::HttpChat, Provider::Oracle, Provider::AlwaysYes, Provider::AlwaysNo, Provider::Fixtures}) {
    if (to_string(p) == text) return p;
  }
  throw ValidationError("unknown provider '" + std::string(text) +
                        "' (expected http-chat, oracle, always-yes, always-no or fixtures)");
}

void ModelConfig::validate() const {
  if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
  if (max_concurrency < 1) throw ValidationError("max_concurrency must be >= 1");
  if (backoff_base_ms < 0 || backoff_cap_ms < 0) throw ValidationError("backoff delays must be >= 0");
  if (!(timeout_seconds > 0)) throw ValidationError("timeout_seconds must be positive");
  if (provider == Provider::HttpChat) {
    if (endpoint.empty()) throw ValidationError("http-chat config needs an endpoint");
    if (model.empty()) throw ValidationError("http-chat config needs a model name");
    if (api_key_env.empty()) throw ValidationError("http-chat config needs api_key_env");
  }
  if (provider == Provider::Fixtures && fixtures.empty()) throw ValidationError("fixtures config needs a fixtures path");
}

ModelConfig model_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ModelConfig c;
  try {
    const auto version = j.value("config_version", 0);
    if (version != kModelConfigVersion) {
      throw ValidationError("model config_version must be " + std::to_string(kModelConfigVersion));
    }
    c.provider = parse_provider(j.at("provider").get<std::string>());
    c.endpoint = j.value("endpoint", "");
    c.model = j.value("model", "");
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.backoff_base_ms = j.value("backoff_base_ms", c.backoff_base_ms);
    c.backoff_cap_ms = j.value("backoff_cap_ms", c.backoff_cap_ms);
    c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
    c.api_key_env = j.value("api_key_env", "");
    if (j.contains("fixtures")) {
      std::filesystem::path p = j.at("fixtures").get<std::string>();
      c.fixtures = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (j.contains("temperature") && !j.at("temperature").is_null()) c.temperature = j.at("temperature").get<double>();
    if (j.contains("max_tokens") && !j.at("max_tokens").is_null()) c.max_tokens = j.at("max_tokens").get<int>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad model config: ") + e.what());
  }
  c.validate();
  return c;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read model config " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError(path.string() + ": model config is not a JSON object");
  return model_config_from_json(j, path.parent_path());
}

json model_config_to_json(const ModelConfig& c) {
  json j{
      {"config_version", kModelConfigVersion},
      {"provider", to_string(c.provider)},
      {"timeout_seconds", c.timeout_seconds},
      {"max_retries", c.max_retries},
      {"backoff_base_ms", c.backoff_base_ms},
      {"backoff_cap_ms", c.backoff_cap_ms},
      {"max_concurrency", c.max_concurrency},
  };
  if (!c.endpoint.empty()) j["endpoint"] = c.endpoint;
  if (!c.model.empty()) j["model"] = c.model;
  if (!c.api_key_env.empty()) j["api_key_env"] = c.api_key_env;
  if (!c.fixtures.empty()) j["fixtures"] = c.fixtures.string();
  if (c.temperature) j["temperature"] = *c.temperature;
  if (c.max_tokens) j["max_tokens"] = *c.max_tokens;
  return j;
}

ModelReply ModelReply::failure(std::string instance_id, std::string reason, int attempts, std::int64_t latency_ms) {
  return ModelReply{
      .instance_id = std::move(instance_id),
      .raw_text = {},
      .latency_ms = latency_ms,
      .attempts = attempts,
      .status = TransportStatus::Failed,
      .error = std::move(reason),
  };
}

std::chrono::milliseconds backoff_delay(int base_ms, int cap_ms, int retry) {
  std::int64_t delay = base_ms;
  for (int i = 1; i < retry && delay < cap_ms; ++i) delay *= 2;
  return std::chrono::milliseconds(std::min<std::int64_t>(delay, cap_ms));
}

namespace {

ModelReply ok_reply(std::string_view instance_id, std::string text) {
  return ModelReply{.instance_id = std::string(instance_id),
                    .raw_text = std::move(text),
                    .latency_ms = 0,
                    .attempts = 1,
                    .status = TransportStatus::Ok,
                    .error = {}};
}

}  // namespace

ModelReply OracleClient::query(std::string_view prompt, std::string_view instance_id) {
  try {
    const auto parsed = reparse_prompt(prompt);
    return ok_reply(instance_id, root_accepted(parsed.graph) ? "Answer: yes" : "Answer: no");
  } catch (const ParseError& e) {
    return ModelReply::failure(std::string(instance_id), std::string("oracle cannot read prompt: ") + e.what(), 1);
  }
}

ModelReply ConstantClient::query(std::string_view, std::string_view instance_id) {
  return ok_reply(instance_id, answer_yes_ ? "Answer: yes" : "Answer: no");
}

FixtureClient::FixtureClient(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read fixtures " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("instance_id") || !j.contains("raw_text")) {
      throw ParseError(number, path.string() + ": expected {\"instance_id\", \"raw_text\"}");
    }
    replies_.emplace_back(j.at("instance_id").get<std::string>(), j.at("raw_text").get<std::string>());
  }
  std::stable_sort(replies_.begin(), replies_.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  // Later recordings of the same id win.
  std::vector<std::pair<std::string, std::string>> unique;
  for (auto& r : replies_) {
    if (!unique.empty() && unique.back().first == r.first) {
      unique.back() = std::move(r);
    } else {
      unique.push_back(std::move(r));
    }
  }
  replies_ = std::move(unique);
}

ModelReply FixtureClient::query(std::string_view, std::string_view instance_id) {
  auto it = std::lower_bound(replies_.begin(), replies_.end(), instance_id,
                             [](const auto& entry, std::string_view id) { return entry.first < id; });
  if (it == replies_.end() || it->first != instance_id) {
    return ModelReply::failure(std::string(instance_id), "no recorded reply", 1);
  }
  return ok_reply(instance_id, it->second);
}

struct HttpChatClient::Gate {
  explicit Gate(std::size_t slots) : free(slots) {}

  void acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return free > 0; });
    --free;
  }
  void release() {
    {
      std::lock_guard lock(mu);
      ++free;
    }
    cv.notify_one();
  }

  std::mutex mu;
  std::condition_variable cv;
  std::size_t free;
};

HttpChatClient::HttpChatClient(ModelConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)), gate_(std::make_unique<Gate>(config_.max_concurrency)) {
  config_.validate();
  if (config_.provider != Provider::HttpChat) throw ValidationError("HttpChatClient needs an http-chat config");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

HttpChatClient::~HttpChatClient() = default;

json HttpChatClient::request_body(std::string_view prompt) const {
  json body{
      {"model", config_.model},
      {"messages", json::array({json{{"role", "user"}, {"content", std::string(prompt)}}})},
  };
  if (config_.temperature) body["temperature"] = *config_.temperature;
  if (config_.max_tokens) body["max_tokens"] = *config_.max_tokens;
  return body;
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint '" + url + "' has no scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// Accepts both a plain string and the list-of-parts content shape.
std::optional<std::string> extract_content(const json& body) {
  if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
    return std::nullopt;
  }
  const auto& message = body["choices"][0].value("message", json::object());
  if (!message.contains("content")) return std::nullopt;
  const auto& content = message["content"];
  if (content.is_string()) return content.get<std::string>();
  if (content.is_array()) {
    std::string text;
    for (const auto& part : content) {
      if (part.is_object() && part.value("type", "") == "text") text += part.value("text", "");
    }
    return text;
  }
  return std::nullopt;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

ModelReply HttpChatClient::query(std::string_view prompt, std::string_view instance_id) {
  const std::string id(instance_id);
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    return ModelReply::failure(id, "environment variable " + config_.api_key_env + " is not set", 0);
  }

  gate_->acquire();
  struct Release {
    Gate* g;
    ~Release() { g->release(); }
  } release{gate_.get()};

  Endpoint endpoint;
  try {
    endpoint = split_url(config_.endpoint);
  } catch (const ValidationError& e) {
    return ModelReply::failure(id, e.what(), 0);
  }
  httplib::Client client(endpoint.origin);
  if (!client.is_valid()) return ModelReply::failure(id, "unsupported endpoint " + config_.endpoint, 0);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  const httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
  const auto body = request_body(prompt).dump();

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  };
  std::string last_error;
  const int max_attempts = config_.max_retries + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    auto res = client.Post(endpoint.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      json parsed = json::parse(res->body, nullptr, false);
      auto content = parsed.is_discarded() ? std::nullopt : extract_content(parsed);
      if (!content) return ModelReply::failure(id, "response has no message content", attempt, elapsed());
      return ModelReply{.instance_id = id,
                        .raw_text = std::move(*content),
                        .latency_ms = elapsed(),
                        .attempts = attempt,
                        .status = TransportStatus::Ok,
                        .error = {}};
    } else {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
      if (!retryable_status(res->status)) return ModelReply::failure(id, last_error, attempt, elapsed());
    }
    if (attempt < max_attempts) sleeper_(backoff_delay(config_.backoff_base_ms, config_.backoff_cap_ms, attempt));
  }
  return ModelReply::failure(id, "retries exhausted; last error: " + last_error, max_attempts, elapsed());
}

std::unique_ptr<ModelClient> make_client(const ModelConfig& config) {
  config.validate();
  switch (config.provider) {
    case Provider::HttpChat:
      return std::make_unique<HttpChatClient>(config);
    case Provider::Oracle:
      return std::make_unique<OracleClient>();
    case Provider::AlwaysYes:
      return std::make_unique<ConstantClient>(true);
    case Provider::AlwaysNo:
      return std::make_unique<ConstantClient>(false);
    case Provider::Fixtures:
      return std::make_unique<FixtureClient>(config.fixtures);
  }
  throw ValidationError("unhandled provider");
}

ModelReply query_model(const ModelConfig& config, std::string_view prompt, std::string_view instance_id) {
  if (prompt.empty()) throw ValidationError("prompt must not be empty");
  return make_client(config)->query(prompt, instance_id);
}

}  // namespace argbench
