// Copyright 2026 The hgp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <semaphore>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "hgp/error.hpp"
#include "hgp/exchange.hpp"
#include "hgp/utf8.hpp"

namespace hgp {

// Wire dialects. Both send one user message; they differ in field names.
//   openai_chat: {"model":M,"messages":[{"role":"user","content":P}]}
//                reply choices[0].message.content, auth "Authorization: Bearer"
//   gemini:      {"contents":[{"role":"user","parts":[{"text":P}]}]}
//                reply candidates[0].content.parts[*].text, auth "x-goog-api-key"
//   mock:        openai_chat body, no credential
enum class ProviderKind { kOpenAiChat, kGemini, kMock };

inline std::string_view to_string(ProviderKind k) {
  switch (k) {
    case ProviderKind::kOpenAiChat: return "openai_chat";
    case ProviderKind::kGemini: return "gemini";
    case ProviderKind::kMock: return "mock";
  }
  return "mock";
}

struct ProviderConfig {
  std::string name;
  ProviderKind kind = ProviderKind::kMock;
  std::string endpoint;
  std::string credential_env;  // variable holding the secret; never the secret
  std::string model_id;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  int max_in_flight = 1;

  void validate() const {
    if (name.empty()) throw Error(ErrorCode::kConfigError, "provider name is empty");
    if (timeout.count() <= 0) {
      throw Error(ErrorCode::kConfigError, "provider timeout must be positive");
    }
    if (max_retries < 0 || max_retries > 5) {
      throw Error(ErrorCode::kConfigError, "max_retries must be within 0..5");
    }
    if (max_in_flight < 1) {
      throw Error(ErrorCode::kConfigError, "max_in_flight must be at least 1");
    }
  }
};

inline nlohmann::ordered_json to_json(const ProviderConfig& c) {
  return {{"name", c.name},
          {"kind", to_string(c.kind)},
          {"endpoint", c.endpoint},
          {"credential_env", c.credential_env},
          {"model_id", c.model_id},
          {"timeout_ms", c.timeout.count()},
          {"max_retries", c.max_retries}};
}

// ---------------------------------------------------------------------------
// Transport

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{30000};
};

struct HttpResponse {
  enum class Outcome { kCompleted, kTimeout, kNetworkError };
  Outcome outcome = Outcome::kCompleted;
  int status = 0;
  std::string body;
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// Real HTTP(S) via cpp-httplib.
class HttpTransport final : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    const auto scheme_end = request.url.find("://");
    if (scheme_end == std::string::npos) {
      return {HttpResponse::Outcome::kNetworkError, 0, {}, "malformed URL"};
    }
    const auto path_begin = request.url.find('/', scheme_end + 3);
    const std::string origin = request.url.substr(0, path_begin);
    const std::string path =
        path_begin == std::string::npos ? "/" : request.url.substr(path_begin);

    httplib::Client client(origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        request.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    auto res = client.Post(path, headers, request.body, "application/json; charset=utf-8");
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::Read ||
                             err == httplib::Error::ConnectionTimeout;
      return {timed_out ? HttpResponse::Outcome::kTimeout
                        : HttpResponse::Outcome::kNetworkError,
              0, {}, httplib::to_string(err)};
    }
    return {HttpResponse::Outcome::kCompleted, res->status, res->body, {}};
  }
};

/// Records every request body byte-for-byte before delegating.
class CapturingTransport final : public Transport {
 public:
  explicit CapturingTransport(std::shared_ptr<Transport> inner)
      : inner_(std::move(inner)) {}

  HttpResponse post(const HttpRequest& request) override {
    {
      std::lock_guard lock(mu_);
      requests_.push_back(request);
    }
    return inner_->post(request);
  }

  std::vector<HttpRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

 private:
  std::shared_ptr<Transport> inner_;
  mutable std::mutex mu_;
  std::vector<HttpRequest> requests_;
};

// ---------------------------------------------------------------------------
// Dialect adapters

namespace detail {

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

}  // namespace detail

// nlohmann::json::dump() emits non-ASCII as raw UTF-8 and performs no
// normalization, so the prompt's bytes reach the wire unchanged.
inline HttpRequest build_request(const ProviderConfig& cfg, std::string_view prompt,
                                 const std::string& credential) {
  HttpRequest req;
  req.timeout = cfg.timeout;
  nlohmann::json body;
  switch (cfg.kind) {
    case ProviderKind::kOpenAiChat:
    case ProviderKind::kMock:
      body = {{"model", cfg.model_id},
              {"messages", {{{"role", "user"}, {"content", std::string(prompt)}}}}};
      req.url = cfg.endpoint;
      if (!credential.empty()) req.headers.emplace_back("Authorization", "Bearer " + credential);
      break;
    case ProviderKind::kGemini:
      body = {{"contents",
               {{{"role", "user"}, {"parts", {{{"text", std::string(prompt)}}}}}}}};
      req.url = detail::replace_all(cfg.endpoint, "{model}", cfg.model_id);
      req.headers.emplace_back("x-goog-api-key", credential);
      break;
  }
  req.body = body.dump();
  return req;
}

/// Prompt text carried by a request body of either dialect.
inline std::optional<std::string> extract_prompt(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  if (j.contains("messages") && j["messages"].is_array() && !j["messages"].empty()) {
    const auto& m = j["messages"].back();
    if (m.contains("content") && m["content"].is_string()) return m["content"].get<std::string>();
  }
  if (j.contains("contents") && j["contents"].is_array() && !j["contents"].empty()) {
    const auto& parts = j["contents"].back().value("parts", nlohmann::json::array());
    if (parts.is_array() && !parts.empty() && parts[0].contains("text")) {
      return parts[0]["text"].get<std::string>();
    }
  }
  return std::nullopt;
}

inline std::optional<std::string> parse_reply(ProviderKind kind, std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  try {
    if (kind == ProviderKind::kGemini) {
      std::string text;
      for (const auto& part : j.at("candidates").at(0).at("content").at("parts")) {
        text += part.value("text", std::string{});
      }
      return text;
    }
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Mock

struct MockScript {
  enum class Mode { kScript, kEcho, kTimeout };
  Mode mode = Mode::kScript;
  std::map<std::string, std::string> exact;                  // prompt -> reply
  std::vector<std::pair<std::string, std::string>> patterns;  // ECMAScript regex -> reply
  std::string fallback = "I'm not sure what you are asking.";
  int fail_first = 0;  // time out this many calls before answering

  std::string reply(const std::string& prompt) const {
    if (mode == Mode::kEcho) return prompt;
    if (auto it = exact.find(prompt); it != exact.end()) return it->second;
    for (const auto& [pattern, response] : patterns) {
      if (std::regex_search(prompt, std::regex(pattern))) return response;
    }
    return fallback;
  }
};

/// {"mode":"script|echo|timeout","responses":{prompt:reply},
///  "patterns":[{"regex":..,"response":..}],"fallback":..,"fail_first":n}
inline MockScript mock_script_from_json(const nlohmann::json& j) {
  MockScript s;
  const std::string mode = j.value("mode", std::string("script"));
  if (mode == "echo") {
    s.mode = MockScript::Mode::kEcho;
  } else if (mode == "timeout") {
    s.mode = MockScript::Mode::kTimeout;
  } else if (mode != "script") {
    throw Error(ErrorCode::kConfigError, "unknown mock mode '" + mode + "'");
  }
  if (j.contains("responses")) {
    for (const auto& [k, v] : j["responses"].items()) s.exact[k] = v.get<std::string>();
  }
  if (j.contains("patterns")) {
    for (const auto& p : j["patterns"]) {
      s.patterns.emplace_back(p.at("regex").get<std::string>(),
                              p.at("response").get<std::string>());
    }
  }
  s.fallback = j.value("fallback", s.fallback);
  s.fail_first = j.value("fail_first", 0);
  return s;
}

/// In-process stand-in for a chat-completion endpoint. Deterministic.
class MockTransport final : public Transport {
 public:
  explicit MockTransport(MockScript script) : script_(std::move(script)) {}

  HttpResponse post(const HttpRequest& request) override {
    {
      std::lock_guard lock(mu_);
      if (script_.mode == MockScript::Mode::kTimeout || calls_++ < script_.fail_first) {
        return {HttpResponse::Outcome::kTimeout, 0, {}, "mock timeout"};
      }
    }
    auto prompt = extract_prompt(request.body);
    if (!prompt) return {HttpResponse::Outcome::kCompleted, 400, R"({"error":"bad request"})", {}};
    const nlohmann::json reply = {
        {"choices", {{{"index", 0},
                      {"message", {{"role", "assistant"}, {"content", script_.reply(*prompt)}}}}}}};
    return {HttpResponse::Outcome::kCompleted, 200, reply.dump(), {}};
  }

 private:
  MockScript script_;
  std::mutex mu_;
  int calls_ = 0;
};

// ---------------------------------------------------------------------------
// Provider

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

/// A configured provider bound to a transport. Copies share the transport
/// and the in-flight limit.
class Provider {
 public:
  Provider(ProviderConfig cfg, std::shared_ptr<Transport> transport,
           Sleeper sleeper = real_sleep)
      : cfg_(std::move(cfg)),
        transport_(std::move(transport)),
        sleeper_(std::move(sleeper)) {
    cfg_.validate();
    slots_ = std::make_shared<std::counting_semaphore<64>>(std::min(cfg_.max_in_flight, 64));
  }

  const ProviderConfig& config() const noexcept { return cfg_; }
  Transport& transport() const { return *transport_; }

  void set_sleeper(Sleeper s) { sleeper_ = std::move(s); }

  std::string credential() const {
    if (cfg_.kind == ProviderKind::kMock) return {};
    const char* value = cfg_.credential_env.empty() ? nullptr
                                                    : std::getenv(cfg_.credential_env.c_str());
    if (value == nullptr || *value == '\0') {
      throw Error(ErrorCode::kConfigError,
                  "provider '" + cfg_.name + "' has no credential; set " +
                      (cfg_.credential_env.empty() ? std::string("a credential variable")
                                                   : cfg_.credential_env),
                  {{"provider", cfg_.name}});
    }
    return value;
  }

  void sleep(std::chrono::milliseconds d) const { sleeper_(d); }

  std::counting_semaphore<64>& slots() const { return *slots_; }

 private:
  ProviderConfig cfg_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;
  std::shared_ptr<std::counting_semaphore<64>> slots_;
};

/// Sends one prompt, byte-for-byte. Transport failures come back as data in
/// Exchange::transport_status. Timeouts, network errors, 429 and 5xx are
/// retried up to max_retries times with 1s, 2s, 4s... backoff; a well-formed
/// reply is never retried. Throws ConfigError when the credential is missing
/// and InvalidArgument for an empty or non-UTF-8 prompt.
inline Exchange send_prompt(const Provider& provider, std::string_view prompt) {
  const ProviderConfig& cfg = provider.config();
  if (prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "prompt is empty");
  if (!utf8::is_valid(prompt)) {
    throw Error(ErrorCode::kInvalidArgument, "prompt is not valid UTF-8");
  }
  const std::string credential = provider.credential();
  const HttpRequest request = build_request(cfg, prompt, credential);

  Exchange ex;
  ex.prompt = std::string(prompt);
  ex.provider = cfg.name;
  ex.model_id = cfg.model_id;

  const auto started = std::chrono::steady_clock::now();
  std::chrono::milliseconds backoff{1000};
  for (int attempt = 0;; ++attempt) {
    ex.attempts = attempt + 1;
    HttpResponse res;
    {
      provider.slots().acquire();
      try {
        res = provider.transport().post(request);
      } catch (...) {
        provider.slots().release();
        throw;
      }
      provider.slots().release();
    }

    bool retryable = false;
    ex.response_text.clear();
    if (res.outcome == HttpResponse::Outcome::kTimeout) {
      ex.transport_status = TransportStatus::kTimeout;
      ex.error = res.error.empty() ? "timeout" : res.error;
      retryable = true;
    } else if (res.outcome == HttpResponse::Outcome::kNetworkError) {
      ex.transport_status = TransportStatus::kHttpError;
      ex.error = res.error;
      retryable = true;
    } else if (res.status < 200 || res.status >= 300) {
      ex.transport_status = TransportStatus::kHttpError;
      ex.error = "HTTP " + std::to_string(res.status);
      retryable = res.status == 429 || res.status >= 500;
    } else if (auto text = parse_reply(cfg.kind, res.body); text && !text->empty()) {
      ex.transport_status = TransportStatus::kOk;
      ex.response_text = std::move(*text);
      ex.error.clear();
    } else {
      ex.transport_status = TransportStatus::kDecodeError;
      ex.error = "reply carried no text";
    }

    if (!retryable || attempt >= cfg.max_retries) break;
    provider.sleep(backoff);
    backoff *= 2;
  }
  ex.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  return ex;
}

inline Provider make_mock_provider(MockScript script, std::string name = "mock",
                                   Sleeper sleeper = real_sleep) {
  ProviderConfig cfg;
  cfg.name = std::move(name);
  cfg.kind = ProviderKind::kMock;
  cfg.endpoint = "mock://local";
  cfg.model_id = "mock-1";
  cfg.timeout = std::chrono::milliseconds(1000);
  return Provider(std::move(cfg), std::make_shared<MockTransport>(std::move(script)),
                  std::move(sleeper));
}

inline Provider make_mock_provider(std::map<std::string, std::string> exact,
                                   std::string name = "mock") {
  MockScript s;
  s.exact = std::move(exact);
  return make_mock_provider(std::move(s), std::move(name));
}

inline Provider make_http_provider(ProviderConfig cfg) {
  return Provider(std::move(cfg), std::make_shared<HttpTransport>());
}

/// Provider slots configured from the environment: "chatgpt" and "gemini".
/// HGP_{OPENAI,GEMINI}_API_KEY hold credentials; *_ENDPOINT and *_MODEL
/// override the defaults.
inline std::vector<ProviderConfig> provider_configs_from_env() {
  const auto env = [](const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    return std::string(v && *v ? v : fallback);
  };
  ProviderConfig openai;
  openai.name = "chatgpt";
  openai.kind = ProviderKind::kOpenAiChat;
  openai.endpoint = env("HGP_OPENAI_ENDPOINT", "https://api.openai.com/v1/chat/completions");
  openai.credential_env = "HGP_OPENAI_API_KEY";
  openai.model_id = env("HGP_OPENAI_MODEL", "gpt-4o");

  ProviderConfig gemini;
  gemini.name = "gemini";
  gemini.kind = ProviderKind::kGemini;
  gemini.endpoint = env("HGP_GEMINI_ENDPOINT",
                        "https://generativelanguage.googleapis.com/v1beta/models/"
                        "{model}:generateContent");
  gemini.credential_env = "HGP_GEMINI_API_KEY";
  gemini.model_id = env("HGP_GEMINI_MODEL", "gemini-1.5-flash");
  return {openai, gemini};
}

}  // namespace hgp
