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
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace hgp {

enum class TransportStatus { kOk, kTimeout, kHttpError, kDecodeError };

inline std::string_view to_string(TransportStatus s) {
  switch (s) {
    case TransportStatus::kOk: return "ok";
    case TransportStatus::kTimeout: return "timeout";
    case TransportStatus::kHttpError: return "http_error";
    case TransportStatus::kDecodeError: return "decode_error";
  }
  return "http_error";
}

inline std::optional<TransportStatus> parse_transport_status(std::string_view s) {
  if (s == "ok") return TransportStatus::kOk;
  if (s == "timeout") return TransportStatus::kTimeout;
  if (s == "http_error") return TransportStatus::kHttpError;
  if (s == "decode_error") return TransportStatus::kDecodeError;
  return std::nullopt;
}

/// One prompt and what came back. response_text is empty iff status != ok.
struct Exchange {
  std::string prompt;
  std::string response_text;
  std::string provider;
  std::string model_id;
  std::chrono::milliseconds latency{0};
  TransportStatus transport_status = TransportStatus::kOk;
  std::string error;  // transport diagnostic when status != ok
  int attempts = 1;
};

inline nlohmann::ordered_json to_json(const Exchange& e) {
  return {{"prompt", e.prompt},
          {"response_text", e.response_text},
          {"provider", e.provider},
          {"model_id", e.model_id},
          {"latency_ms", e.latency.count()},
          {"transport_status", to_string(e.transport_status)},
          {"error", e.error},
          {"attempts", e.attempts}};
}

inline Exchange exchange_from_json(const nlohmann::json& j) {
  Exchange e;
  e.prompt = j.at("prompt").get<std::string>();
  e.response_text = j.value("response_text", std::string{});
  e.provider = j.value("provider", std::string{});
  e.model_id = j.value("model_id", std::string{});
  e.latency = std::chrono::milliseconds(j.value("latency_ms", 0LL));
  e.transport_status =
      parse_transport_status(j.value("transport_status", std::string("ok")))
          .value_or(TransportStatus::kHttpError);
  e.error = j.value("error", std::string{});
  e.attempts = j.value("attempts", 1);
  return e;
}

}  // namespace hgp
