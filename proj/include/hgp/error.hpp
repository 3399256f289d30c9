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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace hgp {

// Closed set of failure codes. The HTTP layer publishes these names verbatim
// as ApiError.code, so renaming one is a wire-format change.
enum class ErrorCode {
  kDecodeError,
  kSyntaxError,
  kEmptyDatabase,
  kHashMismatch,
  kInvalidEdit,
  kLengthMismatch,
  kVariableNotFound,
  kAmbiguousVariable,
  kPhraseNotFound,
  kInvalidArgument,
  kEmptyCorpus,
  kEmptySample,
  kUnprintable,
  kConfigError,
  kSequenceError,
  kIntegrityError,
  kNoFooledAttempts,
  kNoDatabase,
  kNotFound,
  kPayloadTooLarge,
  kIoError,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDecodeError: return "DecodeError";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kEmptyDatabase: return "EmptyDatabase";
    case ErrorCode::kHashMismatch: return "HashMismatch";
    case ErrorCode::kInvalidEdit: return "InvalidEdit";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kVariableNotFound: return "VariableNotFound";
    case ErrorCode::kAmbiguousVariable: return "AmbiguousVariable";
    case ErrorCode::kPhraseNotFound: return "PhraseNotFound";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kUnprintable: return "Unprintable";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kSequenceError: return "SequenceError";
    case ErrorCode::kIntegrityError: return "IntegrityError";
    case ErrorCode::kNoFooledAttempts: return "NoFooledAttempts";
    case ErrorCode::kNoDatabase: return "NoDatabase";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kPayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

// Every failure raised by the library. `detail` carries structured context
// (line numbers, offending positions, missing phrases) for the JSON API.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        nlohmann::json detail = nullptr)
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

  std::optional<std::size_t> line() const {
    if (detail_.is_object() && detail_.contains("line")) {
      return detail_["line"].get<std::size_t>();
    }
    return std::nullopt;
  }

  std::optional<std::size_t> position() const {
    if (detail_.is_object() && detail_.contains("position")) {
      return detail_["position"].get<std::size_t>();
    }
    return std::nullopt;
  }

 private:
  ErrorCode code_;
  nlohmann::json detail_;
};

}  // namespace hgp
