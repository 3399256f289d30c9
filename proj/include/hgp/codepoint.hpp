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

#include <charconv>
#include <compare>
#include <optional>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/uchar.h>

#include "hgp/error.hpp"

namespace hgp {

/// A Unicode scalar value: any code point up to U+10FFFF except surrogates.
class CodePoint {
 public:
  static constexpr std::uint32_t kMax = 0x10FFFF;

  static constexpr bool is_scalar(std::uint32_t v) noexcept {
    return v <= kMax && !(v >= 0xD800 && v <= 0xDFFF);
  }

  // Throws InvalidArgument for surrogates and values past U+10FFFF.
  explicit constexpr CodePoint(std::uint32_t value) : value_(value) {
    if (!is_scalar(value)) {
      throw Error(ErrorCode::kInvalidArgument, "not a Unicode scalar value");
    }
  }

  constexpr std::uint32_t value() const noexcept { return value_; }
  constexpr bool is_ascii() const noexcept { return value_ < 0x80; }
  constexpr bool is_ascii_digit() const noexcept {
    return value_ >= '0' && value_ <= '9';
  }
  constexpr bool is_ascii_alpha() const noexcept {
    return (value_ >= 'a' && value_ <= 'z') || (value_ >= 'A' && value_ <= 'Z');
  }

  friend constexpr auto operator<=>(CodePoint, CodePoint) = default;

 private:
  std::uint32_t value_;
};

using Text = std::vector<CodePoint>;

/// Uppercase hex without prefix, at least four digits: U+0037 -> "0037".
inline std::string to_hex(CodePoint c) {
  char buf[8];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, c.value(), 16);
  std::string digits(buf, end);
  for (char& ch : digits) {
    if (ch >= 'a' && ch <= 'f') ch = static_cast<char>(ch - 'a' + 'A');
  }
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return digits;
}

// Strict parse: 1-6 uppercase hex digits, no prefix, no whitespace.
inline std::optional<CodePoint> parse_hex(std::string_view token) {
  if (token.empty() || token.size() > 6) return std::nullopt;
  std::uint32_t value = 0;
  for (char ch : token) {
    std::uint32_t digit;
    if (ch >= '0' && ch <= '9') {
      digit = static_cast<std::uint32_t>(ch - '0');
    } else if (ch >= 'A' && ch <= 'F') {
      digit = static_cast<std::uint32_t>(ch - 'A' + 10);
    } else {
      return std::nullopt;
    }
    value = value * 16 + digit;
  }
  if (!CodePoint::is_scalar(value)) return std::nullopt;
  return CodePoint(value);
}

// Lenient variant for user-facing input (CLI arguments, URL path segments):
// accepts lowercase and an optional "U+" prefix.
inline std::optional<CodePoint> parse_hex_lenient(std::string_view token) {
  if (token.size() > 2 && (token[0] == 'U' || token[0] == 'u') &&
      token[1] == '+') {
    token.remove_prefix(2);
  }
  std::string upper(token);
  for (char& ch : upper) {
    if (ch >= 'a' && ch <= 'f') ch = static_cast<char>(ch - 'a' + 'A');
  }
  return parse_hex(upper);
}

// Printable means assigned and not in general category C (Cc, Cf, Cs, Co, Cn).
inline bool is_printable(CodePoint c) {
  return u_isprint(static_cast<UChar32>(c.value())) != 0;
}

}  // namespace hgp
