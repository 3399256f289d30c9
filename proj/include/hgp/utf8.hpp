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
#include <cstdint>
#include <string>
#include <string_view>

#include "hgp/codepoint.hpp"
#include "hgp/error.hpp"

namespace hgp::utf8 {

namespace detail {

// Decodes one scalar starting at `i`; returns 0 bytes consumed on any
// malformation (overlong forms, surrogates, truncation, > U+10FFFF).
inline std::size_t decode_one(std::string_view s, std::size_t i,
                              std::uint32_t& out) noexcept {
  const auto byte = [&](std::size_t k) {
    return static_cast<unsigned char>(s[k]);
  };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    out = b0;
    return 1;
  }
  std::size_t len;
  std::uint32_t cp;
  std::uint32_t min;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07, min = 0x10000;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const unsigned char b = byte(i + k);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || !CodePoint::is_scalar(cp)) return 0;
  out = cp;
  return len;
}

}  // namespace detail

/// Byte offset of the first malformed sequence, or npos when `s` is valid.
inline std::size_t find_invalid(std::string_view s) noexcept {
  std::size_t i = 0;
  while (i < s.size()) {
    std::uint32_t cp;
    const std::size_t n = detail::decode_one(s, i, cp);
    if (n == 0) return i;
    i += n;
  }
  return std::string_view::npos;
}

inline bool is_valid(std::string_view s) noexcept {
  return find_invalid(s) == std::string_view::npos;
}

/// Strict decode. Throws DecodeError naming the byte offset.
inline Text decode(std::string_view s) {
  Text out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::uint32_t cp;
    const std::size_t n = detail::decode_one(s, i, cp);
    if (n == 0) {
      throw Error(ErrorCode::kDecodeError,
                  "invalid UTF-8 at byte offset " + std::to_string(i),
                  {{"offset", i}});
    }
    out.emplace_back(cp);
    i += n;
  }
  return out;
}

inline void append(std::string& out, CodePoint c) {
  const std::uint32_t v = c.value();
  if (v < 0x80) {
    out.push_back(static_cast<char>(v));
  } else if (v < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (v >> 6)));
    out.push_back(static_cast<char>(0x80 | (v & 0x3F)));
  } else if (v < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (v >> 12)));
    out.push_back(static_cast<char>(0x80 | ((v >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (v & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (v >> 18)));
    out.push_back(static_cast<char>(0x80 | ((v >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((v >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (v & 0x3F)));
  }
}

inline std::string encode(CodePoint c) {
  std::string out;
  append(out, c);
  return out;
}

template <typename Range>
std::string encode(const Range& scalars) {
  std::string out;
  out.reserve(scalars.size());
  for (CodePoint c : scalars) append(out, c);
  return out;
}

/// Number of scalars in valid UTF-8.
inline std::size_t length(std::string_view s) { return decode(s).size(); }

/// First `max_scalars` scalars of `s`, never splitting a sequence. Stops
/// early at the first malformed byte.
inline std::string_view truncate(std::string_view s, std::size_t max_scalars) noexcept {
  std::size_t i = 0;
  for (std::size_t taken = 0; taken < max_scalars && i < s.size(); ++taken) {
    std::uint32_t cp;
    const std::size_t n = detail::decode_one(s, i, cp);
    if (n == 0) break;
    i += n;
  }
  return s.substr(0, i);
}

}  // namespace hgp::utf8
