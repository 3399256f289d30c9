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

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hgp/codepoint.hpp"
#include "hgp/utf8.hpp"

namespace hgp {

// Scanner that decides, per decimal digit, whether perturbing it changes the
// mathematics of the question (arithmetic) or only an alphabet symbol
// (symbolic). A digit run is arithmetic when any of these hold:
//   unit      followed, past spaces and one hyphen, by a unit-like word
//             ("8-gallon", "5 gallons")
//   operator  nearest non-space neighbour is + - − * / = × ÷ or a fraction
//             slash, or the run is the base of a power with a numeric exponent
//   variable  immediately followed by a single-letter variable ("7x", "2n")
//   exponent  directly after '^' or inside "^{...}"
// A digit that is only the base of "0^n"-style repetition is symbolic.
// Runs glued to a preceding letter ("CS101", "x1") are names or indices, not
// quantities, and are reported as `other` whatever follows them.

enum class TargetRole { kArithmetic, kSymbolic, kOther };

inline std::string_view to_string(TargetRole r) {
  switch (r) {
    case TargetRole::kArithmetic: return "arithmetic";
    case TargetRole::kSymbolic: return "symbolic";
    case TargetRole::kOther: return "other";
  }
  return "other";
}

struct TargetSuggestion {
  std::size_t position = 0;
  CodePoint codepoint{0};
  TargetRole role = TargetRole::kSymbolic;
  std::string rationale;
};

inline nlohmann::ordered_json to_json(const TargetSuggestion& s) {
  return {{"position", s.position},
          {"codepoint", to_hex(s.codepoint)},
          {"char", utf8::encode(s.codepoint)},
          {"role", to_string(s.role)},
          {"rationale", s.rationale}};
}

namespace detail {

inline bool is_space(CodePoint c) {
  const auto v = c.value();
  return v == ' ' || v == '\t' || v == '\n' || v == '\r' || v == 0xA0;
}

inline bool is_arith_operator(CodePoint c) {
  switch (c.value()) {
    case '+': case '-': case '*': case '/': case '=':
    case 0x2212:  // minus sign
    case 0x2044:  // fraction slash
    case 0x2215:  // division slash
    case 0x00D7:  // multiplication sign
    case 0x00F7:  // division sign
      return true;
    default:
      return false;
  }
}

inline bool is_hyphen(CodePoint c) {
  const auto v = c.value();
  return v == '-' || v == 0x2010 || v == 0x2011;
}

// Words that follow a number without making it a quantity.
inline bool is_function_word(std::string_view w) {
  static constexpr std::array<std::string_view, 52> kWords = {
      "and", "or", "of", "the", "to", "in", "is", "are", "be", "by",
      "for", "with", "as", "at", "on", "if", "then", "that", "than", "from",
      "into", "it", "its", "we", "you", "not", "no", "so", "st", "nd",
      "rd", "th", "where", "when", "was", "were", "has", "have", "had", "can",
      "will", "there", "now", "but", "also", "which", "who", "this", "these", "those",
      "about", "roughly"};
  std::string lower(w);
  for (char& ch : lower) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return std::find(kWords.begin(), kWords.end(), lower) != kWords.end();
}

inline std::string ascii(const Text& t, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) out += utf8::encode(t[i]);
  return out;
}

inline bool in_superscript_braces(const Text& t, std::size_t start) {
  int depth = 0;
  for (std::size_t i = start; i-- > 0;) {
    const auto v = t[i].value();
    if (v == '}') {
      ++depth;
    } else if (v == '{') {
      if (depth == 0) return i > 0 && t[i - 1].value() == '^';
      --depth;
    }
  }
  return false;
}

}  // namespace detail

/// One suggestion per ASCII decimal digit: arithmetic roles first, then
/// symbolic, then other; each group in text order.
inline std::vector<TargetSuggestion> suggest_targets(const Text& t) {
  using detail::is_space;
  std::vector<TargetSuggestion> arithmetic, symbolic, other;
  const std::size_t n = t.size();

  std::size_t i = 0;
  while (i < n) {
    if (!t[i].is_ascii_digit()) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < n) {
      if (t[end].is_ascii_digit()) {
        ++end;
      } else if (t[end].value() == '.' && end + 1 < n &&
                 t[end + 1].is_ascii_digit()) {
        end += 2;
      } else {
        break;
      }
    }

    std::vector<std::string> reasons;

    // unit: skip spaces, at most one hyphen, spaces, then a word.
    {
      std::size_t k = end;
      while (k < n && is_space(t[k])) ++k;
      if (k < n && detail::is_hyphen(t[k])) ++k;
      while (k < n && is_space(t[k])) ++k;
      std::size_t w = k;
      while (w < n && t[w].is_ascii_alpha()) ++w;
      if (w - k >= 2) {
        const std::string word = detail::ascii(t, k, w);
        if (!detail::is_function_word(word)) {
          reasons.push_back("followed by unit word '" + word + "'");
        }
      }
    }

    // operator: nearest non-space neighbours.
    {
      std::size_t p = i;
      while (p > 0 && is_space(t[p - 1])) --p;
      std::size_t q = end;
      while (q < n && is_space(t[q])) ++q;
      if (p > 0 && detail::is_arith_operator(t[p - 1])) {
        reasons.push_back("adjacent to operator '" + utf8::encode(t[p - 1]) + "'");
      } else if (q < n && detail::is_arith_operator(t[q]) &&
                 !(t[q].value() == '-' && q + 2 < n && t[q + 1].is_ascii_alpha() &&
                   t[q + 2].is_ascii_alpha())) {
        // "8-gallon" is a compound word, not a subtraction; "2-x" still is.
        reasons.push_back("adjacent to operator '" + utf8::encode(t[q]) + "'");
      } else if (end < n && t[end].value() == '^') {
        // Numeric power ("3^4"). A letter exponent ("0^n") is repetition of
        // an alphabet symbol, not arithmetic.
        std::size_t e = end + 1;
        const bool braced = e < n && t[e].value() == '{';
        if (braced) ++e;
        const std::size_t digits_from = e;
        while (e < n && t[e].is_ascii_digit()) ++e;
        const bool numeric = e > digits_from &&
                             (!braced || (e < n && t[e].value() == '}'));
        if (numeric && (braced || e >= n || !t[e].is_ascii_alpha())) {
          reasons.push_back("base of a numeric power");
        }
      }
    }

    // variable: a single letter glued to the run.
    if (end < n && t[end].is_ascii_alpha() &&
        (end + 1 >= n || !t[end + 1].is_ascii_alpha())) {
      reasons.push_back("coefficient of variable '" + utf8::encode(t[end]) + "'");
    }

    // exponent
    {
      std::size_t p = i;
      while (p > 0 && is_space(t[p - 1])) --p;
      if ((p > 0 && t[p - 1].value() == '^') ||
          detail::in_superscript_braces(t, i)) {
        reasons.push_back("in exponent position");
      }
    }

    TargetRole role;
    std::string rationale;
    if (i > 0 && t[i - 1].is_ascii_alpha()) {
      role = TargetRole::kOther;
      std::size_t w = i;
      while (w > 0 && t[w - 1].is_ascii_alpha()) --w;
      rationale = "part of identifier '" + detail::ascii(t, w, end) + "'";
    } else if (!reasons.empty()) {
      role = TargetRole::kArithmetic;
      for (std::size_t r = 0; r < reasons.size(); ++r) {
        if (r) rationale += "; ";
        rationale += reasons[r];
      }
    } else {
      role = TargetRole::kSymbolic;
      rationale = "no arithmetic context; digit used as a symbol";
    }

    auto& bucket = role == TargetRole::kArithmetic ? arithmetic
                   : role == TargetRole::kSymbolic ? symbolic
                                                   : other;
    for (std::size_t k = i; k < end; ++k) {
      if (t[k].is_ascii_digit()) bucket.push_back({k, t[k], role, rationale});
    }
    i = end;
  }

  arithmetic.insert(arithmetic.end(), symbolic.begin(), symbolic.end());
  arithmetic.insert(arithmetic.end(), other.begin(), other.end());
  return arithmetic;
}

inline std::vector<TargetSuggestion> suggest_targets(std::string_view text) {
  return suggest_targets(utf8::decode(text));
}

}  // namespace hgp
