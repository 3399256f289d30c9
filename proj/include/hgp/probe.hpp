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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hgp/codepoint.hpp"
#include "hgp/error.hpp"
#include "hgp/exchange.hpp"
#include "hgp/homoglyph_db.hpp"
#include "hgp/utf8.hpp"

namespace hgp {

enum class ProbeVerdict { kRecognized, kUnrecognized, kUnclear };
enum class VerdictSource { kHuman, kAuto };

inline std::string_view to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::kRecognized: return "recognized";
    case ProbeVerdict::kUnrecognized: return "unrecognized";
    case ProbeVerdict::kUnclear: return "unclear";
  }
  return "unclear";
}

inline std::optional<ProbeVerdict> parse_probe_verdict(std::string_view s) {
  if (s == "recognized") return ProbeVerdict::kRecognized;
  if (s == "unrecognized") return ProbeVerdict::kUnrecognized;
  if (s == "unclear") return ProbeVerdict::kUnclear;
  return std::nullopt;
}

inline std::string_view to_string(VerdictSource s) {
  return s == VerdictSource::kHuman ? "human" : "auto";
}

// Replies are stored as excerpts of at most this many scalars.
inline constexpr std::size_t kExcerptScalars = 500;

struct ProbeResult {
  CodePoint codepoint{0};
  std::string model;
  std::string prompt;
  std::string response_excerpt;
  ProbeVerdict verdict = ProbeVerdict::kUnclear;
  VerdictSource verdict_source = VerdictSource::kHuman;
  TransportStatus transport_status = TransportStatus::kOk;
  std::string timestamp;
};

inline nlohmann::ordered_json to_json(const ProbeResult& r) {
  return {{"codepoint", to_hex(r.codepoint)},
          {"model", r.model},
          {"prompt", r.prompt},
          {"response_excerpt", r.response_excerpt},
          {"verdict", to_string(r.verdict)},
          {"verdict_source", to_string(r.verdict_source)},
          {"transport_status", to_string(r.transport_status)},
          {"timestamp", r.timestamp}};
}

inline ProbeResult probe_result_from_json(const nlohmann::json& j) {
  const auto fail = [](const std::string& what) {
    return Error(ErrorCode::kInvalidArgument, "malformed probe record: " + what);
  };
  ProbeResult r;
  auto cp = parse_hex(j.at("codepoint").get<std::string>());
  if (!cp) throw fail("codepoint");
  r.codepoint = *cp;
  r.model = j.at("model").get<std::string>();
  if (r.model.empty()) throw fail("empty model");
  r.prompt = j.value("prompt", std::string{});
  r.response_excerpt = j.value("response_excerpt", std::string{});
  auto verdict = parse_probe_verdict(j.at("verdict").get<std::string>());
  if (!verdict) throw fail("verdict");
  r.verdict = *verdict;
  r.verdict_source = j.value("verdict_source", std::string("human")) == "auto"
                         ? VerdictSource::kAuto
                         : VerdictSource::kHuman;
  r.transport_status =
      parse_transport_status(j.value("transport_status", std::string("ok")))
          .value_or(TransportStatus::kHttpError);
  r.timestamp = j.value("timestamp", std::string{});
  return r;
}

/// "What is <c>?" with c inserted verbatim. Throws Unprintable for control,
/// format, private-use and unassigned codepoints.
inline std::string make_probe_prompt(CodePoint c) {
  if (!is_printable(c)) {
    throw Error(ErrorCode::kUnprintable, "U+" + to_hex(c) + " is not printable",
                {{"codepoint", to_hex(c)}});
  }
  return "What is " + utf8::encode(c) + "?";
}

/// Optional auto-rule: a reply that names the canonical digit ("7" or
/// "seven") counts as recognized. Returns nullopt when the rule does not
/// apply; the verdict is then left to a human.
inline std::optional<ProbeVerdict> auto_verdict(std::string_view response,
                                                CodePoint canonical) {
  if (!canonical.is_ascii_digit()) return std::nullopt;
  static constexpr std::array<std::string_view, 10> kNames = {
      "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"};
  const char digit = static_cast<char>(canonical.value());
  const auto is_alnum = [](char ch) {
    return (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z');
  };
  // A standalone digit only; "U+1D7D5" does not name 7.
  for (std::size_t pos = response.find(digit); pos != std::string_view::npos;
       pos = response.find(digit, pos + 1)) {
    const bool left = pos == 0 || !is_alnum(response[pos - 1]);
    const bool right = pos + 1 >= response.size() || !is_alnum(response[pos + 1]);
    if (left && right) return ProbeVerdict::kRecognized;
  }

  std::string lower(response);
  for (char& ch : lower) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  const std::string_view name = kNames[canonical.value() - '0'];
  const auto is_letter = [](char ch) { return ch >= 'a' && ch <= 'z'; };
  for (std::size_t pos = lower.find(name); pos != std::string::npos;
       pos = lower.find(name, pos + 1)) {
    const bool left = pos == 0 || !is_letter(lower[pos - 1]);
    const bool right = pos + name.size() >= lower.size() ||
                       !is_letter(lower[pos + name.size()]);
    if (left && right) return ProbeVerdict::kRecognized;
  }
  return std::nullopt;
}

/// Append-only record of probe outcomes. The latest result for a
/// (codepoint, model) pair wins; earlier ones are kept.
class ProbeLedger {
 public:
  void record(ProbeResult r) {
    if (r.model.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "probe model name is empty");
    }
    latest_[{r.codepoint.value(), r.model}] = results_.size();
    results_.push_back(std::move(r));
  }

  const std::vector<ProbeResult>& results() const noexcept { return results_; }

  const ProbeResult* latest(CodePoint c, const std::string& model) const {
    auto it = latest_.find({c.value(), model});
    return it == latest_.end() ? nullptr : &results_[it->second];
  }

  // unclear verdicts read as unknown
  Recognizability recognizability(CodePoint c, const std::string& model) const {
    const ProbeResult* r = latest(c, model);
    if (!r) return Recognizability::kUnknown;
    switch (r->verdict) {
      case ProbeVerdict::kRecognized: return Recognizability::kRecognized;
      case ProbeVerdict::kUnrecognized: return Recognizability::kUnrecognized;
      case ProbeVerdict::kUnclear: return Recognizability::kUnknown;
    }
    return Recognizability::kUnknown;
  }

  std::map<std::string, Recognizability> recognizability(CodePoint c) const {
    std::map<std::string, Recognizability> out;
    for (const auto& [key, index] : latest_) {
      if (key.first == c.value()) out[key.second] = recognizability(c, key.second);
    }
    return out;
  }

 private:
  std::vector<ProbeResult> results_;
  std::map<std::pair<std::uint32_t, std::string>, std::size_t> latest_;
};

/// Instructor's readability ratings; unrated unless set.
class ReadabilityTable {
 public:
  void set(CodePoint c, Readability r) { ratings_[c.value()] = r; }

  Readability get(CodePoint c) const {
    auto it = ratings_.find(c.value());
    return it == ratings_.end() ? Readability::kUnrated : it->second;
  }

 private:
  std::map<std::uint32_t, Readability> ratings_;
};

inline GlyphAnnotation annotate(CodePoint c, const ReadabilityTable& readability,
                                const ProbeLedger& ledger) {
  return {c, readability.get(c), ledger.recognizability(c)};
}

/// Homoglyphs of c that a human can read (readable or marginal) and that
/// `model` failed to recognize. Readable glyphs first, then by codepoint.
inline std::vector<CodePoint> effective_candidates(const HomoglyphDatabase& db,
                                                   const ReadabilityTable& readability,
                                                   const ProbeLedger& ledger,
                                                   CodePoint c,
                                                   const std::string& model) {
  std::vector<CodePoint> out;
  for (CodePoint g : lookup_homoglyphs(db, c)) {
    const Readability r = readability.get(g);
    if (r != Readability::kReadable && r != Readability::kMarginal) continue;
    if (ledger.recognizability(g, model) != Recognizability::kUnrecognized) continue;
    out.push_back(g);
  }
  std::stable_sort(out.begin(), out.end(), [&](CodePoint a, CodePoint b) {
    const bool ra = readability.get(a) == Readability::kReadable;
    const bool rb = readability.get(b) == Readability::kReadable;
    if (ra != rb) return ra;
    return a < b;
  });
  return out;
}

}  // namespace hgp
