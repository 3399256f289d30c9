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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hgp/codepoint.hpp"
#include "hgp/error.hpp"
#include "hgp/hash.hpp"
#include "hgp/homoglyph_db.hpp"
#include "hgp/utf8.hpp"

namespace hgp {

struct Edit {
  std::size_t position = 0;  // scalar index into the source text
  CodePoint original{0};
  CodePoint replacement{0};

  friend bool operator==(const Edit&, const Edit&) = default;
};

/// Position-bound substitutions against one exact source text, identified by
/// its content hash.
struct PerturbationPlan {
  std::string source_hash;
  std::vector<Edit> edits;

  friend bool operator==(const PerturbationPlan&, const PerturbationPlan&) = default;
};

/// Sorts edits by position and binds them to `source`.
inline PerturbationPlan make_plan(std::string_view source, std::vector<Edit> edits) {
  std::sort(edits.begin(), edits.end(),
            [](const Edit& a, const Edit& b) { return a.position < b.position; });
  return {content_hash(source), std::move(edits)};
}

enum class PlanRule {
  kHashMismatch,
  kOrdering,
  kOutOfRange,
  kOriginalMismatch,
  kIdentityEdit,
  kNotSameGroup,
};

inline std::string_view to_string(PlanRule r) {
  switch (r) {
    case PlanRule::kHashMismatch: return "hash_mismatch";
    case PlanRule::kOrdering: return "ordering";
    case PlanRule::kOutOfRange: return "out_of_range";
    case PlanRule::kOriginalMismatch: return "original_mismatch";
    case PlanRule::kIdentityEdit: return "identity_edit";
    case PlanRule::kNotSameGroup: return "not_same_group";
  }
  return "unknown";
}

struct Violation {
  PlanRule rule;
  std::optional<std::size_t> edit_index;
  std::optional<std::size_t> position;
  std::string message;
};

inline nlohmann::ordered_json to_json(const Violation& v) {
  nlohmann::ordered_json j;
  j["rule"] = to_string(v.rule);
  j["edit_index"] = v.edit_index ? nlohmann::ordered_json(*v.edit_index) : nullptr;
  j["position"] = v.position ? nlohmann::ordered_json(*v.position) : nullptr;
  j["message"] = v.message;
  return j;
}

/// Everything that would make apply_plan fail. Empty means it will succeed.
inline std::vector<Violation> validate_plan(const HomoglyphDatabase& db,
                                            std::string_view text,
                                            const PerturbationPlan& plan) {
  std::vector<Violation> out;
  if (plan.source_hash != content_hash(text)) {
    out.push_back({PlanRule::kHashMismatch, std::nullopt, std::nullopt,
                   "plan was built for a different source text"});
  }
  const Text scalars = utf8::decode(text);
  for (std::size_t i = 0; i < plan.edits.size(); ++i) {
    const Edit& e = plan.edits[i];
    const std::string at = "edit " + std::to_string(i) + " at position " +
                           std::to_string(e.position);
    if (i > 0 && e.position <= plan.edits[i - 1].position) {
      out.push_back({PlanRule::kOrdering, i, e.position,
                     at + ": positions must be strictly increasing"});
    }
    if (e.position >= scalars.size()) {
      out.push_back({PlanRule::kOutOfRange, i, e.position,
                     at + ": past end of text (" +
                         std::to_string(scalars.size()) + " scalars)"});
    } else if (scalars[e.position] != e.original) {
      out.push_back({PlanRule::kOriginalMismatch, i, e.position,
                     at + ": text holds U+" + to_hex(scalars[e.position]) +
                         ", plan expects U+" + to_hex(e.original)});
    }
    if (e.original == e.replacement) {
      out.push_back({PlanRule::kIdentityEdit, i, e.position,
                     at + ": replacement equals original"});
    } else if (!db.same_group(e.original, e.replacement)) {
      out.push_back({PlanRule::kNotSameGroup, i, e.position,
                     at + ": U+" + to_hex(e.replacement) +
                         " is not a homoglyph of U+" + to_hex(e.original)});
    }
  }
  return out;
}

inline nlohmann::ordered_json to_json(const std::vector<Violation>& report) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& v : report) arr.push_back(to_json(v));
  return arr;
}

/// Applies the plan. Throws HashMismatch, or InvalidEdit carrying the first
/// offending position (detail.position) and the full report (detail.violations).
inline std::string apply_plan(const HomoglyphDatabase& db, std::string_view text,
                              const PerturbationPlan& plan) {
  const auto report = validate_plan(db, text, plan);
  if (!report.empty()) {
    const Violation& first = report.front();
    if (first.rule == PlanRule::kHashMismatch) {
      throw Error(ErrorCode::kHashMismatch, first.message,
                  {{"violations", to_json(report)}});
    }
    throw Error(ErrorCode::kInvalidEdit, first.message,
                {{"position", *first.position}, {"violations", to_json(report)}});
  }
  Text scalars = utf8::decode(text);
  for (const Edit& e : plan.edits) scalars[e.position] = e.replacement;
  return utf8::encode(scalars);
}

/// Number of scalar positions where the two texts differ. Throws
/// LengthMismatch when their scalar lengths differ.
inline std::size_t count_perturbed_chars(std::string_view original,
                                         std::string_view perturbed) {
  const Text a = utf8::decode(original);
  const Text b = utf8::decode(perturbed);
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "texts differ in length (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + " scalars)");
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

/// The plan that takes `perturbed` back to the plan's source text.
inline PerturbationPlan invert_plan(const PerturbationPlan& plan,
                                    std::string_view perturbed) {
  PerturbationPlan inv{content_hash(perturbed), {}};
  inv.edits.reserve(plan.edits.size());
  for (const Edit& e : plan.edits) {
    inv.edits.push_back({e.position, e.replacement, e.original});
  }
  return inv;
}

// Plan files are JSON objects. The first field names the hash algorithm so a
// reader can refuse plans it cannot verify:
//   {"hash_algorithm":"sha256","source_hash":"...",
//    "edits":[{"position":0,"original":"0037","replacement":"1D7D5"}]}
inline nlohmann::ordered_json to_json(const PerturbationPlan& plan) {
  nlohmann::ordered_json j;
  j["hash_algorithm"] = kHashAlgorithm;
  j["source_hash"] = plan.source_hash;
  j["edits"] = nlohmann::ordered_json::array();
  for (const Edit& e : plan.edits) {
    j["edits"].push_back({{"position", e.position},
                          {"original", to_hex(e.original)},
                          {"replacement", to_hex(e.replacement)}});
  }
  return j;
}

inline PerturbationPlan plan_from_json(const nlohmann::json& j) {
  const auto fail = [](const std::string& what) -> void {
    throw Error(ErrorCode::kInvalidArgument, "malformed plan: " + what);
  };
  if (!j.is_object()) fail("expected an object");
  if (j.value("hash_algorithm", std::string(kHashAlgorithm)) != kHashAlgorithm) {
    fail("unsupported hash algorithm");
  }
  if (!j.contains("source_hash") || !j["source_hash"].is_string()) {
    fail("missing source_hash");
  }
  PerturbationPlan plan;
  plan.source_hash = j["source_hash"].get<std::string>();
  if (j.contains("edits")) {
    if (!j["edits"].is_array()) fail("edits must be an array");
    for (const auto& e : j["edits"]) {
      if (!e.is_object() || !e.contains("position") ||
          !e["position"].is_number_unsigned() || !e.contains("original") ||
          !e["original"].is_string() || !e.contains("replacement") ||
          !e["replacement"].is_string()) {
        fail("edit needs position, original and replacement");
      }
      auto orig = parse_hex(e["original"].get<std::string>());
      auto repl = parse_hex(e["replacement"].get<std::string>());
      if (!orig || !repl) fail("edit codepoints must be uppercase hex");
      plan.edits.push_back({e["position"].get<std::size_t>(), *orig, *repl});
    }
  }
  return plan;
}

inline PerturbationPlan parse_plan(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed plan: ") + e.what());
  }
  return plan_from_json(j);
}

}  // namespace hgp
