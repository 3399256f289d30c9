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
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgp/error.hpp"

namespace hgp {

/// min/max/mean/std over one numeric sample. std is the population standard
/// deviation (divide by n).
struct SummaryStats {
  std::size_t n = 0;
  double min = 0;
  double max = 0;
  double mean = 0;
  double std = 0;

  friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

/// Single pass (Welford) so that long samples stay accurate. Throws
/// EmptySample.
inline SummaryStats summarize(std::span<const double> sample) {
  if (sample.empty()) {
    throw Error(ErrorCode::kEmptySample, "cannot summarize an empty sample");
  }
  SummaryStats s;
  s.min = s.max = sample.front();
  double mean = 0;
  double m2 = 0;
  std::size_t n = 0;
  for (double x : sample) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
    if (x < s.min) s.min = x;
    if (x > s.max) s.max = x;
  }
  s.n = n;
  s.mean = mean;
  // Clamp rounding into [min, max] so the invariant min <= mean <= max holds.
  if (s.mean < s.min) s.mean = s.min;
  if (s.mean > s.max) s.mean = s.max;
  s.std = std::sqrt(std::max(0.0, m2 / static_cast<double>(n)));
  return s;
}

template <typename Number>
SummaryStats summarize_counts(const std::vector<Number>& sample) {
  std::vector<double> values(sample.begin(), sample.end());
  return summarize(values);
}

inline nlohmann::ordered_json to_json(const SummaryStats& s) {
  return {{"n", s.n}, {"min", s.min}, {"max", s.max}, {"mean", s.mean},
          {"std", s.std}};
}

// Summary numbers published for a study whose raw sample is unavailable.
// They are rendered as-is and never recomputed; n may be unknown.
struct ReferenceStats {
  std::string label;
  std::string model;
  std::optional<std::size_t> n;
  double min = 0;
  double max = 0;
  double mean = 0;
  double std = 0;
};

inline std::vector<ReferenceStats> parse_reference_stats(const nlohmann::json& doc) {
  std::vector<ReferenceStats> out;
  for (const auto& rec : doc.at("records")) {
    ReferenceStats r;
    r.label = rec.at("label").get<std::string>();
    r.model = rec.value("model", std::string{});
    if (rec.contains("n") && !rec["n"].is_null()) r.n = rec["n"].get<std::size_t>();
    r.min = rec.at("min").get<double>();
    r.max = rec.at("max").get<double>();
    r.mean = rec.at("mean").get<double>();
    r.std = rec.at("std").get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace hgp
