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
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "hgp/homoglyph_db.hpp"
#include "hgp/perturb.hpp"
#include "hgp/utf8.hpp"

namespace hgp::testing {

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(HGP_SOURCE_DIR) / rel;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string fixture(const std::string& rel) { return read_bytes(source_path(rel)); }

inline nlohmann::json golden(const std::string& name) {
  return nlohmann::json::parse(fixture("tests/data/golden/" + name));
}

inline const HomoglyphDatabase& sample_db() {
  static const HomoglyphDatabase db = parse_homoglyph_file(
      fixture("data/homoglyphs/digits_and_letters.txt"), DbFormat::kGroupLines);
  return db;
}

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hgp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

// Seeded so failures reproduce.
inline std::mt19937_64 make_rng(std::uint64_t salt = 0) {
  return std::mt19937_64(0x5eed'0000ULL + salt);
}

// Random text mixing grouped codepoints, plain ASCII and ungrouped non-ASCII
// (including astral) scalars.
inline std::string random_text(std::mt19937_64& rng, const HomoglyphDatabase& db,
                               std::size_t max_len = 120) {
  static const std::vector<CodePoint> extra = {
      CodePoint(' '), CodePoint('q'), CodePoint('+'), CodePoint('$'), CodePoint(0xE9),
      CodePoint(0x2192), CodePoint(0x1F600), CodePoint(0x2211), CodePoint('\n')};
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> kind(0, 2);
  Text t(len(rng), CodePoint(' '));
  for (auto& c : t) {
    switch (kind(rng)) {
      case 0: {
        const auto& g = db.groups()[rng() % db.groups().size()];
        c = g.members[rng() % g.members.size()];
        break;
      }
      case 1:
        c = CodePoint(static_cast<std::uint32_t>(0x20 + rng() % 0x5F));
        break;
      default:
        c = extra[rng() % extra.size()];
    }
  }
  return utf8::encode(t);
}

// A valid plan: a random subset of grouped positions, each swapped for a
// different member of its group.
inline PerturbationPlan random_plan(std::mt19937_64& rng, const HomoglyphDatabase& db,
                                    const std::string& text) {
  const Text t = utf8::decode(text);
  std::vector<Edit> edits;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const HomoglyphGroup* g = db.find_group(t[i]);
    if (!g || rng() % 3 != 0) continue;
    CodePoint r = t[i];
    while (r == t[i]) r = g->members[rng() % g->members.size()];
    edits.push_back({i, t[i], r});
  }
  std::shuffle(edits.begin(), edits.end(), rng);  // make_plan must sort
  return make_plan(text, std::move(edits));
}

}  // namespace hgp::testing
