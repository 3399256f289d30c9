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
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hgp/codepoint.hpp"
#include "hgp/error.hpp"
#include "hgp/utf8.hpp"

namespace hgp {

enum class DbFormat { kGroupLines, kConfusables };

inline std::optional<DbFormat> parse_db_format(std::string_view name) {
  if (name == "group_lines") return DbFormat::kGroupLines;
  if (name == "confusables") return DbFormat::kConfusables;
  return std::nullopt;
}

inline std::string_view to_string(DbFormat f) {
  return f == DbFormat::kGroupLines ? "group_lines" : "confusables";
}

struct HomoglyphGroup {
  std::size_t id = 0;
  std::vector<CodePoint> members;  // first-appearance order in the source
  CodePoint canonical{0};
};

// What happened while reading a source file. Not part of the database's
// identity, but reported by the CLI and the upload endpoint.
struct ParseReport {
  std::size_t source_records = 0;   // accepted group lines / confusable rows
  std::size_t merged_groups = 0;    // final groups built from >= 2 records
  std::size_t skipped_rows = 0;     // multi-codepoint confusable rows
};

enum class Readability { kUnrated, kReadable, kMarginal, kUnreadable };
enum class Recognizability { kUnknown, kRecognized, kUnrecognized };

inline std::string_view to_string(Readability r) {
  switch (r) {
    case Readability::kUnrated: return "unrated";
    case Readability::kReadable: return "readable";
    case Readability::kMarginal: return "marginal";
    case Readability::kUnreadable: return "unreadable";
  }
  return "unrated";
}

inline std::optional<Readability> parse_readability(std::string_view s) {
  if (s == "unrated") return Readability::kUnrated;
  if (s == "readable") return Readability::kReadable;
  if (s == "marginal") return Readability::kMarginal;
  if (s == "unreadable") return Readability::kUnreadable;
  return std::nullopt;
}

inline std::string_view to_string(Recognizability r) {
  switch (r) {
    case Recognizability::kUnknown: return "unknown";
    case Recognizability::kRecognized: return "recognized";
    case Recognizability::kUnrecognized: return "unrecognized";
  }
  return "unknown";
}

/// Per-glyph view combining the instructor's readability rating with the
/// latest recognizability verdict for each probed model.
struct GlyphAnnotation {
  CodePoint codepoint{0};
  Readability readability = Readability::kUnrated;
  std::map<std::string, Recognizability> recognizability;
};

/// Immutable after construction. Every grouped codepoint maps to exactly one
/// group; a group always contains its canonical member and >= 2 members.
class HomoglyphDatabase {
 public:
  /// Builds from already-merged groups. Used by the parser and by tests that
  /// construct small databases directly. Throws InvalidArgument when groups
  /// overlap or are smaller than two members.
  static HomoglyphDatabase from_groups(
      std::vector<std::vector<CodePoint>> groups, ParseReport report = {}) {
    HomoglyphDatabase db;
    db.report_ = report;
    for (auto& members : groups) {
      if (members.size() < 2) {
        throw Error(ErrorCode::kInvalidArgument,
                    "homoglyph group needs at least two members");
      }
      const std::size_t id = db.groups_.size();
      for (CodePoint c : members) {
        if (!db.index_.emplace(c.value(), id).second) {
          throw Error(ErrorCode::kInvalidArgument,
                      "codepoint U+" + to_hex(c) + " belongs to two groups");
        }
      }
      HomoglyphGroup group;
      group.id = id;
      group.canonical = pick_canonical(members);
      group.members = std::move(members);
      db.groups_.push_back(std::move(group));
    }
    if (db.groups_.empty()) {
      throw Error(ErrorCode::kEmptyDatabase, "no homoglyph groups");
    }
    return db;
  }

  // Unique ASCII member if there is exactly one, otherwise the smallest.
  static CodePoint pick_canonical(const std::vector<CodePoint>& members) {
    std::optional<CodePoint> ascii;
    std::size_t ascii_count = 0;
    for (CodePoint c : members) {
      if (c.is_ascii()) {
        ascii = c;
        ++ascii_count;
      }
    }
    if (ascii_count == 1) return *ascii;
    return *std::min_element(members.begin(), members.end());
  }

  const std::vector<HomoglyphGroup>& groups() const noexcept { return groups_; }
  const ParseReport& report() const noexcept { return report_; }
  std::size_t codepoint_count() const noexcept { return index_.size(); }

  std::optional<std::size_t> group_of(CodePoint c) const {
    auto it = index_.find(c.value());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const HomoglyphGroup* find_group(CodePoint c) const {
    auto id = group_of(c);
    return id ? &groups_[*id] : nullptr;
  }

  bool same_group(CodePoint a, CodePoint b) const {
    auto ga = group_of(a);
    return ga && ga == group_of(b);
  }

  CodePoint canonical_of(CodePoint c) const {
    const HomoglyphGroup* g = find_group(c);
    return g ? g->canonical : c;
  }

  friend bool operator==(const HomoglyphDatabase& a,
                         const HomoglyphDatabase& b) {
    if (a.groups_.size() != b.groups_.size()) return false;
    for (std::size_t i = 0; i < a.groups_.size(); ++i) {
      if (a.groups_[i].members != b.groups_[i].members ||
          a.groups_[i].canonical != b.groups_[i].canonical) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<HomoglyphGroup> groups_;
  std::unordered_map<std::uint32_t, std::size_t> index_;
  ParseReport report_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] inline void syntax_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kSyntaxError,
              "line " + std::to_string(line) + ": " + what, {{"line", line}});
}

inline CodePoint parse_token(std::string_view token, std::size_t line) {
  auto c = parse_hex(token);
  if (!c) syntax_error(line, "malformed hex token '" + std::string(token) + "'");
  return *c;
}

// Weighted union-find over codepoints in first-appearance order.
class GroupMerger {
 public:
  void add_record(const std::vector<CodePoint>& members) {
    std::size_t root = node(members.front());
    for (std::size_t i = 1; i < members.size(); ++i) {
      root = unite(root, node(members[i]));
    }
    ++records_[find(root)];
  }

  HomoglyphDatabase build(ParseReport report) {
    std::vector<std::vector<CodePoint>> groups;
    std::unordered_map<std::size_t, std::size_t> group_index;
    std::vector<std::size_t> group_records;
    for (std::size_t n = 0; n < codepoints_.size(); ++n) {
      const std::size_t root = find(n);
      auto [it, inserted] = group_index.emplace(root, groups.size());
      if (inserted) {
        groups.emplace_back();
        group_records.push_back(records_[root]);
      }
      groups[it->second].push_back(codepoints_[n]);
    }
    report.merged_groups = static_cast<std::size_t>(std::count_if(
        group_records.begin(), group_records.end(),
        [](std::size_t r) { return r >= 2; }));
    return HomoglyphDatabase::from_groups(std::move(groups), report);
  }

 private:
  std::size_t node(CodePoint c) {
    auto [it, inserted] = ids_.emplace(c.value(), parent_.size());
    if (inserted) {
      parent_.push_back(parent_.size());
      size_.push_back(1);
      codepoints_.push_back(c);
    }
    return it->second;
  }

  std::size_t find(std::size_t n) {
    while (parent_[n] != n) {
      parent_[n] = parent_[parent_[n]];
      n = parent_[n];
    }
    return n;
  }

  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    records_[a] += records_[b];
    records_.erase(b);
    return a;
  }

  std::unordered_map<std::uint32_t, std::size_t> ids_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::vector<CodePoint> codepoints_;
  std::unordered_map<std::size_t, std::size_t> records_;
};

}  // namespace detail

/// Parses a homoglyph data file. Groups sharing any codepoint are merged
/// transitively. Throws DecodeError, SyntaxError (with detail.line) or
/// EmptyDatabase.
///
/// group_lines: one group per line, comma-separated uppercase hex codepoints.
/// confusables: "SRC ; TARGET ; TYPE" rows; rows whose TARGET spans several
/// codepoints are skipped and counted in ParseReport::skipped_rows.
inline HomoglyphDatabase parse_homoglyph_file(std::string_view bytes,
                                              DbFormat format) {
  if (const std::size_t bad = utf8::find_invalid(bytes);
      bad != std::string_view::npos) {
    const auto line = 1 + static_cast<std::size_t>(std::count(
                              bytes.begin(), bytes.begin() + bad, '\n'));
    throw Error(ErrorCode::kDecodeError,
                "invalid UTF-8 at byte offset " + std::to_string(bad),
                {{"offset", bad}, {"line", line}});
  }
  if (bytes.starts_with("\xEF\xBB\xBF")) bytes.remove_prefix(3);

  detail::GroupMerger merger;
  ParseReport report;
  std::size_t line_no = 0;
  for (std::string_view line : detail::split(bytes, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;

    std::vector<CodePoint> members;
    if (format == DbFormat::kGroupLines) {
      for (std::string_view token : detail::split(line, ',')) {
        members.push_back(detail::parse_token(detail::trim(token), line_no));
      }
    } else {
      const auto fields = detail::split(line, ';');
      if (fields.size() < 2) {
        detail::syntax_error(line_no, "expected 'SRC ; TARGET ; TYPE'");
      }
      const auto src = detail::split_ws(fields[0]);
      const auto dst = detail::split_ws(fields[1]);
      if (src.empty() || dst.empty()) {
        detail::syntax_error(line_no, "empty SRC or TARGET field");
      }
      std::vector<CodePoint> src_cps, dst_cps;
      for (auto t : src) src_cps.push_back(detail::parse_token(t, line_no));
      for (auto t : dst) dst_cps.push_back(detail::parse_token(t, line_no));
      if (src_cps.size() > 1 || dst_cps.size() > 1) {
        ++report.skipped_rows;
        continue;
      }
      members = {src_cps.front(), dst_cps.front()};
    }

    std::vector<CodePoint> unique;
    for (CodePoint c : members) {
      if (std::find(unique.begin(), unique.end(), c) == unique.end()) {
        unique.push_back(c);
      }
    }
    if (unique.size() < 2) {
      detail::syntax_error(line_no, "group has fewer than two distinct codepoints");
    }
    merger.add_record(unique);
    ++report.source_records;
  }
  if (report.source_records == 0) {
    throw Error(ErrorCode::kEmptyDatabase, "no homoglyph groups parsed");
  }
  return merger.build(report);
}

/// Members of c's group other than c, in stored order. Empty when c is
/// ungrouped.
inline std::vector<CodePoint> lookup_homoglyphs(const HomoglyphDatabase& db,
                                                CodePoint c) {
  std::vector<CodePoint> out;
  if (const HomoglyphGroup* g = db.find_group(c)) {
    for (CodePoint m : g->members) {
      if (m != c) out.push_back(m);
    }
  }
  return out;
}

inline Text skeleton(const HomoglyphDatabase& db, const Text& text) {
  Text out;
  out.reserve(text.size());
  for (CodePoint c : text) out.push_back(db.canonical_of(c));
  return out;
}

/// Maps every grouped codepoint to its group's canonical member.
inline std::string skeleton(const HomoglyphDatabase& db, std::string_view text) {
  return utf8::encode(skeleton(db, utf8::decode(text)));
}

}  // namespace hgp
