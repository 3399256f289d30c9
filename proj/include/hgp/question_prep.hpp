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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hgp/error.hpp"
#include "hgp/stats.hpp"
#include "hgp/utf8.hpp"

namespace hgp {

struct Question {
  std::string id;
  std::string text;
  std::string source;
  std::set<std::string> tags;
  std::size_t char_count = 0;  // scalars in text
};

/// Validates and fills char_count. Throws InvalidArgument on empty text or id.
inline Question make_question(std::string id, std::string text,
                              std::string source = {},
                              std::set<std::string> tags = {}) {
  if (id.empty()) throw Error(ErrorCode::kInvalidArgument, "question id is empty");
  if (text.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "question " + id + " has empty text");
  }
  const std::size_t count = utf8::length(text);
  return {std::move(id), std::move(text), std::move(source), std::move(tags), count};
}

enum class RewriteStage { kOriginal, kVariablesIntroduced, kCoefficientInjected };

inline std::string_view to_string(RewriteStage s) {
  switch (s) {
    case RewriteStage::kOriginal: return "original";
    case RewriteStage::kVariablesIntroduced: return "variables_introduced";
    case RewriteStage::kCoefficientInjected: return "coefficient_injected";
  }
  return "original";
}

struct RewriteRecord {
  std::string question_id;
  RewriteStage stage = RewriteStage::kOriginal;
  std::string text;
  std::optional<RewriteStage> parent_stage;
};

// original -> variables_introduced -> coefficient_injected, and
// original -> coefficient_injected directly.
inline bool can_derive(std::optional<RewriteStage> parent, RewriteStage child) {
  switch (child) {
    case RewriteStage::kOriginal:
      return !parent.has_value();
    case RewriteStage::kVariablesIntroduced:
      return parent == RewriteStage::kOriginal;
    case RewriteStage::kCoefficientInjected:
      return parent == RewriteStage::kOriginal ||
             parent == RewriteStage::kVariablesIntroduced;
  }
  return false;
}

inline RewriteRecord make_rewrite(std::string question_id, RewriteStage stage,
                                  std::string text,
                                  std::optional<RewriteStage> parent) {
  if (!can_derive(parent, stage)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("stage ") + std::string(to_string(stage)) +
                    " cannot derive from " +
                    (parent ? std::string(to_string(*parent)) : "nothing"));
  }
  return {std::move(question_id), stage, std::move(text), parent};
}

// ---------------------------------------------------------------------------
// Coefficient injection

struct InjectionSite {
  enum class Kind { kLast, kAll, kIndex };
  Kind kind = Kind::kLast;
  std::size_t index = 0;  // kIndex: which standalone occurrence, 0-based

  static InjectionSite last() { return {}; }
  static InjectionSite all() { return {Kind::kAll, 0}; }
  static InjectionSite nth(std::size_t i) { return {Kind::kIndex, i}; }
};

namespace detail {

inline bool is_ascii_alnum(CodePoint c) {
  return c.is_ascii_alpha() || c.is_ascii_digit();
}

// Scalar ranges [open+1, close) between unescaped '$' pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> math_spans(const Text& t) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::optional<std::size_t> open;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].value() != '$') continue;
    if (i > 0 && t[i - 1].value() == '\\') continue;
    if (open) {
      spans.emplace_back(*open + 1, i);
      open.reset();
    } else {
      open = i;
    }
  }
  return spans;
}

inline bool standalone_at(const Text& t, std::size_t i, std::size_t lo,
                          std::size_t hi) {
  return (i == lo || !is_ascii_alnum(t[i - 1])) &&
         (i + 1 >= hi || !is_ascii_alnum(t[i + 1]));
}

}  // namespace detail

/// Scalar positions of `variable` as a standalone math token. With '$...$'
/// delimiters present only occurrences inside them count; otherwise any
/// letter bounded by non-alphanumerics does. Throws AmbiguousVariable for
/// a, A and I in undelimited text (they are also English words).
inline std::vector<std::size_t> find_variable(const Text& t, char variable) {
  const CodePoint var(static_cast<unsigned char>(variable));
  std::vector<std::size_t> hits;
  const auto spans = detail::math_spans(t);
  if (!spans.empty()) {
    for (auto [lo, hi] : spans) {
      for (std::size_t i = lo; i < hi; ++i) {
        if (t[i] == var && detail::standalone_at(t, i, lo, hi)) hits.push_back(i);
      }
    }
    return hits;
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == var && detail::standalone_at(t, i, 0, t.size())) hits.push_back(i);
  }
  if (!hits.empty() && (variable == 'a' || variable == 'A' || variable == 'I')) {
    throw Error(ErrorCode::kAmbiguousVariable,
                std::string("'") + variable +
                    "' is also a word; wrap the variable in $...$",
                {{"variable", std::string(1, variable)}});
  }
  return hits;
}

/// Prefixes the chosen standalone occurrence(s) of `variable` with
/// `coefficient`. By default the last occurrence, which is the one in the
/// claim clause of a "Let x ... Prove that ... x ..." question.
inline std::string inject_coefficient(std::string_view text, char variable,
                                      std::string_view coefficient,
                                      InjectionSite site = InjectionSite::last()) {
  const bool letter = (variable >= 'a' && variable <= 'z') ||
                      (variable >= 'A' && variable <= 'Z');
  if (!letter) {
    throw Error(ErrorCode::kInvalidArgument, "variable must be a single ASCII letter");
  }
  const bool digits_ok =
      !coefficient.empty() && coefficient.size() <= 3 && coefficient[0] != '0' &&
      std::all_of(coefficient.begin(), coefficient.end(),
                  [](char c) { return c >= '0' && c <= '9'; });
  if (!digits_ok) {
    throw Error(ErrorCode::kInvalidArgument,
                "coefficient must be 1-3 decimal digits without a leading zero");
  }

  const Text t = utf8::decode(text);
  const auto hits = find_variable(t, variable);
  if (hits.empty()) {
    throw Error(ErrorCode::kVariableNotFound,
                std::string("variable '") + variable + "' not found",
                {{"variable", std::string(1, variable)}});
  }

  std::vector<std::size_t> chosen;
  switch (site.kind) {
    case InjectionSite::Kind::kLast: chosen = {hits.back()}; break;
    case InjectionSite::Kind::kAll: chosen = hits; break;
    case InjectionSite::Kind::kIndex:
      if (site.index >= hits.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "occurrence " + std::to_string(site.index) + " out of range (" +
                        std::to_string(hits.size()) + " found)");
      }
      chosen = {hits[site.index]};
      break;
  }

  std::string out;
  out.reserve(text.size() + coefficient.size() * chosen.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (next < chosen.size() && chosen[next] == i) {
      out += coefficient;
      ++next;
    }
    utf8::append(out, t[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Variable-introduction template

struct VariableBinding {
  char variable;
  std::string phrase;
};

struct TemplateOptions {
  bool math_delimiters = false;  // emit $x$ instead of x
};

namespace detail {

inline bool word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline std::vector<std::size_t> find_phrase(std::string_view text,
                                            std::string_view phrase) {
  std::vector<std::size_t> hits;
  for (std::size_t pos = text.find(phrase); pos != std::string_view::npos;
       pos = text.find(phrase, pos + 1)) {
    const bool left = pos == 0 || !word_char(text[pos - 1]);
    const std::size_t end = pos + phrase.size();
    const bool right = end >= text.size() || !word_char(text[end]);
    if (left && right) hits.push_back(pos);
  }
  return hits;
}

inline std::string pluralize(std::string_view noun) {
  std::string s(noun);
  const auto ends = [&](std::string_view suf) { return s.ends_with(suf); };
  if (ends("s") || ends("x") || ends("z") || ends("ch") || ends("sh")) return s + "es";
  if (s.size() >= 2 && s.back() == 'y' &&
      std::string_view("aeiou").find(s[s.size() - 2]) == std::string_view::npos) {
    return s.substr(0, s.size() - 1) + "ies";
  }
  return s + "s";
}

inline std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? " and " : ", ";
    out += items[i];
  }
  return out;
}

inline std::string last_word(std::string_view phrase) {
  const auto sp = phrase.rfind(' ');
  return std::string(sp == std::string_view::npos ? phrase : phrase.substr(sp + 1));
}

}  // namespace detail

/// Rewrites a question as "Let x and y be P1 and P2 respectively. <claim>",
/// where the claim is the original text with each bound phrase (and its
/// indefinite article) replaced by the variable. Phrases sharing a head noun
/// are factored: "nonzero rational and irrational numbers".
/// Throws PhraseNotFound (detail.missing) or InvalidArgument.
inline std::string variable_template(std::string_view text,
                                     const std::vector<VariableBinding>& bindings,
                                     TemplateOptions options = {}) {
  if (bindings.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one binding is required");
  }
  std::set<char> letters;
  for (const auto& b : bindings) {
    const bool letter = (b.variable >= 'a' && b.variable <= 'z') ||
                        (b.variable >= 'A' && b.variable <= 'Z');
    if (!letter || b.phrase.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bindings need a single-letter variable and a non-empty phrase");
    }
    if (!letters.insert(b.variable).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("variable '") + b.variable + "' bound twice");
    }
  }

  struct Match {
    std::size_t begin;
    std::size_t end;
    std::size_t binding;
  };
  std::vector<Match> matches;
  nlohmann::json missing = nlohmann::json::array();
  for (std::size_t k = 0; k < bindings.size(); ++k) {
    const auto hits = detail::find_phrase(text, bindings[k].phrase);
    if (hits.empty()) missing.push_back(bindings[k].phrase);
    for (std::size_t h : hits) matches.push_back({h, h + bindings[k].phrase.size(), k});
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) {
      names += (names.empty() ? "'" : ", '") + m.get<std::string>() + "'";
    }
    throw Error(ErrorCode::kPhraseNotFound, "phrase not found: " + names,
                {{"missing", missing}});
  }
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.end > b.end;
  });

  const auto var_text = [&](char v) {
    return options.math_delimiters ? "$" + std::string(1, v) + "$"
                                   : std::string(1, v);
  };

  std::string claim;
  std::size_t cursor = 0;
  for (const Match& m : matches) {
    if (m.begin < cursor) continue;  // overlaps an earlier, longer match
    std::size_t begin = m.begin;
    // Drop a preceding indefinite article: "a nonzero rational number" -> "x".
    for (std::string_view article : {"a ", "an ", "A ", "An "}) {
      if (begin >= cursor + article.size() &&
          text.substr(begin - article.size(), article.size()) == article &&
          (begin == article.size() ||
           !detail::word_char(text[begin - article.size() - 1]))) {
        begin -= article.size();
        break;
      }
    }
    claim.append(text.substr(cursor, begin - cursor));
    claim += var_text(bindings[m.binding].variable);
    cursor = m.end;
  }
  claim.append(text.substr(cursor));

  std::vector<std::string> vars;
  for (const auto& b : bindings) vars.push_back(var_text(b.variable));

  std::string binding_clause = "Let " + detail::join_list(vars) + " be ";
  if (bindings.size() == 1) {
    const std::string& p = bindings.front().phrase;
    const bool vowel = std::string_view("aeiouAEIOU").find(p.front()) != std::string_view::npos;
    binding_clause += (vowel ? "an " : "a ") + p + ".";
  } else {
    const std::string head = detail::last_word(bindings.front().phrase);
    const bool shared_head = std::all_of(
        bindings.begin(), bindings.end(), [&](const VariableBinding& b) {
          return b.phrase.size() > head.size() && detail::last_word(b.phrase) == head;
        });
    std::vector<std::string> phrases;
    for (const auto& b : bindings) {
      phrases.push_back(shared_head
                            ? b.phrase.substr(0, b.phrase.size() - head.size() - 1)
                            : b.phrase);
    }
    binding_clause += detail::join_list(phrases);
    if (shared_head) binding_clause += " " + detail::pluralize(head);
    binding_clause += " respectively.";
  }
  return binding_clause + " " + claim;
}

// ---------------------------------------------------------------------------
// Corpus

inline nlohmann::ordered_json to_json(const Question& q) {
  return {{"id", q.id},
          {"text", q.text},
          {"source", q.source},
          {"tags", q.tags},
          {"char_count", q.char_count}};
}

/// One JSON object per line: {"id","text","source","tags"}. Blank lines are
/// skipped. Throws SyntaxError (detail.line) on malformed records or
/// duplicate ids.
inline std::vector<Question> parse_corpus(std::string_view bytes) {
  std::vector<Question> out;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= bytes.size()) {
    const std::size_t nl = bytes.find('\n', start);
    std::string_view line = bytes.substr(start, nl - start);
    start = nl == std::string_view::npos ? bytes.size() + 1 : nl + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) continue;

    const auto bad = [&](const std::string& why) {
      return Error(ErrorCode::kSyntaxError,
                   "corpus line " + std::to_string(line_no) + ": " + why,
                   {{"line", line_no}});
    };
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw bad("not a JSON object");
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() ||
        !rec.contains("text") || !rec["text"].is_string()) {
      throw bad("record needs string fields id and text");
    }
    std::set<std::string> tags;
    if (rec.contains("tags")) {
      if (!rec["tags"].is_array()) throw bad("tags must be an array");
      for (const auto& t : rec["tags"]) {
        if (!t.is_string()) throw bad("tags must be strings");
        tags.insert(t.get<std::string>());
      }
    }
    Question q;
    try {
      q = make_question(rec["id"].get<std::string>(), rec["text"].get<std::string>(),
                        rec.value("source", std::string{}), std::move(tags));
    } catch (const Error& e) {
      throw bad(e.what());
    }
    if (rec.contains("char_count") && rec["char_count"] != q.char_count) {
      throw bad("char_count does not match text");
    }
    if (!ids.insert(q.id).second) throw bad("duplicate id '" + q.id + "'");
    out.push_back(std::move(q));
  }
  return out;
}

inline const Question* find_question(const std::vector<Question>& corpus,
                                     std::string_view id) {
  for (const auto& q : corpus) {
    if (q.id == id) return &q;
  }
  return nullptr;
}

/// Summary of scalar lengths. Throws EmptyCorpus.
inline SummaryStats question_stats(const std::vector<Question>& corpus) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus is empty");
  std::vector<double> lengths;
  lengths.reserve(corpus.size());
  for (const auto& q : corpus) lengths.push_back(static_cast<double>(q.char_count));
  return summarize(lengths);
}

}  // namespace hgp
