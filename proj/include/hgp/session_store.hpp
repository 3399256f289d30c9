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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "hgp/error.hpp"
#include "hgp/exchange.hpp"
#include "hgp/hash.hpp"
#include "hgp/perturb.hpp"
#include "hgp/probe.hpp"
#include "hgp/stats.hpp"
#include "hgp/timestamp.hpp"
#include "hgp/utf8.hpp"

namespace hgp {

enum class AttemptVerdict { kFooled, kNotFooled, kUnclear };

inline std::string_view to_string(AttemptVerdict v) {
  switch (v) {
    case AttemptVerdict::kFooled: return "fooled";
    case AttemptVerdict::kNotFooled: return "not_fooled";
    case AttemptVerdict::kUnclear: return "unclear";
  }
  return "unclear";
}

inline std::optional<AttemptVerdict> parse_attempt_verdict(std::string_view s) {
  if (s == "fooled") return AttemptVerdict::kFooled;
  if (s == "not_fooled") return AttemptVerdict::kNotFooled;
  if (s == "unclear") return AttemptVerdict::kUnclear;
  return std::nullopt;
}

/// One perturbed prompt sent to one model, with the human verdict.
struct Attempt {
  std::string question_id;
  std::string model;
  std::size_t attempt_number = 1;
  std::string perturbed_text;
  PerturbationPlan plan;
  std::size_t perturbed_char_count = 0;
  std::optional<Exchange> exchange;
  AttemptVerdict verdict = AttemptVerdict::kUnclear;
  std::optional<std::string> bias_note;
  std::string timestamp;
};

/// Span of the original question the model keeps re-inserting.
struct BiasAnnotation {
  std::string question_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string note;
};

inline nlohmann::ordered_json to_json(const Attempt& a) {
  nlohmann::ordered_json j;
  j["question_id"] = a.question_id;
  j["model"] = a.model;
  j["attempt_number"] = a.attempt_number;
  j["perturbed_text"] = a.perturbed_text;
  j["plan"] = to_json(a.plan);
  j["perturbed_char_count"] = a.perturbed_char_count;
  j["exchange"] = a.exchange ? to_json(*a.exchange) : nlohmann::ordered_json(nullptr);
  j["verdict"] = to_string(a.verdict);
  j["bias_note"] = a.bias_note ? nlohmann::ordered_json(*a.bias_note) : nullptr;
  j["timestamp"] = a.timestamp;
  return j;
}

inline Attempt attempt_from_json(const nlohmann::json& j) {
  const auto fail = [](const std::string& what) {
    return Error(ErrorCode::kInvalidArgument, "malformed attempt: " + what);
  };
  if (!j.is_object()) throw fail("expected an object");
  Attempt a;
  try {
    a.question_id = j.at("question_id").get<std::string>();
    a.model = j.at("model").get<std::string>();
    const auto& number = j.at("attempt_number");
    if (!number.is_number_unsigned()) throw fail("attempt_number must be a positive integer");
    a.attempt_number = number.get<std::size_t>();
    a.perturbed_text = j.at("perturbed_text").get<std::string>();
    a.plan = plan_from_json(j.at("plan"));
    a.perturbed_char_count = j.at("perturbed_char_count").get<std::size_t>();
    if (j.contains("exchange") && !j["exchange"].is_null()) {
      a.exchange = exchange_from_json(j["exchange"]);
    }
    auto verdict = parse_attempt_verdict(j.at("verdict").get<std::string>());
    if (!verdict) throw fail("verdict must be fooled, not_fooled or unclear");
    a.verdict = *verdict;
    if (j.contains("bias_note") && !j["bias_note"].is_null()) {
      a.bias_note = j["bias_note"].get<std::string>();
    }
    a.timestamp = j.value("timestamp", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
  if (a.question_id.empty() || a.model.empty()) throw fail("empty question_id or model");
  if (!utf8::is_valid(a.perturbed_text)) throw fail("perturbed_text is not UTF-8");
  return a;
}

struct AttemptFilter {
  std::optional<std::string> question_id;
  std::optional<std::string> model;
  std::optional<AttemptVerdict> verdict;
};

/// Append-only session log, one JSON record per line, tagged by "kind":
/// attempt, probe, bias_annotation, readability. Unknown kinds and fields
/// are ignored on replay. One writer at a time; readers share a lock.
class SessionStore {
 public:
  /// In-memory store (nothing persisted).
  SessionStore() = default;

  /// Opens `path`, replaying it when it exists. Appends go to the same file.
  static SessionStore open(const std::filesystem::path& path) {
    SessionStore store;
    store.path_ = path;
    store.replay_file();
    return store;
  }

  SessionStore(SessionStore&& other) noexcept {
    std::unique_lock lock(other.mu_);
    move_from(other);
  }
  SessionStore& operator=(SessionStore&& other) noexcept {
    if (this != &other) {
      std::scoped_lock lock(mu_, other.mu_);
      move_from(other);
    }
    return *this;
  }

  const std::optional<std::filesystem::path>& path() const { return path_; }

  /// Re-reads the log, picking up appends made by other processes.
  void refresh() {
    std::unique_lock lock(mu_);
    if (!path_) return;
    reset_state();
    replay_file();
  }

  /// Throws SequenceError when attempt_number is not 1 + the current maximum
  /// for (question_id, model), and IntegrityError when perturbed_char_count
  /// disagrees with the text reconstructed from the plan.
  void record_attempt(Attempt a) {
    std::unique_lock lock(mu_);
    if (a.timestamp.empty()) a.timestamp = now_iso8601();
    check_attempt(a);
    auto rec = to_json(a);
    append_line("attempt", rec);
    index_attempt(std::move(a));
  }

  void record_probe(ProbeResult r) {
    std::unique_lock lock(mu_);
    if (r.timestamp.empty()) r.timestamp = now_iso8601();
    if (r.model.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "probe model name is empty");
    }
    append_line("probe", to_json(r));
    ledger_.record(std::move(r));
  }

  /// Throws InvalidArgument unless 0 <= start < end <= question_length.
  void record_bias(BiasAnnotation b, std::size_t question_length) {
    std::unique_lock lock(mu_);
    if (!(b.start < b.end && b.end <= question_length)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bias span must satisfy 0 <= start < end <= question length");
    }
    nlohmann::ordered_json rec{{"question_id", b.question_id},
                               {"start", b.start},
                               {"end", b.end},
                               {"note", b.note}};
    append_line("bias_annotation", rec);
    bias_.push_back(std::move(b));
  }

  void record_readability(CodePoint c, Readability r) {
    std::unique_lock lock(mu_);
    nlohmann::ordered_json rec{{"codepoint", to_hex(c)}, {"readability", to_string(r)}};
    append_line("readability", rec);
    readability_.set(c, r);
  }

  std::vector<Attempt> attempts(const AttemptFilter& f = {}) const {
    std::shared_lock lock(mu_);
    std::vector<Attempt> out;
    for (const auto& a : attempts_) {
      if (f.question_id && a.question_id != *f.question_id) continue;
      if (f.model && a.model != *f.model) continue;
      if (f.verdict && a.verdict != *f.verdict) continue;
      out.push_back(a);
    }
    return out;
  }

  std::size_t next_attempt_number(const std::string& question_id,
                                  const std::string& model) const {
    std::shared_lock lock(mu_);
    auto it = max_attempt_.find({question_id, model});
    return it == max_attempt_.end() ? 1 : it->second + 1;
  }

  ProbeLedger ledger() const {
    std::shared_lock lock(mu_);
    return ledger_;
  }
  ReadabilityTable readability() const {
    std::shared_lock lock(mu_);
    return readability_;
  }
  std::vector<BiasAnnotation> bias_annotations() const {
    std::shared_lock lock(mu_);
    return bias_;
  }
  std::size_t ignored_records() const {
    std::shared_lock lock(mu_);
    return ignored_;
  }

  /// attempt_number of the first fooled attempt per question for `model`.
  /// Throws NoFooledAttempts (detail.questions) when a question that has
  /// attempts for this model has no fooled one, or when there are none.
  SummaryStats attempts_to_fool(const std::string& model) const {
    return first_fooled_stats(model, [](const Attempt& a) {
      return static_cast<double>(a.attempt_number);
    });
  }

  /// perturbed_char_count of the first fooled attempt per question.
  SummaryStats perturbed_chars_stats(const std::string& model) const {
    return first_fooled_stats(model, [](const Attempt& a) {
      return static_cast<double>(a.perturbed_char_count);
    });
  }

  std::vector<std::string> models() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    for (const auto& a : attempts_) {
      if (std::find(out.begin(), out.end(), a.model) == out.end()) out.push_back(a.model);
    }
    return out;
  }

 private:
  struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
  };

  void move_from(SessionStore& o) {
    path_ = std::move(o.path_);
    file_ = std::move(o.file_);
    attempts_ = std::move(o.attempts_);
    max_attempt_ = std::move(o.max_attempt_);
    ledger_ = std::move(o.ledger_);
    readability_ = std::move(o.readability_);
    bias_ = std::move(o.bias_);
    ignored_ = o.ignored_;
    torn_at_ = o.torn_at_;
  }

  void reset_state() {
    attempts_.clear();
    max_attempt_.clear();
    ledger_ = {};
    readability_ = {};
    bias_.clear();
    ignored_ = 0;
    torn_at_.reset();
  }

  template <typename Metric>
  SummaryStats first_fooled_stats(const std::string& model, Metric metric) const {
    std::shared_lock lock(mu_);
    std::vector<std::string> order;
    std::map<std::string, const Attempt*> first_fooled;
    for (const auto& a : attempts_) {
      if (a.model != model) continue;
      if (!first_fooled.count(a.question_id)) {
        order.push_back(a.question_id);
        first_fooled[a.question_id] = nullptr;
      }
      if (a.verdict != AttemptVerdict::kFooled) continue;
      const Attempt*& best = first_fooled[a.question_id];
      if (best == nullptr || a.attempt_number < best->attempt_number) best = &a;
    }
    if (order.empty()) {
      throw Error(ErrorCode::kNoFooledAttempts,
                  "no attempts recorded for model '" + model + "'",
                  {{"model", model}, {"questions", nlohmann::json::array()}});
    }
    nlohmann::json missing = nlohmann::json::array();
    std::vector<double> sample;
    for (const auto& q : order) {
      if (const Attempt* a = first_fooled[q]) {
        sample.push_back(metric(*a));
      } else {
        missing.push_back(q);
      }
    }
    if (!missing.empty()) {
      std::string names;
      for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m.get<std::string>();
      throw Error(ErrorCode::kNoFooledAttempts,
                  "no fooled attempt for model '" + model + "' on: " + names,
                  {{"model", model}, {"questions", missing}});
    }
    return summarize(sample);
  }

  void check_attempt(const Attempt& a) const {
    if (a.question_id.empty() || a.model.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "attempt needs question_id and model");
    }
    auto it = max_attempt_.find({a.question_id, a.model});
    const std::size_t expected = it == max_attempt_.end() ? 1 : it->second + 1;
    if (a.attempt_number != expected) {
      throw Error(ErrorCode::kSequenceError,
                  "attempt " + std::to_string(a.attempt_number) + " for (" + a.question_id +
                      ", " + a.model + "); expected " + std::to_string(expected),
                  {{"expected", expected}, {"got", a.attempt_number}});
    }

    // Rebuild the source text by undoing the plan, then recount.
    const auto integrity = [&](const std::string& why) {
      return Error(ErrorCode::kIntegrityError, "attempt integrity: " + why);
    };
    Text source = utf8::decode(a.perturbed_text);
    for (std::size_t i = 0; i < a.plan.edits.size(); ++i) {
      const Edit& e = a.plan.edits[i];
      if (i > 0 && e.position <= a.plan.edits[i - 1].position) {
        throw integrity("plan positions not strictly increasing");
      }
      if (e.position >= source.size() || source[e.position] != e.replacement) {
        throw integrity("perturbed text does not carry edit " + std::to_string(i));
      }
      source[e.position] = e.original;
    }
    const std::string source_text = utf8::encode(source);
    if (content_hash(source_text) != a.plan.source_hash) {
      throw integrity("plan does not reproduce the perturbed text from its source");
    }
    const std::size_t count = count_perturbed_chars(source_text, a.perturbed_text);
    if (count != a.perturbed_char_count) {
      throw Error(ErrorCode::kIntegrityError,
                  "perturbed_char_count is " + std::to_string(a.perturbed_char_count) +
                      " but the text differs in " + std::to_string(count) + " positions",
                  {{"stored", a.perturbed_char_count}, {"recomputed", count}});
    }
  }

  void index_attempt(Attempt a) {
    auto& max = max_attempt_[{a.question_id, a.model}];
    max = std::max(max, a.attempt_number);
    attempts_.push_back(std::move(a));
  }

  void append_line(std::string_view kind, const nlohmann::ordered_json& body) {
    if (!path_) return;
    nlohmann::ordered_json rec;
    rec["kind"] = kind;
    for (const auto& [k, v] : body.items()) rec[k] = v;
    const std::string line = rec.dump() + "\n";
    if (!file_) {
      // Drop a torn tail first so the new record starts on its own line.
      if (torn_at_) {
        std::error_code ec;
        std::filesystem::resize_file(*path_, *torn_at_, ec);
        if (ec) throw Error(ErrorCode::kIoError, "cannot repair " + path_->string());
        torn_at_.reset();
      }
      file_.reset(std::fopen(path_->c_str(), "ab"));
      if (!file_) {
        throw Error(ErrorCode::kIoError, "cannot open session log " + path_->string());
      }
    }
    if (std::fwrite(line.data(), 1, line.size(), file_.get()) != line.size() ||
        std::fflush(file_.get()) != 0 || ::fsync(::fileno(file_.get())) != 0) {
      throw Error(ErrorCode::kIoError, "failed to append to " + path_->string());
    }
  }

  void replay_file() {
    std::ifstream in(*path_, std::ios::binary);
    if (!in) return;  // created on first append
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < data.size()) {
      const std::size_t nl = data.find('\n', start);
      const bool complete = nl != std::string::npos;
      const std::string_view line(data.data() + start,
                                  (complete ? nl : data.size()) - start);
      start = complete ? nl + 1 : data.size();
      ++line_no;
      if (line.empty()) continue;
      try {
        replay_record(nlohmann::json::parse(line));
      } catch (const std::exception& e) {
        // A torn final write is dropped; corruption elsewhere is fatal.
        if (!complete) {
          ++ignored_;
          torn_at_ = static_cast<std::uintmax_t>(line.data() - data.data());
          break;
        }
        throw Error(ErrorCode::kSyntaxError,
                    "session log line " + std::to_string(line_no) + ": " + e.what(),
                    {{"line", line_no}});
      }
    }
  }

  void replay_record(const nlohmann::json& rec) {
    const std::string kind = rec.value("kind", std::string{});
    if (kind == "attempt") {
      index_attempt(attempt_from_json(rec));
    } else if (kind == "probe") {
      ledger_.record(probe_result_from_json(rec));
    } else if (kind == "bias_annotation") {
      bias_.push_back({rec.at("question_id").get<std::string>(),
                       rec.at("start").get<std::size_t>(), rec.at("end").get<std::size_t>(),
                       rec.value("note", std::string{})});
    } else if (kind == "readability") {
      auto cp = parse_hex(rec.at("codepoint").get<std::string>());
      auto r = parse_readability(rec.at("readability").get<std::string>());
      if (!cp || !r) throw Error(ErrorCode::kInvalidArgument, "malformed readability record");
      readability_.set(*cp, *r);
    } else {
      ++ignored_;
    }
  }

  mutable std::shared_mutex mu_;
  std::optional<std::filesystem::path> path_;
  std::unique_ptr<std::FILE, FileCloser> file_;
  std::vector<Attempt> attempts_;
  std::map<std::pair<std::string, std::string>, std::size_t> max_attempt_;
  ProbeLedger ledger_;
  ReadabilityTable readability_;
  std::vector<BiasAnnotation> bias_;
  std::size_t ignored_ = 0;
  std::optional<std::uintmax_t> torn_at_;
};

}  // namespace hgp
