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

#include "cli.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hgp/homoglyph_db.hpp"
#include "hgp/http_service.hpp"
#include "hgp/llm_gateway.hpp"
#include "hgp/perturb.hpp"
#include "hgp/probe.hpp"
#include "hgp/question_prep.hpp"
#include "hgp/session_store.hpp"
#include "hgp/stats.hpp"
#include "hgp/targets.hpp"

namespace fs = std::filesystem;

namespace hgp::cli {
namespace {

enum class OutputFormat { kHuman, kStructured };

struct CliConfig {
  std::string db_path;
  std::string db_format = "auto";
  std::string corpus_path;
  std::string session_path;
  std::string provider;
  bool mock = false;
  std::string mock_script;
  std::string format = "human";

  OutputFormat output() const {
    return format == "structured" ? OutputFormat::kStructured : OutputFormat::kHuman;
  }
};

// Exit-code classification of library errors.
int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoFooledAttempts:
    case ErrorCode::kEmptyCorpus:
    case ErrorCode::kEmptySample:
      return kExitEmpty;
    default:
      return kExitUsage;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

DbFormat detect_format(std::string_view bytes) {
  std::size_t start = 0;
  while (start < bytes.size()) {
    std::size_t nl = bytes.find('\n', start);
    std::string_view line = bytes.substr(start, nl - start);
    start = nl == std::string_view::npos ? bytes.size() : nl + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (line.find(';') != std::string_view::npos) return DbFormat::kConfusables;
  }
  return DbFormat::kGroupLines;
}

class Runner {
 public:
  Runner(CliConfig cfg, std::istream& in, std::ostream& out, std::ostream& err)
      : cfg_(std::move(cfg)), in_(in), out_(out), err_(err) {}

  bool structured() const { return cfg_.output() == OutputFormat::kStructured; }

  void emit(const nlohmann::ordered_json& record) { out_ << record.dump() << '\n'; }

  // Paths named on the command line must exist (session logs may be new,
  // but their directory must exist).
  void validate_paths() const {
    const auto must_exist = [](const std::string& p, const char* what) {
      if (!p.empty() && !fs::is_regular_file(p)) {
        throw Error(ErrorCode::kIoError, std::string(what) + " not found: " + p);
      }
    };
    must_exist(cfg_.db_path, "database");
    must_exist(cfg_.corpus_path, "corpus");
    must_exist(cfg_.mock_script, "mock script");
    if (!cfg_.session_path.empty()) {
      const fs::path parent = fs::absolute(cfg_.session_path).parent_path();
      if (!fs::is_directory(parent)) {
        throw Error(ErrorCode::kIoError, "session directory not found: " + parent.string());
      }
    }
    if (cfg_.format != "human" && cfg_.format != "structured") {
      throw Error(ErrorCode::kInvalidArgument, "--format must be human or structured");
    }
  }

  HomoglyphDatabase load_db() const {
    if (cfg_.db_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--db is required");
    const std::string bytes = read_file(cfg_.db_path);
    DbFormat format;
    if (cfg_.db_format == "auto") {
      format = detect_format(bytes);
    } else if (auto f = parse_db_format(cfg_.db_format)) {
      format = *f;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown --db-format " + cfg_.db_format);
    }
    return parse_homoglyph_file(bytes, format);
  }

  std::vector<Question> load_corpus() const {
    if (cfg_.corpus_path.empty()) return {};
    return parse_corpus(read_file(cfg_.corpus_path));
  }

  std::string resolve_text(const std::string& text, const std::string& text_file,
                           const std::string& id, bool allow_stdin) const {
    if (!text.empty()) return text;
    if (!text_file.empty()) return read_file(text_file);
    if (!id.empty()) {
      if (cfg_.corpus_path.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "--id needs --corpus");
      }
      const auto corpus = load_corpus();
      const Question* q = find_question(corpus, id);
      if (!q) throw Error(ErrorCode::kNotFound, "no question with id '" + id + "'");
      return q->text;
    }
    if (allow_stdin) {
      std::ostringstream buf;
      buf << in_.rdbuf();
      return buf.str();
    }
    throw Error(ErrorCode::kInvalidArgument, "no question text given");
  }

  SessionStore open_session() const {
    if (cfg_.session_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--session is required");
    return SessionStore::open(cfg_.session_path);
  }

  Provider make_provider() const {
    if (cfg_.mock) {
      MockScript script;
      if (!cfg_.mock_script.empty()) {
        script = mock_script_from_json(nlohmann::json::parse(read_file(cfg_.mock_script)));
      }
      return make_mock_provider(script, cfg_.provider.empty() ? "mock" : cfg_.provider,
                                [](std::chrono::milliseconds) {});
    }
    if (cfg_.provider.empty()) {
      throw Error(ErrorCode::kConfigError, "choose --provider chatgpt|gemini or --mock");
    }
    for (auto& pc : provider_configs_from_env()) {
      if (pc.name == cfg_.provider) return make_http_provider(pc);
    }
    throw Error(ErrorCode::kConfigError, "unknown provider '" + cfg_.provider + "'");
  }

  // ---- subcommands -------------------------------------------------------

  int db_inspect() {
    const HomoglyphDatabase db = load_db();
    const ParseReport& r = db.report();
    if (structured()) {
      emit({{"groups", db.groups().size()},
            {"merged_groups", r.merged_groups},
            {"skipped_rows", r.skipped_rows},
            {"source_records", r.source_records},
            {"codepoints", db.codepoint_count()}});
    } else {
      out_ << "groups:         " << db.groups().size() << '\n'
           << "merged groups:  " << r.merged_groups << '\n'
           << "skipped rows:   " << r.skipped_rows << '\n'
           << "source records: " << r.source_records << '\n'
           << "codepoints:     " << db.codepoint_count() << '\n';
    }
    return kExitOk;
  }

  int suggest(const std::string& text, const std::string& text_file, const std::string& id) {
    const std::string source = resolve_text(text, text_file, id, false);
    for (const auto& s : suggest_targets(source)) {
      if (structured()) {
        emit(to_json(s));
      } else {
        out_ << s.position << '\t' << utf8::encode(s.codepoint) << '\t' << to_string(s.role)
             << '\t' << s.rationale << '\n';
      }
    }
    return kExitOk;
  }

  int perturb(const std::string& text, const std::string& text_file, const std::string& id,
              const std::string& plan_file) {
    const HomoglyphDatabase db = load_db();
    const std::string source = resolve_text(text, text_file, id, true);
    const PerturbationPlan plan = parse_plan(read_file(plan_file));
    const auto report = validate_plan(db, source, plan);
    if (!report.empty()) {
      for (const auto& v : report) err_ << "violation: " << to_string(v.rule) << ": " << v.message << '\n';
      return kExitUsage;
    }
    out_ << apply_plan(db, source, plan);
    return kExitOk;
  }

  int plan(const std::string& text, const std::string& text_file, const std::string& id,
           const std::vector<std::string>& edit_specs) {
    const std::string source = resolve_text(text, text_file, id, true);
    const Text scalars = utf8::decode(source);
    std::vector<Edit> edits;
    for (const auto& spec : edit_specs) {
      const auto colon = spec.find(':');
      if (colon == std::string::npos) {
        throw Error(ErrorCode::kInvalidArgument, "--edit expects POSITION:HEX, got " + spec);
      }
      std::size_t pos = 0;
      try {
        pos = std::stoul(spec.substr(0, colon));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidArgument, "bad position in --edit " + spec);
      }
      auto repl = parse_hex_lenient(spec.substr(colon + 1));
      if (!repl) throw Error(ErrorCode::kInvalidArgument, "bad codepoint in --edit " + spec);
      if (pos >= scalars.size()) {
        throw Error(ErrorCode::kInvalidArgument, "position " + std::to_string(pos) + " past end of text");
      }
      edits.push_back({pos, scalars[pos], *repl});
    }
    const PerturbationPlan p = make_plan(source, std::move(edits));
    if (!cfg_.db_path.empty()) {
      const auto report = validate_plan(load_db(), source, p);
      if (!report.empty()) {
        for (const auto& v : report) err_ << "violation: " << to_string(v.rule) << ": " << v.message << '\n';
        return kExitUsage;
      }
    }
    out_ << to_json(p).dump(2) << '\n';
    return kExitOk;
  }

  int probe(const std::string& hex, const std::string& verdict_flag, bool use_auto,
            const std::string& model_override) {
    auto cp = parse_hex_lenient(hex);
    if (!cp) throw Error(ErrorCode::kInvalidArgument, "'" + hex + "' is not a hex codepoint");
    std::optional<ProbeVerdict> human;
    if (!verdict_flag.empty()) {
      human = parse_probe_verdict(verdict_flag);
      if (!human) throw Error(ErrorCode::kInvalidArgument, "--verdict must be recognized, unrecognized or unclear");
    }
    const std::string prompt = make_probe_prompt(*cp);
    SessionStore store = open_session();
    const Provider provider = make_provider();
    const Exchange ex = send_prompt(provider, prompt);

    ProbeResult r;
    r.codepoint = *cp;
    r.model = model_override.empty() ? provider.config().name : model_override;
    r.prompt = prompt;
    r.response_excerpt = std::string(utf8::truncate(ex.response_text, kExcerptScalars));
    r.transport_status = ex.transport_status;

    if (ex.transport_status != TransportStatus::kOk) {
      // No reply to judge: recorded as an explicit auto "unclear".
      r.verdict = ProbeVerdict::kUnclear;
      r.verdict_source = VerdictSource::kAuto;
      err_ << "transport " << to_string(ex.transport_status) << ": " << ex.error << '\n';
    } else {
      if (!structured()) out_ << ex.response_text << '\n';
      std::optional<ProbeVerdict> v = human;
      r.verdict_source = VerdictSource::kHuman;
      if (!v && use_auto) {
        // Canonical form of the probed glyph decides the auto-rule.
        CodePoint canonical = *cp;
        if (!cfg_.db_path.empty()) canonical = load_db().canonical_of(*cp);
        v = auto_verdict(ex.response_text, canonical);
        if (v) r.verdict_source = VerdictSource::kAuto;
      }
      if (!v) v = ask_verdict();
      if (!v) {
        err_ << "no verdict entered; nothing recorded\n";
        return kExitUsage;
      }
      r.verdict = *v;
    }
    store.record_probe(r);
    if (structured()) {
      emit(to_json(store.ledger().results().back()));
    } else {
      out_ << "recorded " << to_string(r.verdict) << " (" << to_string(r.verdict_source)
           << ") for U+" << to_hex(r.codepoint) << " on " << r.model << '\n';
    }
    return kExitOk;
  }

  std::optional<ProbeVerdict> ask_verdict() {
    err_ << "verdict? [r]ecognized / [u]nrecognized / [c] unclear: " << std::flush;
    std::string line;
    if (!std::getline(in_, line)) return std::nullopt;
    if (line == "r" || line == "recognized") return ProbeVerdict::kRecognized;
    if (line == "u" || line == "unrecognized") return ProbeVerdict::kUnrecognized;
    if (line == "c" || line == "unclear") return ProbeVerdict::kUnclear;
    return std::nullopt;
  }

  int attempt(const std::string& id, const std::string& model, const std::string& plan_file,
              const std::string& verdict_name, const std::string& note) {
    const auto verdict = parse_attempt_verdict(verdict_name);
    if (!verdict) throw Error(ErrorCode::kInvalidArgument, "--verdict must be fooled, not_fooled or unclear");
    const HomoglyphDatabase db = load_db();
    const std::string source = resolve_text({}, {}, id, false);
    const PerturbationPlan p = parse_plan(read_file(plan_file));
    const std::string perturbed = apply_plan(db, source, p);

    SessionStore store = open_session();
    Attempt a;
    a.question_id = id;
    a.model = model;
    a.attempt_number = store.next_attempt_number(id, model);
    a.perturbed_text = perturbed;
    a.plan = p;
    a.perturbed_char_count = count_perturbed_chars(source, perturbed);
    a.verdict = *verdict;
    if (!note.empty()) a.bias_note = note;
    store.record_attempt(a);
    if (structured()) {
      emit(to_json(store.attempts({id, model, std::nullopt}).back()));
    } else {
      out_ << "recorded attempt " << a.attempt_number << " for " << id << " on " << model << '\n';
    }
    return kExitOk;
  }

  void print_stats(const std::string& label, const std::string& model, const SummaryStats& s) {
    if (structured()) {
      nlohmann::ordered_json rec{{"table", label}, {"model", model}};
      const nlohmann::ordered_json body = to_json(s);
      for (const auto& [k, v] : body.items()) rec[k] = v;
      emit(rec);
    } else {
      char line[160];
      std::snprintf(line, sizeof line, "%-18s n=%-5zu min=%-8g max=%-8g mean=%-8.4g std=%.4g\n",
                    label.c_str(), s.n, s.min, s.max, s.mean, s.std);
      out_ << line;
    }
  }

  int stats(const std::string& model, const std::string& reference_file) {
    if (!reference_file.empty()) {
      for (const auto& r : parse_reference_stats(nlohmann::json::parse(read_file(reference_file)))) {
        if (structured()) {
          emit({{"table", "reference:" + r.label},
                {"model", r.model},
                {"n", r.n ? nlohmann::ordered_json(*r.n) : nullptr},
                {"min", r.min},
                {"max", r.max},
                {"mean", r.mean},
                {"std", r.std}});
        } else {
          char line[200];
          std::snprintf(line, sizeof line, "reference %-24s %-8s n=%-5s min=%g max=%g mean=%g std=%g\n",
                        r.label.c_str(), r.model.c_str(),
                        r.n ? std::to_string(*r.n).c_str() : "?", r.min, r.max, r.mean, r.std);
          out_ << line;
        }
      }
      if (model.empty()) return kExitOk;
    }
    if (model.empty()) throw Error(ErrorCode::kInvalidArgument, "--model is required");
    if (cfg_.session_path.empty() || !fs::is_regular_file(cfg_.session_path)) {
      throw Error(ErrorCode::kIoError, "session log not found: " + cfg_.session_path);
    }
    const SessionStore store = open_session();
    const SummaryStats attempts = store.attempts_to_fool(model);
    const SummaryStats chars = store.perturbed_chars_stats(model);
    print_stats("attempts_to_fool", model, attempts);
    print_stats("perturbed_chars", model, chars);
    if (!cfg_.corpus_path.empty()) print_stats("question_chars", "", question_stats(load_corpus()));
    return kExitOk;
  }

  int serve(const std::string& host, int port, const std::string& static_dir,
            const std::string& reference_file, const std::string& cors_origin) {
    SessionStore store = cfg_.session_path.empty() ? SessionStore() : open_session();
    std::map<std::string, Provider> providers;
    for (auto& pc : provider_configs_from_env()) providers.emplace(pc.name, make_http_provider(pc));
    MockScript script;
    if (!cfg_.mock_script.empty()) {
      script = mock_script_from_json(nlohmann::json::parse(read_file(cfg_.mock_script)));
    }
    providers.emplace("mock", make_mock_provider(script, "mock", [](std::chrono::milliseconds) {}));

    Service::Options opts;
    if (!static_dir.empty()) opts.static_dir = static_dir;
    if (!reference_file.empty()) opts.reference_stats = nlohmann::json::parse(read_file(reference_file));
    if (!cors_origin.empty()) opts.cors_origin = cors_origin;
    Service service(store, std::move(providers), load_corpus(), std::move(opts));
    if (!cfg_.db_path.empty()) service.set_database(load_db());

    httplib::Server server;
    service.mount(server);
    err_ << "listening on http://" << host << ':' << port << '\n';
    if (!server.listen(host, port)) {
      throw Error(ErrorCode::kIoError, "cannot listen on " + host + ":" + std::to_string(port));
    }
    return kExitOk;
  }

 private:
  CliConfig cfg_;
  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Homoglyph perturbation toolkit", "hgp"};
  app.require_subcommand(1);
  CliConfig cfg;
  app.add_option("--db", cfg.db_path, "homoglyph data file")->envname("HGP_DB");
  app.add_option("--db-format", cfg.db_format, "auto, group_lines or confusables")
      ->envname("HGP_DB_FORMAT");
  app.add_option("--corpus", cfg.corpus_path, "question corpus (JSON lines)")->envname("HGP_CORPUS");
  app.add_option("--session", cfg.session_path, "session log (JSON lines)")->envname("HGP_SESSION");
  app.add_option("--provider", cfg.provider, "chatgpt or gemini")->envname("HGP_PROVIDER");
  app.add_flag("--mock", cfg.mock, "use the offline mock provider")->envname("HGP_MOCK");
  app.add_option("--mock-script", cfg.mock_script, "mock replies (JSON)")->envname("HGP_MOCK_SCRIPT");
  app.add_option("--format", cfg.format, "human or structured")->envname("HGP_FORMAT");

  auto* db_inspect = app.add_subcommand("db-inspect", "summarize a homoglyph data file");

  std::string text, text_file, id, plan_file;
  auto* suggest = app.add_subcommand("suggest", "list digits worth perturbing");
  suggest->add_option("text", text, "question text");
  suggest->add_option("--text-file", text_file);
  suggest->add_option("--id", id, "corpus question id");

  auto* perturb = app.add_subcommand("perturb", "apply a plan; perturbed text on stdout");
  perturb->add_option("--text", text);
  perturb->add_option("--text-file", text_file);
  perturb->add_option("--id", id);
  perturb->add_option("--plan", plan_file)->required();

  std::vector<std::string> edits;
  auto* plan = app.add_subcommand("plan", "build a plan file from POSITION:HEX edits");
  plan->add_option("--text", text);
  plan->add_option("--text-file", text_file);
  plan->add_option("--id", id);
  plan->add_option("--edit", edits, "POSITION:HEX, scalar index and replacement")->required();

  std::string hex, verdict, model;
  bool use_auto = false;
  auto* probe = app.add_subcommand("probe", "ask a model 'What is <glyph>?' and record the verdict");
  probe->add_option("codepoint", hex, "hex codepoint")->required();
  probe->add_option("--verdict", verdict, "recognized, unrecognized or unclear");
  probe->add_flag("--auto", use_auto, "judge replies that name the canonical digit");
  probe->add_option("--model", model, "ledger model name (default: provider name)");

  std::string note;
  auto* attempt = app.add_subcommand("attempt", "record one perturbed attempt and its verdict");
  attempt->add_option("--id", id)->required();
  attempt->add_option("--model", model)->required();
  attempt->add_option("--plan", plan_file)->required();
  attempt->add_option("--verdict", verdict, "fooled, not_fooled or unclear")->required();
  attempt->add_option("--note", note, "bias note");

  std::string reference;
  auto* stats = app.add_subcommand("stats", "attempts and perturbation statistics");
  stats->add_option("--model", model);
  stats->add_option("--reference", reference, "published reference statistics (JSON)");

  std::string host = "127.0.0.1", static_dir, cors;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "run the local HTTP service");
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--static", static_dir, "directory served at /");
  serve->add_option("--reference", reference);
  serve->add_option("--cors-origin", cors);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Runner runner(cfg, in, out, err);
  try {
    runner.validate_paths();
    if (*db_inspect) return runner.db_inspect();
    if (*suggest) return runner.suggest(text, text_file, id);
    if (*perturb) return runner.perturb(text, text_file, id, plan_file);
    if (*plan) return runner.plan(text, text_file, id, edits);
    if (*probe) return runner.probe(hex, verdict, use_auto, model);
    if (*attempt) return runner.attempt(id, model, plan_file, verdict, note);
    if (*stats) return runner.stats(model, reference);
    if (*serve) return runner.serve(host, port, static_dir, reference, cors);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    if (e.code() == ErrorCode::kNoFooledAttempts && e.detail().contains("questions")) {
      for (const auto& q : e.detail()["questions"]) err << "  unfooled: " << q.get<std::string>() << '\n';
    }
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << "error: InvalidArgument: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hgp::cli
