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

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "hgp/error.hpp"
#include "hgp/homoglyph_db.hpp"
#include "hgp/llm_gateway.hpp"
#include "hgp/perturb.hpp"
#include "hgp/probe.hpp"
#include "hgp/question_prep.hpp"
#include "hgp/session_store.hpp"
#include "hgp/stats.hpp"
#include "hgp/targets.hpp"

namespace hgp {

// Routes (JSON unless noted):
//   POST /api/db?format=group_lines|confusables   body: raw file bytes
//   GET  /api/homoglyphs/{hex}
//   POST /api/perturb                              {"text","plan"}
//   POST /api/suggest                              body: text/plain
//   GET  /api/probe-prompt/{hex}                   reply: text/plain
//   POST /api/llm                                  {"provider","prompt"}
//   POST /api/probes                               ProbeResult record
//   POST /api/readability                          {"codepoint","readability"}
//   POST /api/sessions/attempts                    Attempt record
//   GET  /api/sessions/attempts?question_id=&model=
//   GET  /api/stats?model=
//   GET  /api/reference-stats
// Failures answer with {"code","message","detail"}; code is an ErrorCode name.
class Service {
 public:
  struct Options {
    std::size_t max_upload_bytes = 16 * 1024 * 1024;
    std::string cors_origin = "http://localhost:5173";
    std::optional<std::filesystem::path> static_dir;
    std::optional<nlohmann::json> reference_stats;
  };

  Service(SessionStore& store, std::map<std::string, Provider> providers,
          std::vector<Question> corpus, Options options)
      : store_(store),
        providers_(std::move(providers)),
        corpus_(std::move(corpus)),
        options_(std::move(options)) {}

  Service(SessionStore& store, std::map<std::string, Provider> providers = {},
          std::vector<Question> corpus = {})
      : Service(store, std::move(providers), std::move(corpus), Options{}) {}

  void set_database(HomoglyphDatabase db) {
    auto next = std::make_shared<const HomoglyphDatabase>(std::move(db));
    std::unique_lock lock(db_mu_);
    db_ = std::move(next);
  }

  std::shared_ptr<const HomoglyphDatabase> database() const {
    std::shared_lock lock(db_mu_);
    return db_;
  }

  void mount(httplib::Server& server) {
    server.set_payload_max_length(options_.max_upload_bytes);
    if (options_.static_dir) server.set_mount_point("/", options_.static_dir->string());

    server.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    // Failures httplib raises itself (oversized bodies, unknown routes) get
    // the same JSON error shape as handler failures.
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      const ErrorCode code = res.status == 413   ? ErrorCode::kPayloadTooLarge
                             : res.status == 404 ? ErrorCode::kNotFound
                                                 : ErrorCode::kInvalidArgument;
      const int status = res.status;
      send_error(res, status, Error(code, httplib::status_message(status)));
      return httplib::Server::HandlerResponse::Handled;
    });
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });

    server.Post("/api/db", wrap([this](const auto& req, auto& res) { upload_db(req, res); }));
    server.Get(R"(/api/homoglyphs/([^/]+))",
               wrap([this](const auto& req, auto& res) { homoglyphs(req, res); }));
    server.Post("/api/perturb", wrap([this](const auto& req, auto& res) { perturb(req, res); }));
    server.Post("/api/suggest", wrap([](const auto& req, auto& res) {
                  auto arr = nlohmann::ordered_json::array();
                  for (const auto& s : suggest_targets(req.body)) arr.push_back(to_json(s));
                  send_json(res, 200, {{"suggestions", arr}});
                }));
    server.Get(R"(/api/probe-prompt/([^/]+))",
               wrap([](const auto& req, auto& res) {
                 res.status = 200;
                 res.set_content(make_probe_prompt(path_codepoint(req)),
                                 "text/plain; charset=utf-8");
               }));
    server.Post("/api/llm", wrap([this](const auto& req, auto& res) { llm(req, res); }));
    server.Post("/api/probes", wrap([this](const auto& req, auto& res) {
                  store_.record_probe(probe_result_from_json(parse_body(req)));
                  send_json(res, 201, {{"recorded", true}});
                }));
    server.Post("/api/readability", wrap([this](const auto& req, auto& res) {
                  const auto body = parse_body(req);
                  auto cp = parse_hex_lenient(body.value("codepoint", std::string{}));
                  auto r = parse_readability(body.value("readability", std::string{}));
                  if (!cp || !r) {
                    throw Error(ErrorCode::kInvalidArgument, "need codepoint and readability");
                  }
                  store_.record_readability(*cp, *r);
                  send_json(res, 201, {{"recorded", true}});
                }));
    server.Post("/api/sessions/attempts",
                wrap([this](const auto& req, auto& res) { post_attempt(req, res); }));
    server.Get("/api/sessions/attempts", wrap([this](const auto& req, auto& res) {
                 AttemptFilter f;
                 if (req.has_param("question_id")) f.question_id = req.get_param_value("question_id");
                 if (req.has_param("model")) f.model = req.get_param_value("model");
                 auto arr = nlohmann::ordered_json::array();
                 for (const auto& a : store_.attempts(f)) arr.push_back(to_json(a));
                 send_json(res, 200, {{"attempts", arr}});
               }));
    server.Get("/api/stats", wrap([this](const auto& req, auto& res) { stats(req, res); }));
    server.Get("/api/reference-stats", wrap([this](const auto&, auto& res) {
                 if (!options_.reference_stats) {
                   throw Error(ErrorCode::kNotFound, "no reference statistics loaded");
                 }
                 send_plain_json(res, 200, *options_.reference_stats);
               }));
    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
  }

  /// HTTP status each error code maps to.
  static int status_for(ErrorCode code) {
    switch (code) {
      case ErrorCode::kNoDatabase:
      case ErrorCode::kSequenceError:
        return 409;
      case ErrorCode::kHashMismatch:
      case ErrorCode::kInvalidEdit:
      case ErrorCode::kIntegrityError:
        return 422;
      case ErrorCode::kConfigError:
        return 424;
      case ErrorCode::kNoFooledAttempts:
      case ErrorCode::kNotFound:
        return 404;
      case ErrorCode::kPayloadTooLarge:
        return 413;
      case ErrorCode::kIoError:
        return 500;
      default:
        return 400;
    }
  }

 private:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static Handler wrap(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
      try {
        inner(req, res);
      } catch (const Error& e) {
        send_error(res, status_for(e.code()), e);
      } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, Error(ErrorCode::kInvalidArgument, e.what()));
      }
    };
  }

  static void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  static void send_plain_json(httplib::Response& res, int status, const nlohmann::json& body) {
    send_json(res, status, nlohmann::ordered_json(body));
  }

  static void send_error(httplib::Response& res, int status, const Error& e) {
    nlohmann::ordered_json body;
    body["code"] = to_string(e.code());
    body["message"] = e.what();
    body["detail"] = e.detail();
    send_json(res, status, body);
  }

  static nlohmann::json parse_body(const httplib::Request& req) {
    auto j = nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
    }
    return j;
  }

  static CodePoint path_codepoint(const httplib::Request& req) {
    const std::string token = req.matches[1];
    auto cp = parse_hex_lenient(token);
    if (!cp) {
      throw Error(ErrorCode::kInvalidArgument, "'" + token + "' is not a codepoint in hex");
    }
    return *cp;
  }

  std::shared_ptr<const HomoglyphDatabase> require_db() const {
    auto db = database();
    if (!db) throw Error(ErrorCode::kNoDatabase, "no homoglyph database uploaded");
    return db;
  }

  void upload_db(const httplib::Request& req, httplib::Response& res) {
    if (req.body.size() > options_.max_upload_bytes) {
      throw Error(ErrorCode::kPayloadTooLarge, "upload exceeds size cap");
    }
    const std::string format_name =
        req.has_param("format") ? req.get_param_value("format") : "group_lines";
    auto format = parse_db_format(format_name);
    if (!format) {
      throw Error(ErrorCode::kInvalidArgument, "unknown format '" + format_name + "'");
    }
    HomoglyphDatabase db = parse_homoglyph_file(req.body, *format);
    const ParseReport report = db.report();
    const std::size_t groups = db.groups().size();
    const std::size_t codepoints = db.codepoint_count();
    set_database(std::move(db));
    send_json(res, 200, nlohmann::ordered_json{{"format", to_string(*format)},
                                               {"groups", groups},
                                               {"codepoints", codepoints},
                                               {"merged_groups", report.merged_groups},
                                               {"skipped_rows", report.skipped_rows},
                                               {"source_records", report.source_records}});
  }

  void homoglyphs(const httplib::Request& req, httplib::Response& res) const {
    auto db = require_db();
    const CodePoint c = path_codepoint(req);
    const ProbeLedger ledger = store_.ledger();
    const ReadabilityTable readability = store_.readability();
    auto glyphs = nlohmann::ordered_json::array();
    for (CodePoint g : lookup_homoglyphs(*db, c)) {
      const GlyphAnnotation ann = annotate(g, readability, ledger);
      nlohmann::ordered_json rec;
      for (const auto& [model, r] : ann.recognizability) rec[model] = to_string(r);
      glyphs.push_back({{"codepoint", to_hex(g)},
                        {"char", utf8::encode(g)},
                        {"readability", to_string(ann.readability)},
                        {"recognizability", rec}});
    }
    nlohmann::ordered_json body;
    body["codepoint"] = to_hex(c);
    body["char"] = utf8::encode(c);
    if (auto group = db->group_of(c)) {
      body["canonical"] = to_hex(db->groups()[*group].canonical);
    } else {
      body["canonical"] = nullptr;
    }
    body["homoglyphs"] = glyphs;
    send_json(res, 200, body);
  }

  void perturb(const httplib::Request& req, httplib::Response& res) const {
    auto db = require_db();
    const auto body = parse_body(req);
    if (!body.contains("text") || !body["text"].is_string()) {
      throw Error(ErrorCode::kInvalidArgument, "missing text");
    }
    const std::string text = body["text"].get<std::string>();
    if (!utf8::is_valid(text)) throw Error(ErrorCode::kDecodeError, "text is not UTF-8");
    const PerturbationPlan plan = plan_from_json(body.value("plan", nlohmann::json::object()));
    const std::string perturbed = apply_plan(*db, text, plan);
    send_json(res, 200, nlohmann::ordered_json{
                            {"text", perturbed},
                            {"count", count_perturbed_chars(text, perturbed)},
                            {"source_hash", plan.source_hash},
                            {"result_hash", content_hash(perturbed)}});
  }

  void llm(const httplib::Request& req, httplib::Response& res) const {
    const auto body = parse_body(req);
    const std::string name = body.value("provider", std::string{});
    auto it = providers_.find(name);
    if (it == providers_.end()) {
      throw Error(ErrorCode::kConfigError, "provider '" + name + "' is not configured",
                  {{"provider", name}});
    }
    if (!body.contains("prompt") || !body["prompt"].is_string()) {
      throw Error(ErrorCode::kInvalidArgument, "missing prompt");
    }
    send_json(res, 200, to_json(send_prompt(it->second, body["prompt"].get<std::string>())));
  }

  void post_attempt(const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body = parse_body(req);
    if (!body.contains("attempt_number")) {
      body["attempt_number"] = store_.next_attempt_number(body.value("question_id", std::string{}),
                                                          body.value("model", std::string{}));
    }
    Attempt a = attempt_from_json(body);
    store_.record_attempt(a);
    send_json(res, 201, to_json(store_.attempts({a.question_id, a.model, std::nullopt}).back()));
  }

  void stats(const httplib::Request& req, httplib::Response& res) const {
    if (!req.has_param("model")) throw Error(ErrorCode::kInvalidArgument, "model is required");
    const std::string model = req.get_param_value("model");
    nlohmann::ordered_json body;
    body["model"] = model;
    body["attempts_to_fool"] = to_json(store_.attempts_to_fool(model));
    body["perturbed_chars"] = to_json(store_.perturbed_chars_stats(model));
    body["question_chars"] =
        corpus_.empty() ? nlohmann::ordered_json(nullptr) : to_json(question_stats(corpus_));
    send_json(res, 200, body);
  }

  SessionStore& store_;
  std::map<std::string, Provider> providers_;
  std::vector<Question> corpus_;
  Options options_;
  mutable std::shared_mutex db_mu_;
  std::shared_ptr<const HomoglyphDatabase> db_;
};

}  // namespace hgp
