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

#include <thread>

#include <gtest/gtest.h>

#include "hgp/http_service.hpp"
#include "test_support.hpp"

namespace hgp {
namespace {

using nlohmann::json;

const std::string kJug = "an 8-gallon jug and a 5-gallon jug";

class ServiceTest : public ::testing::Test {
 protected:
  void start(Service::Options options = {}) {
    std::map<std::string, Provider> providers;
    providers.emplace("mock", make_mock_provider(
                                  mock_script_from_json(json::parse(
                                      testing::fixture("data/mock/replies.json"))),
                                  "mock", [](std::chrono::milliseconds) {}));
    MockScript echo;
    echo.mode = MockScript::Mode::kEcho;
    providers.emplace("echo", make_mock_provider(echo, "echo"));
    auto corpus = parse_corpus(testing::fixture("data/corpus/sample_questions.jsonl"));
    service_ = std::make_unique<Service>(store_, std::move(providers), std::move(corpus),
                                         std::move(options));
    service_->mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Result post(const std::string& path, const std::string& body,
                       const std::string& type = "application/json") {
    return client_->Post(path, body, type);
  }

  void upload_sample_db() {
    auto r = post("/api/db?format=group_lines",
                  testing::fixture("data/homoglyphs/digits_and_letters.txt"), "text/plain");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200) << r->body;
  }

  static void expect_error(const httplib::Result& r, int status, const std::string& code) {
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, status) << r->body;
    const auto body = json::parse(r->body);
    EXPECT_EQ(body["code"], code);
    EXPECT_TRUE(body["message"].is_string());
    EXPECT_TRUE(body.contains("detail"));
  }

  SessionStore store_;
  std::unique_ptr<Service> service_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(ServiceTest, UploadDatabaseAndLookup) {
  start();
  expect_error(client_->Get("/api/homoglyphs/1D7D5"), 409, "NoDatabase");

  auto r = post("/api/db?format=confusables",
                testing::fixture("tests/data/confusables_excerpt.txt"), "text/plain");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const auto golden = testing::golden("confusables_excerpt.json");
  const auto body = json::parse(r->body);
  EXPECT_EQ(body["groups"], golden["groups"]);
  EXPECT_EQ(body["merged_groups"], golden["merged_groups"]);
  EXPECT_EQ(body["skipped_rows"], golden["skipped_rows"]);

  upload_sample_db();  // replaces the previous one
  r = client_->Get("/api/homoglyphs/38");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const auto eight = json::parse(r->body);
  EXPECT_EQ(eight["canonical"], "0038");
  std::vector<std::string> hexes;
  for (const auto& g : eight["homoglyphs"]) hexes.push_back(g["codepoint"]);
  EXPECT_NE(std::find(hexes.begin(), hexes.end(), "1FBF8"), hexes.end());
  EXPECT_EQ(std::find(hexes.begin(), hexes.end(), "0038"), hexes.end());
  EXPECT_EQ(eight["homoglyphs"][0]["readability"], "unrated");

  r = client_->Get("/api/homoglyphs/2603");  // snowman, ungrouped
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_TRUE(json::parse(r->body)["canonical"].is_null());
  EXPECT_TRUE(json::parse(r->body)["homoglyphs"].empty());

  expect_error(client_->Get("/api/homoglyphs/zz"), 400, "InvalidArgument");
}

TEST_F(ServiceTest, UploadErrors) {
  start();
  expect_error(post("/api/db?format=group_lines", "0038,0042\n0041,,0042\n", "text/plain"), 400,
               "SyntaxError");
  const auto r = post("/api/db", "# nothing\n", "text/plain");
  expect_error(r, 400, "EmptyDatabase");
  expect_error(post("/api/db?format=xml", "a", "text/plain"), 400, "InvalidArgument");
  expect_error(post("/api/db", "0041,0391\n\xC3(\n", "text/plain"), 400, "DecodeError");
}

TEST_F(ServiceTest, OversizedUploadIs413WithJsonBody) {
  Service::Options o;
  o.max_upload_bytes = 1024;
  start(o);
  expect_error(post("/api/db", std::string(4096, '#'), "text/plain"), 413, "PayloadTooLarge");
}

TEST_F(ServiceTest, AnnotationsAppearInLookup) {
  start();
  upload_sample_db();
  ASSERT_EQ(post("/api/readability", R"({"codepoint":"1FBF8","readability":"readable"})")->status,
            201);
  ProbeResult p;
  p.codepoint = CodePoint(0x1FBF8);
  p.model = "chatgpt";
  p.prompt = make_probe_prompt(p.codepoint);
  p.verdict = ProbeVerdict::kUnrecognized;
  ASSERT_EQ(post("/api/probes", to_json(p).dump())->status, 201);

  const auto body = json::parse(client_->Get("/api/homoglyphs/0038")->body);
  bool found = false;
  for (const auto& g : body["homoglyphs"]) {
    if (g["codepoint"] != "1FBF8") continue;
    found = true;
    EXPECT_EQ(g["readability"], "readable");
    EXPECT_EQ(g["recognizability"]["chatgpt"], "unrecognized");
  }
  EXPECT_TRUE(found);
  expect_error(post("/api/readability", R"({"codepoint":"1FBF8","readability":"great"})"), 400,
               "InvalidArgument");
  expect_error(post("/api/probes", R"({"codepoint":"1FBF8"})"), 400, "InvalidArgument");
}

TEST_F(ServiceTest, PerturbRoundTripsAstralBytes) {
  start();
  const auto plan = make_plan(kJug, {{3, CodePoint('8'), CodePoint(0x1FBF8)},
                                     {22, CodePoint('5'), CodePoint(0x1D7D3)}});
  json req = {{"text", kJug}, {"plan", json::parse(to_json(plan).dump())}};
  expect_error(post("/api/perturb", req.dump()), 409, "NoDatabase");
  upload_sample_db();

  const auto r = post("/api/perturb", req.dump());
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const auto body = json::parse(r->body);
  const std::string expected = "an \xF0\x9F\xAF\xB8-gallon jug and a \xF0\x9D\x9F\x93-gallon jug";
  EXPECT_EQ(body["text"], expected);
  EXPECT_EQ(body["count"], 2);
  EXPECT_EQ(body["result_hash"], content_hash(expected));
  // Raw UTF-8 on the wire, not \u escapes.
  EXPECT_NE(r->body.find("\xF0\x9F\xAF\xB8"), std::string::npos);

  req["text"] = "an 9-gallon jug and a 5-gallon jug";
  expect_error(post("/api/perturb", req.dump()), 422, "HashMismatch");
  expect_error(post("/api/perturb", "[1,2]"), 400, "InvalidArgument");
  expect_error(post("/api/perturb", "{"), 400, "InvalidArgument");
}

TEST_F(ServiceTest, Suggest) {
  start();
  const auto r = post("/api/suggest", kJug, "text/plain; charset=utf-8");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200);
  const auto s = json::parse(r->body)["suggestions"];
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0]["position"], 3);
  EXPECT_EQ(s[0]["role"], "arithmetic");
  EXPECT_EQ(s[1]["position"], 22);
}

TEST_F(ServiceTest, ProbePromptIsPlainText) {
  start();
  auto r = client_->Get("/api/probe-prompt/38");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->body, "What is 8?");
  EXPECT_EQ(r->get_header_value("Content-Type").rfind("text/plain", 0), 0u);
  r = client_->Get("/api/probe-prompt/1D7D5");
  EXPECT_EQ(r->body, "What is \xF0\x9D\x9F\x95?");
  expect_error(client_->Get("/api/probe-prompt/200B"), 400, "Unprintable");
  expect_error(client_->Get("/api/probe-prompt/D800"), 400, "InvalidArgument");
}

TEST_F(ServiceTest, LlmRelay) {
  start();
  auto r = post("/api/llm", json{{"provider", "mock"}, {"prompt", "What is 8?"}}.dump());
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  auto ex = json::parse(r->body);
  EXPECT_EQ(ex["response_text"], "8 is the number eight.");
  EXPECT_EQ(ex["transport_status"], "ok");

  const std::string tricky = "\xE2\x84\xAB e\xCC\x81 \xF0\x9D\x9F\x95";
  r = post("/api/llm", json{{"provider", "echo"}, {"prompt", tricky}}.dump());
  ex = json::parse(r->body);
  EXPECT_EQ(ex["prompt"], tricky);
  EXPECT_EQ(ex["response_text"], tricky);

  expect_error(post("/api/llm", json{{"provider", "nope"}, {"prompt", "x"}}.dump()), 424,
               "ConfigError");
  expect_error(post("/api/llm", json{{"provider", "mock"}, {"prompt", ""}}.dump()), 400,
               "InvalidArgument");
}

TEST_F(ServiceTest, AttemptsAndStats) {
  start();
  upload_sample_db();
  expect_error(client_->Get("/api/stats?model=chatgpt"), 404, "NoFooledAttempts");
  expect_error(client_->Get("/api/stats"), 400, "InvalidArgument");

  const auto make = [](std::uint32_t repl, const char* verdict) {
    const auto plan = make_plan(kJug, {{3, CodePoint('8'), CodePoint(repl)}});
    Attempt a;
    a.question_id = "water-jugs";
    a.model = "chatgpt";
    a.plan = plan;
    a.perturbed_text = apply_plan(testing::sample_db(), kJug, plan);
    a.perturbed_char_count = 1;
    a.verdict = *parse_attempt_verdict(verdict);
    auto j = json::parse(to_json(a).dump());
    j.erase("attempt_number");  // server assigns the next number
    j.erase("timestamp");
    return j;
  };
  auto r = post("/api/sessions/attempts", make(0x1FBF8, "not_fooled").dump());
  ASSERT_EQ(r->status, 201) << r->body;
  EXPECT_EQ(json::parse(r->body)["attempt_number"], 1);
  expect_error(client_->Get("/api/stats?model=chatgpt"), 404, "NoFooledAttempts");
  EXPECT_EQ(json::parse(client_->Get("/api/stats?model=chatgpt")->body)["detail"]["questions"],
            json::array({"water-jugs"}));

  r = post("/api/sessions/attempts", make(0x1D7D6, "fooled").dump());
  ASSERT_EQ(r->status, 201) << r->body;
  EXPECT_EQ(json::parse(r->body)["attempt_number"], 2);

  auto explicit_number = make(0x1D7E0, "fooled");
  explicit_number["attempt_number"] = 7;
  expect_error(post("/api/sessions/attempts", explicit_number.dump()), 409, "SequenceError");
  auto bad_count = make(0x1D7E0, "fooled");
  bad_count["perturbed_char_count"] = 3;
  expect_error(post("/api/sessions/attempts", bad_count.dump()), 422, "IntegrityError");

  r = client_->Get("/api/sessions/attempts?question_id=water-jugs&model=chatgpt");
  EXPECT_EQ(json::parse(r->body)["attempts"].size(), 2u);
  r = client_->Get("/api/sessions/attempts?model=gemini");
  EXPECT_TRUE(json::parse(r->body)["attempts"].empty());

  r = client_->Get("/api/stats?model=chatgpt");
  ASSERT_EQ(r->status, 200) << r->body;
  const auto st = json::parse(r->body);
  EXPECT_EQ(st["attempts_to_fool"]["n"], 1);
  EXPECT_EQ(st["attempts_to_fool"]["mean"], 2.0);
  EXPECT_EQ(st["perturbed_chars"]["mean"], 1.0);
  EXPECT_EQ(st["question_chars"]["n"], 12);
}

TEST_F(ServiceTest, ReferenceStats) {
  start();
  expect_error(client_->Get("/api/reference-stats"), 404, "NotFound");
}

TEST_F(ServiceTest, ReferenceStatsServedVerbatim) {
  Service::Options o;
  const auto doc = json::parse(testing::fixture("data/reference/reference_stats.json"));
  o.reference_stats = doc;
  start(o);
  const auto r = client_->Get("/api/reference-stats");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body), doc);
}

TEST_F(ServiceTest, CorsAndUnknownRoutes) {
  Service::Options o;
  o.cors_origin = "http://ui.test";
  start(o);
  auto r = client_->Options("/api/perturb");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 204);
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "http://ui.test");
  EXPECT_NE(r->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);

  r = client_->Get("/api/health");
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "http://ui.test");

  expect_error(client_->Get("/api/no-such-route"), 404, "NotFound");
}

TEST(ServiceStatus, Mapping) {
  EXPECT_EQ(Service::status_for(ErrorCode::kSyntaxError), 400);
  EXPECT_EQ(Service::status_for(ErrorCode::kNoDatabase), 409);
  EXPECT_EQ(Service::status_for(ErrorCode::kSequenceError), 409);
  EXPECT_EQ(Service::status_for(ErrorCode::kHashMismatch), 422);
  EXPECT_EQ(Service::status_for(ErrorCode::kInvalidEdit), 422);
  EXPECT_EQ(Service::status_for(ErrorCode::kConfigError), 424);
  EXPECT_EQ(Service::status_for(ErrorCode::kNoFooledAttempts), 404);
  EXPECT_EQ(Service::status_for(ErrorCode::kPayloadTooLarge), 413);
}

}  // namespace
}  // namespace hgp
