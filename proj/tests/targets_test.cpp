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

#include <map>

#include <gtest/gtest.h>

#include "hgp/targets.hpp"

namespace hgp {
namespace {

// position -> role, for every digit in the text
std::map<std::size_t, TargetRole> roles(std::string_view text) {
  std::map<std::size_t, TargetRole> out;
  for (const auto& s : suggest_targets(text)) out[s.position] = s.role;
  return out;
}

constexpr auto A = TargetRole::kArithmetic;
constexpr auto S = TargetRole::kSymbolic;
constexpr auto O = TargetRole::kOther;

TEST(Targets, GrammarAlphabetDigitsAreSymbolic) {
  const std::string q = "Construct a phrase-structure grammar to generate {0^n 1^{2n} | n ≥ 0}.";
  const auto s = suggest_targets(q);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].codepoint, CodePoint('2'));  // arithmetic first
  EXPECT_EQ(s[0].role, A);
  EXPECT_EQ(roles(q), (std::map<std::size_t, TargetRole>{{50, S}, {54, S}, {57, A}, {67, S}}));
}

TEST(Targets, GrammarInLatexNotation) {
  const std::string q =
      "Construct a phrase-structure grammar to generate $\\{0^n 1^{2n} | n \\geq 0\\}$.";
  for (const auto& s : suggest_targets(q)) {
    EXPECT_EQ(s.role, s.codepoint == CodePoint('2') ? A : S) << s.position;
  }
}

TEST(Targets, JugQuantitiesAreArithmetic) {
  const std::string q =
      "Prove or disprove that if you have an 8-gallon jug of water and two empty jugs with "
      "capacities of 5 gallons and 3 gallons, respectively , then you can measure 4 gallons by "
      "successively pouring some of or all of the water in a jug into another jug.";
  const auto s = suggest_targets(q);
  ASSERT_EQ(s.size(), 4u);
  for (const auto& x : s) EXPECT_EQ(x.role, A) << x.position;
  EXPECT_EQ(s[0].rationale, "followed by unit word 'gallon'");
}

TEST(Targets, SeriesDigitsAreArithmetic) {
  const std::string q =
      "a) Find a formula for $1/2 + 1/4 + 1/8 + · · · + 1/2^n$ by examining the "
      "values of this expression for small values of n.";
  const auto s = suggest_targets(q);
  ASSERT_EQ(s.size(), 8u);
  for (const auto& x : s) EXPECT_EQ(x.role, A) << x.position;
}

TEST(Targets, Coefficient) {
  const auto s = suggest_targets("the product of $7x$ and $y$");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].role, A);
  EXPECT_EQ(s[0].rationale, "coefficient of variable 'x'");
}

TEST(Targets, NumericPowerVersusRepetition) {
  EXPECT_EQ(roles("3^4"), (std::map<std::size_t, TargetRole>{{0, A}, {2, A}}));
  EXPECT_EQ(roles("0^n"), (std::map<std::size_t, TargetRole>{{0, S}}));
  EXPECT_EQ(roles("1^{2n}"), (std::map<std::size_t, TargetRole>{{0, S}, {3, A}}));
  EXPECT_EQ(roles("2^{10}"), (std::map<std::size_t, TargetRole>{{0, A}, {3, A}, {4, A}}));
}

TEST(Targets, Operators) {
  for (std::string_view text : {"2 × 3", "6 ÷ 3", "6 − 3", "3⁄4", "3∕4",
                                "x = 5", "4*y"}) {
    for (const auto& s : suggest_targets(text)) EXPECT_EQ(s.role, A) << text;
  }
  // Relations are not arithmetic.
  EXPECT_EQ(roles("n ≥ 0"), (std::map<std::size_t, TargetRole>{{4, S}}));
  EXPECT_EQ(roles("n < 9"), (std::map<std::size_t, TargetRole>{{4, S}}));
}

TEST(Targets, HyphenatedUnitIsNotSubtraction) {
  const auto s = suggest_targets("an 8-gallon jug");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].rationale, "followed by unit word 'gallon'");
  EXPECT_EQ(suggest_targets("2-x")[0].rationale, "adjacent to operator '-'");
}

TEST(Targets, FunctionWordsAreNotUnits) {
  EXPECT_EQ(roles("the 1st and 2 of them"),
            (std::map<std::size_t, TargetRole>{{4, S}, {12, S}}));
  EXPECT_EQ(roles("in 1990 there"),
            (std::map<std::size_t, TargetRole>{{3, S}, {4, S}, {5, S}, {6, S}}));
  EXPECT_EQ(roles("costs 12 dollars"), (std::map<std::size_t, TargetRole>{{6, A}, {7, A}}));
}

TEST(Targets, IdentifiersAreOther) {
  const auto s = suggest_targets("take CS101 now");
  ASSERT_EQ(s.size(), 3u);
  for (const auto& x : s) {
    EXPECT_EQ(x.role, O);
    EXPECT_EQ(x.rationale, "part of identifier 'CS101'");
  }
  EXPECT_EQ(roles("x1 + 1"), (std::map<std::size_t, TargetRole>{{1, O}, {5, A}}));
}

TEST(Targets, DecimalIsOneRun) {
  const auto s = suggest_targets("use 3.14 meters");
  ASSERT_EQ(s.size(), 3u);
  for (const auto& x : s) EXPECT_EQ(x.rationale, "followed by unit word 'meters'");
}

TEST(Targets, OrderingArithmeticThenSymbolicThenOther) {
  const auto s = suggest_targets("x9 then {0, 1} then 7y");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].role, A);
  EXPECT_EQ(s[1].role, S);
  EXPECT_EQ(s[2].role, S);
  EXPECT_LT(s[1].position, s[2].position);
  EXPECT_EQ(s[3].role, O);
}

TEST(Targets, PositionsAreScalarIndices) {
  const auto s = suggest_targets("\xF0\x9D\x9F\x95 + 8");  // U+1D7D5 + 8
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].position, 4u);
}

TEST(Targets, NonAsciiDigitsAreIgnored) {
  EXPECT_TRUE(suggest_targets("\xD9\xA3 and \xF0\x9D\x9F\x95").empty());  // Arabic-Indic 3, bold 7
  EXPECT_TRUE(suggest_targets("").empty());
  EXPECT_TRUE(suggest_targets("no digits here").empty());
}

TEST(Targets, JsonShape) {
  const auto j = to_json(suggest_targets("7x")[0]);
  EXPECT_EQ(j.dump(),
            R"({"position":0,"codepoint":"0037","char":"7","role":"arithmetic","rationale":"coefficient of variable 'x'"})");
}

}  // namespace
}  // namespace hgp
