// Copyright 2026 The hllrt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "hllrt/attack_io.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace hllrt {
namespace {

AttackSet sample() {
  AttackSet s;
  s.phase = 3;
  s.target_cardinality = 20000;
  s.achieved_estimate = 19876;
  s.source_seed = 7;
  s.elements = {"00aa", "11bb", "22cc"};
  return s;
}

AttackSet parse(const std::string& text) {
  std::istringstream in(text);
  return read_attack_set(in);
}

TEST(AttackSetFile, RoundTrip) {
  std::ostringstream out;
  write_attack_set(out, sample());
  EXPECT_EQ(out.str(), "# seed=7\n# target_C=20000\n# phase=3\n# estimate=19876\n# size=3\n00aa\n11bb\n22cc\n");
  const auto back = parse(out.str());
  EXPECT_EQ(back.elements, sample().elements);
  EXPECT_EQ(back.phase, 3);
  EXPECT_EQ(back.target_cardinality, 20000u);
  EXPECT_EQ(back.achieved_estimate, 19876u);
  EXPECT_EQ(back.source_seed, 7u);
}

TEST(AttackSetFile, PlainListsAndBlankLines) {
  const auto s = parse("a\n\nb\r\nc\n");
  EXPECT_EQ(s.elements, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(s.phase, 0);
  EXPECT_TRUE(parse("").elements.empty());
}

TEST(AttackSetFile, DuplicateNamesElementAndLine) {
  try {
    parse("# phase=3\nx\ny\nx\n");
    FAIL() << "expected AttackSetFormatError";
  } catch (const AttackSetFormatError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
  }
}

TEST(AttackSetFile, RejectsBadMetadata) {
  EXPECT_THROW(parse("# colour=red\n"), AttackSetFormatError);
  EXPECT_THROW(parse("# seed=abc\n"), AttackSetFormatError);
  EXPECT_THROW(parse("# phase=4\n"), AttackSetFormatError);
  EXPECT_THROW(parse("# novalue\n"), AttackSetFormatError);
  EXPECT_THROW(parse("a\n# seed=1\n"), AttackSetFormatError);
  EXPECT_THROW(parse("# size=2\na\n"), AttackSetFormatError);
}

TEST(AttackSetFile, RefusesUnwritableElements) {
  auto s = sample();
  s.elements.push_back("#hash");
  std::ostringstream out;
  EXPECT_THROW(write_attack_set(out, s), std::invalid_argument);
}

}  // namespace
}  // namespace hllrt
