// tests/vocabulary_test.cc

// Copyright 2026  ADSM contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "adsm/vocabulary.h"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace adsm {
namespace {

TEST(VocabularyTest, CanonicalOrderAndBlank) {
  const Vocabulary v = Vocabulary::FromUnits({{"b", true}, {"a", false}, {"b", true}, {"ab", false}});
  ASSERT_EQ(v.Size(), 3);
  EXPECT_EQ(v.unit(0), (Unit{"a", false}));
  EXPECT_EQ(v.unit(1), (Unit{"ab", false}));
  EXPECT_EQ(v.unit(2), (Unit{"b", true}));
  EXPECT_EQ(v.BlankId(), 3);
  EXPECT_EQ(v.NumClasses(), 4);
  EXPECT_EQ(v.Label(3), "<b>");
  EXPECT_EQ(v.Label(2), "b_");
  EXPECT_EQ(v.MaxUnitChars(), 2);
}

TEST(VocabularyTest, LookupAndErrors) {
  Vocabulary v;
  EXPECT_EQ(v.Add({"x", false}), 0);
  EXPECT_EQ(v.Add({"x", true}), 1);
  EXPECT_EQ(v.Add({"x", false}), 0);
  EXPECT_EQ(v.IdOf({"x", true}), 1);
  EXPECT_FALSE(v.Find({"y", false}).has_value());
  EXPECT_THROW(v.IdOf({"y", false}), InputError);
  EXPECT_THROW(v.Add({"", false}), InputError);
  EXPECT_THROW(v.Add({"a_b", false}), InputError);
  EXPECT_THROW(v.Add({"a b", false}), InputError);
}

TEST(VocabularyTest, AlphabetNeedsBothForms) {
  const Vocabulary v = Vocabulary::FromUnits(
      {{"a", false}, {"a", true}, {"b", false}, {"cd", false}, {"cd", true}});
  EXPECT_EQ(v.Alphabet(), (std::set<std::string>{"a"}));
  const auto units = SingleCharUnits({"p", "q"});
  EXPECT_EQ(units.size(), 4u);
  EXPECT_EQ(Vocabulary::FromUnits(units).Alphabet(), (std::set<std::string>{"p", "q"}));
}

TEST(VocabularyTest, RandomRoundTrip) {
  std::mt19937_64 rng(3);
  const std::string letters = "abcde";
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Unit> units;
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    for (int i = 0; i < n; ++i) {
      std::string s;
      const int len = std::uniform_int_distribution<int>(1, 3)(rng);
      for (int j = 0; j < len; ++j)
        s += letters[std::uniform_int_distribution<int>(0, 4)(rng)];
      units.push_back({s, std::bernoulli_distribution(0.5)(rng)});
    }
    const Vocabulary v = Vocabulary::FromUnits(units);
    std::stringstream ss;
    WriteVocabulary(ss, v);
    const Vocabulary back = ReadVocabulary(ss);
    EXPECT_TRUE(back == v);
    for (int id = 0; id < v.Size(); ++id) EXPECT_EQ(back.IdOf(v.unit(id)), id);
  }
}

TEST(VocabularyTest, ReaderRejectsBadFiles) {
  auto read = [](const std::string &text) {
    std::istringstream is(text);
    return ReadVocabulary(is);
  };
  EXPECT_THROW(read("a\t0\t0\n"), InputError);
  EXPECT_THROW(read("#adsm-vocab v1\na\t2\t0\n"), InputError);
  EXPECT_THROW(read("#adsm-vocab v1\na\t0\t1\n"), InputError);
  EXPECT_THROW(read("#adsm-vocab v1\na\t0\t0\na\t0\t1\n"), InputError);
  EXPECT_THROW(read("#adsm-vocab v1\na\t0\n"), InputError);
  EXPECT_EQ(read("#adsm-vocab v1\na\t0\t0\na\t1\t1\n").Size(), 2);
}

}  // namespace
}  // namespace adsm
