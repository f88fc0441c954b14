// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "star/error.hpp"
#include "star/lexicon.hpp"
#include "test_support.hpp"

using namespace star;

namespace {

const Lexicon& shipped() {
  static const Lexicon lex = load_lexicon_file(star::test::data_path("lexicon.tsv"));
  return lex;
}

std::vector<std::string> words_of(const std::vector<WordEntry>& entries) {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.word);
  return out;
}

std::vector<std::string> brute_force_prefix(const Lexicon& lex, const std::string& prefix, std::size_t limit) {
  std::vector<WordEntry> matches;
  for (const auto& e : lex.entries()) {
    if (e.word.compare(0, prefix.size(), prefix) == 0) matches.push_back(e);
  }
  std::sort(matches.begin(), matches.end(), [](const WordEntry& a, const WordEntry& b) {
    if (a.lm_prob != b.lm_prob) return a.lm_prob > b.lm_prob;
    return a.word < b.word;
  });
  if (matches.size() > limit) matches.resize(limit);
  return words_of(matches);
}

}  // namespace

TEST(LoadLexicon, NormalisesFrequencies) {
  const auto lex = star::test::small_lexicon({{"the", 100}, {"cat", 50}, {"car", 50}});
  EXPECT_DOUBLE_EQ(lex.lm_prob("the"), 0.5);
  EXPECT_DOUBLE_EQ(lex.lm_prob("cat"), 0.25);
  EXPECT_EQ(lex.lm_prob("dog"), 0.0);
  const auto single = star::test::small_lexicon({{"a", 1}});
  EXPECT_EQ(single.lm_prob("a"), 1.0);
}

TEST(LoadLexicon, DropsNonLettersAndReportsMalformedRows) {
  std::istringstream in("The\t10\ndon't\t5\nabc1\t3\nnotab 4\nzero\t0\nneg\t-2\ncat\t10\nCAT\t5\n\n");
  LexiconLoadReport report;
  const auto lex = load_lexicon(in, &report);
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_TRUE(lex.contains_word("the"));
  EXPECT_TRUE(lex.contains_word("cat"));
  EXPECT_EQ(lex.find("cat")->frequency, 15u);
  EXPECT_EQ(report.dropped_non_letter, 2u);
  EXPECT_EQ(report.malformed, 3u);
  EXPECT_EQ(report.merged_duplicates, 1u);
  EXPECT_EQ(report.malformed_samples.size(), 3u);
  EXPECT_NE(report.malformed_samples[0].find("line 4"), std::string::npos);
}

TEST(LoadLexicon, EmptyAndUnreadableSourcesFail) {
  std::istringstream empty("");
  EXPECT_THROW(load_lexicon(empty), Error);
  std::istringstream only_junk("1\t5\n");
  EXPECT_THROW(load_lexicon(only_junk), Error);
  EXPECT_THROW(load_lexicon_file("/nonexistent/lexicon.tsv"), Error);
}

TEST(LoadLexicon, ShippedLexiconSumsToOne) {
  LexiconLoadReport report;
  const auto lex = load_lexicon_file(star::test::data_path("lexicon.tsv"), &report);
  EXPECT_GT(lex.size(), 9000u);
  EXPECT_NEAR(report.probability_sum, 1.0, 1e-9);
  long double sum = 0;
  for (const auto& e : lex.entries()) sum += e.lm_prob;
  EXPECT_NEAR(static_cast<double>(sum), 1.0, 1e-9);
  EXPECT_GT(report.dropped_non_letter, 0u);
}

TEST(ContainsWord, Basics) {
  EXPECT_TRUE(shipped().contains_word("the"));
  EXPECT_TRUE(shipped().contains_word("The"));
  EXPECT_FALSE(shipped().contains_word(""));
  EXPECT_FALSE(shipped().contains_word("xqzt"));
}

TEST(WordsWithPrefix, FilterAndOrder) {
  const auto lex = star::test::small_lexicon({{"the", 50}, {"they", 30}, {"cat", 20}});
  EXPECT_EQ(words_of(lex.words_with_prefix("th")), (std::vector<std::string>{"the", "they"}));
  EXPECT_EQ(words_of(lex.words_with_prefix("")), (std::vector<std::string>{"the", "they", "cat"}));
  EXPECT_EQ(words_of(lex.words_with_prefix("th", 1)), (std::vector<std::string>{"the"}));
  EXPECT_TRUE(lex.words_with_prefix("x").empty());
  EXPECT_TRUE(shipped().words_with_prefix("zzz").empty());
}

TEST(WordsWithPrefix, TiesBreakLexicographically) {
  const auto lex = star::test::small_lexicon({{"bb", 5}, {"ba", 5}, {"bc", 9}});
  EXPECT_EQ(words_of(lex.words_with_prefix("b")), (std::vector<std::string>{"bc", "ba", "bb"}));
}

TEST(WordsWithPrefix, MatchesBruteForceOnRandomPrefixes) {
  const Lexicon& lex = shipped();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, lex.size() - 1);
  std::uniform_int_distribution<int> letter(0, 25);
  std::uniform_int_distribution<std::size_t> limit_dist(1, 12);
  for (int i = 0; i < 500; ++i) {
    std::string prefix;
    if (i % 3 == 0) {
      // Random letters, mostly misses beyond a couple of characters.
      const int len = 1 + i % 3;
      for (int c = 0; c < len; ++c) prefix += char('a' + letter(rng));
    } else {
      const std::string& w = lex.entries()[pick(rng)].word;
      prefix = w.substr(0, 1 + rng() % w.size());
    }
    const std::size_t limit = i % 5 == 0 ? Lexicon::kNoLimit : limit_dist(rng);
    ASSERT_EQ(words_of(lex.words_with_prefix(prefix, limit)), brute_force_prefix(lex, prefix, limit)) << prefix;
  }
}

TEST(WordsWithPrefix, ExtendingThePrefixNarrowsTheSet) {
  const Lexicon& lex = shipped();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const std::string& w = lex.entries()[rng() % lex.size()].word;
    const std::string prefix = w.substr(0, rng() % w.size());
    const auto wide = words_of(lex.words_with_prefix(prefix));
    const std::set<std::string> wide_set(wide.begin(), wide.end());
    for (char c = 'a'; c <= 'z'; ++c) {
      for (const auto& narrow : words_of(lex.words_with_prefix(prefix + c))) ASSERT_TRUE(wide_set.count(narrow));
    }
  }
}

TEST(Lexicon, TrieNavigation) {
  const auto lex = star::test::small_lexicon({{"the", 50}, {"they", 30}, {"cat", 20}});
  auto t = lex.child(lex.root(), 't');
  ASSERT_TRUE(t);
  EXPECT_FALSE(lex.child(*t, 'x'));
  EXPECT_FALSE(lex.child(lex.root(), '?'));
  auto the = lex.find_prefix("the");
  ASSERT_TRUE(the);
  EXPECT_EQ(lex.top_entries(*the, 5).size(), 2u);
  EXPECT_FALSE(lex.find_prefix("dog"));
}
