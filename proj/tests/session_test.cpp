// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "star/error.hpp"
#include "star/session.hpp"
#include "test_support.hpp"

using namespace star;

namespace {

const Lexicon& shipped() {
  static const Lexicon lex = load_lexicon_file(star::test::data_path("lexicon.tsv"));
  return lex;
}

struct Fixture {
  KeyboardLayout layout = build_layout("enlarged");
  Session session{layout, shipped()};
  double t = 0;

  void tap(char c) {
    session.touch(key_center(layout, std::string(1, c)), t, t + 90);
    t += 300;
  }
  void press(std::string_view label) {
    session.press(label, t, t + 90);
    t += 300;
  }
};

}  // namespace

TEST(Session, TypingAWordAndSpace) {
  Fixture f;
  f.session.show_phrase("the cat");
  EXPECT_EQ(f.session.phase(), Phase::phrase_shown);
  for (char c : std::string_view("cat")) f.tap(c);
  EXPECT_EQ(f.session.phase(), Phase::transcribing);
  f.press(labels::space);
  EXPECT_EQ(f.session.committed(), "cat ");
  EXPECT_TRUE(f.session.tap_context().empty());
}

TEST(Session, SuggestionCommitsWordAndClearsContext) {
  Fixture f;
  f.session.show_phrase("the cat");
  f.tap('t');
  f.tap('h');
  ASSERT_EQ(f.session.tap_context().size(), 2u);
  ASSERT_TRUE(f.session.suggestions().first);
  EXPECT_EQ(f.session.suggestions().first->word, "the");
  f.press(labels::suggestion0);
  EXPECT_EQ(f.session.committed(), "the ");
  EXPECT_TRUE(f.session.tap_context().empty());
  EXPECT_TRUE(f.session.suggestions().empty());
  const auto& e = f.session.current_log().events.back();
  EXPECT_EQ(e.kind, EventKind::suggestion);
  EXPECT_EQ(e.erase, 2u);
  EXPECT_EQ(e.insert, "the ");
}

TEST(Session, SuggestionMatchesTheLibraryDecoder) {
  Fixture f;
  f.session.show_phrase("hello");
  const std::vector<TouchPoint> taps{{60.3, 9.1}, {17.5, 0.8}, {71.9, 7.2}};
  for (const auto& p : taps) {
    f.session.touch(p, f.t, f.t + 80);
    f.t += 300;
  }
  const auto want = suggest(SpatialModel(f.layout), shipped(), taps);
  ASSERT_TRUE(want.first);
  EXPECT_EQ(f.session.suggestions().first->word, want.first->word);
  EXPECT_EQ(f.session.suggestions().first->score, want.first->score);
}

TEST(Session, BackspaceRemovesLetterAndTap) {
  Fixture f;
  f.session.show_phrase("a");
  f.tap('a');
  f.press(labels::backspace);
  EXPECT_EQ(f.session.committed(), "");
  EXPECT_TRUE(f.session.tap_context().empty());
  f.press(labels::backspace);
  EXPECT_EQ(f.session.current_log().events.back().erase, 0u);
}

TEST(Session, BackspaceAcrossSpaceRestoresPreviousWord) {
  Fixture f;
  f.session.show_phrase("the cat");
  const TouchPoint off{1.3, -0.7};
  f.session.touch(key_center(f.layout, "c") + off, f.t, f.t + 80);
  f.t += 300;
  f.tap('a');
  f.press(labels::space);
  f.press(labels::backspace);
  const auto ctx = f.session.tap_context();
  ASSERT_EQ(ctx.size(), 2u);
  EXPECT_EQ(ctx[0], key_center(f.layout, "c") + off);
  EXPECT_EQ(ctx[1], key_center(f.layout, "a"));
}

TEST(Session, IllegalTransitions) {
  Fixture f;
  EXPECT_THROW(f.tap('a'), Error);
  EXPECT_THROW(f.press(labels::submit), Error);
  f.session.show_phrase("a");
  EXPECT_THROW(f.session.show_phrase("b"), Error);
  f.tap('a');
  f.press(labels::submit);
  EXPECT_EQ(f.session.phase(), Phase::submitted);
  EXPECT_THROW(f.tap('a'), Error);
  EXPECT_THROW(f.press(labels::submit), Error);
  EXPECT_EQ(f.session.completed().size(), 1u);
  EXPECT_EQ(f.session.completed().front().transcribed, "a");
  f.session.show_phrase("b");
  f.tap('b');
  EXPECT_THROW(f.session.touch({0, 0}, f.t - 10000, f.t), Error);
  EXPECT_THROW(f.session.touch({0, 0}, f.t, f.t - 1), Error);
}

TEST(Session, ApplyDispatchesActions) {
  Fixture f;
  f.session.apply(ShowPhrase{"ab", {}});
  f.session.apply(Touch{key_center(f.layout, "a"), 0, 50});
  f.session.apply(Press{"b", 100, 150, std::nullopt});
  f.session.apply(Press{"submit", 200, 250, std::nullopt});
  EXPECT_EQ(f.session.completed().back().transcribed, "ab");
}

TEST(Session, RandomLegalStreamsKeepInvariants) {
  const auto layout = build_layout("original");
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> x(-4, 62);
  std::uniform_real_distribution<double> y(-8, 30);
  std::uniform_int_distribution<int> action(0, 9);
  for (int run = 0; run < 40; ++run) {
    Session session(layout, shipped());
    session.show_phrase("some phrase");
    double t = 0;
    for (int step = 0; step < 80; ++step) {
      t += 200;
      const int a = action(rng);
      if (a < 6) {
        session.touch({x(rng), y(rng)}, t, t + 50);
      } else if (a == 6) {
        session.press(labels::space, t, t + 50);
      } else if (a == 7) {
        session.press(labels::backspace, t, t + 50);
      } else {
        session.press(a == 8 ? labels::suggestion0 : labels::suggestion1, t, t + 50);
      }
      if (session.phase() == Phase::submitted) {
        session.show_phrase("another phrase");
        continue;
      }
      ASSERT_EQ(session.phase(), Phase::transcribing);
      const std::string& text = session.committed();
      const auto space = text.find_last_of(' ');
      const std::size_t partial = space == std::string::npos ? text.size() : text.size() - space - 1;
      ASSERT_EQ(session.tap_context().size(), partial);
      ASSERT_EQ(replay(session.current_log().events), text);
    }
    session.submit(t + 300, t + 350);
    const auto& log = session.completed().back();
    ASSERT_EQ(replay(log.events), log.transcribed);
  }
}

TEST(LoadPhrases, FiltersAndNormalises) {
  const auto lex = star::test::small_lexicon({{"the", 5}, {"cat", 3}, {"runs", 1}});
  std::istringstream in("the cat\nxqzt runs\n  The   Cat  \n\nthe cat!\n");
  const auto set = load_phrases(in, lex, "mem");
  EXPECT_EQ(set.phrases, (std::vector<std::string>{"the cat", "the cat"}));
  EXPECT_EQ(set.removed_oov, 1u);
  EXPECT_EQ(set.removed_invalid, 1u);
  EXPECT_EQ(set.source, "mem");

  std::istringstream none("xqzt\n");
  EXPECT_THROW(load_phrases(none, lex), Error);
}

TEST(LoadPhrases, ShippedSetCountsAreStable) {
  const auto a = load_phrases_file(star::test::data_path("phrases.txt"), shipped());
  const auto b = load_phrases_file(star::test::data_path("phrases.txt"), shipped());
  EXPECT_EQ(a.phrases, b.phrases);
  EXPECT_EQ(a.phrases.size(), 163u);
  EXPECT_EQ(a.removed_oov + a.removed_invalid, 64u);
  for (const auto& p : a.phrases) {
    ASSERT_FALSE(p.empty());
    ASSERT_EQ(p.find("  "), std::string::npos);
    ASSERT_NE(p.front(), ' ');
    ASSERT_NE(p.back(), ' ');
  }
}

TEST(PhraseSchedule, SeededAndDistinct) {
  std::vector<std::string> pool;
  for (int i = 0; i < 30; ++i) pool.push_back("phrase " + std::to_string(i));
  PhraseSchedule a(pool, 5);
  PhraseSchedule b(pool, 5);
  std::set<std::string> seen;
  for (int i = 0; i < 10; ++i) {
    const std::string p = a.next();
    EXPECT_EQ(p, b.next());
    seen.insert(p);
  }
  EXPECT_EQ(seen.size(), 10u);

  PhraseSchedule c(pool, 6);
  bool differs = false;
  PhraseSchedule d(pool, 5);
  for (int i = 0; i < 10; ++i) differs |= c.next() != d.next();
  EXPECT_TRUE(differs);
}

TEST(PhraseSchedule, ExhaustionWithoutReplacement) {
  PhraseSchedule s({"a", "b", "c"}, 1);
  for (int i = 0; i < 3; ++i) s.next();
  EXPECT_EQ(s.remaining(), 0u);
  EXPECT_THROW(s.next(), Error);

  PhraseSchedule r({"a", "b", "c"}, 1, true);
  for (int i = 0; i < 10; ++i) EXPECT_NO_THROW(r.next());
}

TEST(Session, NextTrialUsesSchedule) {
  Fixture f;
  PhraseSchedule schedule({"a", "b", "c"}, 9);
  PhraseSchedule twin({"a", "b", "c"}, 9);
  f.session.next_trial(schedule);
  EXPECT_EQ(f.session.presented(), twin.next());
  EXPECT_THROW(f.session.next_trial(schedule), Error);
  f.tap('a');
  f.press(labels::submit);
  f.session.next_trial(schedule);
  EXPECT_EQ(f.session.presented(), twin.next());
}
