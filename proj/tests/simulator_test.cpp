// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "star/error.hpp"
#include "star/simulator.hpp"
#include "test_support.hpp"

using namespace star;

namespace {

const Lexicon& shipped() {
  static const Lexicon lex = load_lexicon_file(star::test::data_path("lexicon.tsv"));
  return lex;
}

const PhraseSet& phrases() {
  static const PhraseSet set = load_phrases_file(star::test::data_path("phrases.txt"), shipped());
  return set;
}

TypistProfile noiseless(double iki = 315.0) {
  TypistProfile p;
  p.iki_mean_ms = iki;
  p.iki_sd_ms = 0.0;
  p.kpd_mean_ms = 84.0;
  p.kpd_sd_ms = 0.0;
  p.p_notice_error = 1.0;
  p.suggestions.enabled = false;
  return p;
}

std::vector<CapacitanceSample> at_10ms(std::initializer_list<double> values) {
  std::vector<CapacitanceSample> out;
  double t = 0;
  for (double v : values) {
    out.push_back({t, v});
    t += 10;
  }
  return out;
}

}  // namespace

TEST(Debounce, Examples) {
  DebounceState s;
  EXPECT_EQ(debounce(at_10ms({0, 100, 260, 240, 190}), s), (std::vector<TapInterval>{{20, 40}}));
  DebounceState quiet;
  EXPECT_TRUE(debounce(at_10ms({0, 199, 150, 199}), quiet).empty());
  DebounceState band;
  EXPECT_EQ(debounce(at_10ms({260, 230, 260, 190}), band).size(), 1u);
}

TEST(Debounce, ThresholdsAreStrict) {
  DebounceState s;
  EXPECT_TRUE(debounce(at_10ms({250, 250, 100}), s).empty());
  DebounceState t;
  const auto taps = debounce(at_10ms({251, 200, 200, 199}), t);
  EXPECT_EQ(taps, (std::vector<TapInterval>{{0, 30}}));
}

TEST(Debounce, OpenTapCarriesAcrossCalls) {
  DebounceState s;
  EXPECT_TRUE(debounce(at_10ms({0, 300}), s).empty());
  EXPECT_TRUE(s.engaged);
  const std::vector<CapacitanceSample> rest{{30, 220}, {40, 150}};
  EXPECT_EQ(debounce(rest, s), (std::vector<TapInterval>{{10, 40}}));
  EXPECT_FALSE(s.engaged);
}

TEST(Debounce, RejectsUnorderedStreamsAndInvertedThresholds) {
  DebounceState s;
  const std::vector<CapacitanceSample> bad{{10, 0}, {5, 300}};
  EXPECT_THROW(debounce(bad, s), Error);
  DebounceState inverted{200, 250};
  EXPECT_THROW(debounce(at_10ms({0}), inverted), Error);
}

TEST(Debounce, MatchesReferenceAutomaton) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> value(100, 350);
  std::uniform_real_distribution<double> step(0, 20);
  for (int i = 0; i < 10000; ++i) {
    std::vector<CapacitanceSample> stream(i % 60);
    double t = 0;
    for (auto& s : stream) s = {t += step(rng), value(rng)};
    DebounceState state;
    ASSERT_EQ(debounce(stream, state), oracle::reference_debounce(stream, 250, 200));
  }
}

TEST(Profile, Validation) {
  TypistProfile p;
  EXPECT_NO_THROW(p.validate());
  p.motor_sigma_mm = -1;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.p_notice_error = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.iki_sd_ms = -3;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Profile, JsonRoundTripAndShippedFiles) {
  TypistProfile p;
  p.name = "x";
  p.motor_sigma_mm = 1.25;
  p.jitter_model = JitterModel::gaussian;
  p.suggestions.min_typed_letters = 3;
  const auto q = profile_from_json(profile_to_json(p));
  EXPECT_EQ(profile_to_json(q), profile_to_json(p));
  for (auto file : {"profiles/star.json", "profiles/smartphone.json"})
    EXPECT_NO_THROW(load_profile_file(star::test::data_path(file)).validate()) << file;
  const auto star = load_profile_file(star::test::data_path("profiles/star.json"));
  EXPECT_EQ(star.iki_mean_ms, 585.0);
  EXPECT_EQ(star.kpd_mean_ms, 139.0);
  const auto phone = load_profile_file(star::test::data_path("profiles/smartphone.json"));
  EXPECT_EQ(phone.iki_mean_ms, 315.0);
  EXPECT_EQ(phone.kpd_mean_ms, 84.0);
}

TEST(MotorModel, NoiselessTapsHitTheKeyCentre) {
  const auto layout = build_layout("enlarged");
  const auto p = noiseless();
  MotorModel motor(p, layout);
  Rng rng(1);
  const auto tap = motor.tap("k", 0, 80, rng);
  EXPECT_EQ(tap.registered_point, key_center(layout, "k"));
  EXPECT_EQ(tap.aimed_point, tap.target);
}

TEST(MotorModel, StationaryAimMakesLatencyInvisible) {
  const auto layout = build_layout("enlarged");
  auto p = noiseless();
  p.latency_ms = 90;
  p.settle_ms = 0;
  MotorModel motor(p, layout);
  Rng rng(2);
  double t = 0;
  for (int i = 0; i < 5; ++i, t += 300) {
    const auto tap = motor.tap("g", t, t + 80, rng);
    EXPECT_EQ(tap.registered_point, key_center(layout, "g"));
  }
}

TEST(MotorModel, MovingAimIsSampledLatencyEarlier) {
  const auto layout = build_layout("enlarged");
  auto p = noiseless();
  p.latency_ms = 90;
  p.settle_ms = 0;
  MotorModel motor(p, layout);
  Rng rng(3);
  const TouchPoint a = key_center(layout, "a");
  const TouchPoint l = key_center(layout, "l");
  motor.tap("a", 0, 100, rng);
  // Travel from 'a' (t=100) to 'l' (arrives at t=400); sampled at t=310.
  const auto tap = motor.tap("l", 400, 480, rng);
  const double f = (310.0 - 100.0) / (400.0 - 100.0);
  EXPECT_NEAR(tap.registered_point.x, a.x + f * (l.x - a.x), 1e-12);
  EXPECT_NEAR(tap.registered_point.y, a.y + f * (l.y - a.y), 1e-12);

  // Settling before the sample point removes the offset again.
  auto settled = p;
  settled.settle_ms = 120;
  MotorModel calm(settled, layout);
  calm.tap("a", 0, 100, rng);
  EXPECT_EQ(calm.tap("l", 400, 480, rng).registered_point, l);
}

TEST(MotorModel, RegisteredIsAimedPlusBoundedJitterWhenSettled) {
  const auto layout = build_layout("enlarged");
  auto p = noiseless();
  p.motor_sigma_mm = 2.0;
  p.jitter_amplitude_mm = 1.0;
  MotorModel motor(p, layout);
  Rng rng(4);
  double t = 0;
  for (int i = 0; i < 2000; ++i, t += 400) {
    const auto tap = motor.tap(std::string(1, char('a' + i % 26)), t, t + 100, rng);
    const TouchPoint j = tap.registered_point - tap.aimed_point;
    ASSERT_EQ(tap.tracked_point, tap.aimed_point);
    ASSERT_LE(std::abs(j.x), 1.0);
    ASSERT_LE(std::abs(j.y), 1.0);
  }
}

TEST(MotorModel, MistypeRateGrowsWithMotorNoise) {
  const auto layout = build_layout("enlarged");
  double previous = -1;
  for (double sigma : {0.0, 1.0, 2.0, 3.0, 4.0, 6.0}) {
    auto p = noiseless();
    p.motor_sigma_mm = sigma;
    MotorModel motor(p, layout);
    Rng rng(5);
    int wrong = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const std::string label(1, char('a' + i % 26));
      wrong += register_tap(layout, motor.tap(label, 0, 1, rng).registered_point).label != label;
      motor.reset();
    }
    const double rate = double(wrong) / n;
    EXPECT_GE(rate, previous) << "sigma " << sigma;
    previous = rate;
  }
  EXPECT_GT(previous, 0.3);
}

TEST(SimulateTrial, NoiselessTypistIsExact) {
  const auto layout = build_layout("enlarged");
  for (std::size_t i = 0; i < phrases().phrases.size(); i += 7) {
    const auto& phrase = phrases().phrases[i];
    const auto log = simulate_trial(noiseless(), phrase, layout, shipped(), {}, 100 + i);
    ASSERT_EQ(log.transcribed, phrase);
    ASSERT_EQ(uncorrected_error_rate(log), 0.0);
    ASSERT_EQ(backspace_count(log), 0u);
    ASSERT_TRUE(log.submitted());
  }
}

TEST(SimulateTrial, LastWordSuggestionDropsItsSpace) {
  const auto layout = build_layout("enlarged");
  auto profile = noiseless();
  profile.suggestions.enabled = true;
  std::size_t last_word_suggestions = 0;
  for (std::size_t i = 0; i < phrases().phrases.size(); i += 3) {
    const auto& phrase = phrases().phrases[i];
    const auto log = simulate_trial(profile, phrase, layout, shipped(), {}, 7 + i);
    ASSERT_EQ(log.transcribed, phrase);
    std::vector<EventKind> kinds;
    for (const auto& e : log.events) kinds.push_back(e.kind);
    ASSERT_GE(kinds.size(), 3u);
    ASSERT_EQ(kinds.back(), EventKind::submit);
    // The only erase a noiseless typist makes is the space after a final suggestion.
    const bool ends_with_suggestion =
        kinds[kinds.size() - 2] == EventKind::backspace && kinds[kinds.size() - 3] == EventKind::suggestion;
    ASSERT_EQ(backspace_count(log), ends_with_suggestion ? 1u : 0u) << phrase;
    last_word_suggestions += ends_with_suggestion;
  }
  EXPECT_GT(last_word_suggestions, 0u);
}

TEST(SimulateTrial, FixedIntervalGivesClosedFormSpeed) {
  const auto layout = build_layout("original");
  const auto log =
      simulate_trial(noiseless(315), "the quick brown fox jumps over the lazy dog", layout, shipped(), {}, 1);
  EXPECT_NEAR(wpm(log), 12000.0 / 315.0, 1e-9);
  EXPECT_NEAR(wpm(log), 38.1, 0.5);
  EXPECT_DOUBLE_EQ(mean_kpd(log), 84.0);
}

TEST(SimulateTrial, DeterministicInSeed) {
  const auto layout = build_layout("enlarged");
  const auto profile = load_profile_file(star::test::data_path("profiles/star.json"));
  const std::string phrase = phrases().phrases.front();
  const auto a = simulate_trial(profile, phrase, layout, shipped(), {}, 99);
  const auto b = simulate_trial(profile, phrase, layout, shipped(), {}, 99);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    ASSERT_EQ(a.events[i].t_down, b.events[i].t_down);
    ASSERT_EQ(a.events[i].touch, b.events[i].touch);
    ASSERT_EQ(a.events[i].label, b.events[i].label);
  }
  bool differs = false;
  for (std::uint64_t seed = 100; seed < 110 && !differs; ++seed)
    differs = simulate_trial(profile, phrase, layout, shipped(), {}, seed).events.front().t_up != a.events.front().t_up;
  EXPECT_TRUE(differs);
}

TEST(SimulateTrial, NoisyTypistStillSubmitsConsistentLogs) {
  const auto layout = build_layout("enlarged");
  auto profile = load_profile_file(star::test::data_path("profiles/star.json"));
  profile.motor_sigma_mm = 4.0;
  profile.p_notice_error = 0.5;
  for (int i = 0; i < 40; ++i) {
    const auto& phrase = phrases().phrases[i];
    const auto log = simulate_trial(profile, phrase, layout, shipped(), {}, 7000 + i);
    ASSERT_TRUE(log.submitted());
    ASSERT_EQ(replay(log.events), log.transcribed);
    ASSERT_NO_THROW(compute_metrics(log));
  }
}

TEST(SimulateTrial, RejectsBadPhrases) {
  const auto layout = build_layout("enlarged");
  TypistProfile p = noiseless();
  EXPECT_THROW(simulate_trial(p, "", layout, shipped(), {}, 1), Error);
  EXPECT_THROW(simulate_trial(p, "Hello", layout, shipped(), {}, 1), Error);
  p.suggestions.enabled = true;
  EXPECT_THROW(simulate_trial(p, "the xqzvw", layout, shipped(), {}, 1), Error);
}
