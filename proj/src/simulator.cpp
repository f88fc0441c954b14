// SPDX-License-Identifier: Apache-2.0
#include "star/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "star/error.hpp"

namespace star {
namespace {

std::string_view to_string(JitterModel m) { return m == JitterModel::uniform ? "uniform" : "gaussian"; }

JitterModel jitter_model_from_string(std::string_view s) {
  if (s == "uniform") return JitterModel::uniform;
  if (s == "gaussian") return JitterModel::gaussian;
  throw usage_error("unknown jitter model '" + std::string(s) + "'");
}

bool is_prefix(std::string_view prefix, std::string_view of) {
  return prefix.size() <= of.size() && of.substr(0, prefix.size()) == prefix;
}

std::size_t common_prefix(std::string_view a, std::string_view b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return n;
}

std::string label_for_char(char c) { return c == ' ' ? std::string(labels::space) : std::string(1, c); }

// Drives one Session with a simulated typist. `goal` is the text the typist
// currently wants in the field: the phrase prefix, amended by any errors
// they failed to notice.
class Typist {
 public:
  Typist(const TypistProfile& profile, const KeyboardLayout& layout, Session& session, Rng& rng)
      : profile_(profile), layout_(layout), session_(session), motor_(profile, layout), rng_(rng) {}

  void run(std::string_view phrase) {
    const std::size_t max_taps = 8 * phrase.size() + 64;
    while (session_.phase() != Phase::submitted) {
      const std::string& committed = session_.committed();
      if (committed == goal_ && goal_.size() >= phrase.size()) break;
      if (taps_ >= max_taps) break;

      if (common_prefix(committed, goal_) < committed.size()) {
        // A noticed typo inside the current word is fixed by the suggestion
        // when the decoder offers the target anyway.
        if (!try_suggestion(phrase)) tap(labels::backspace);
        continue;
      }
      if (committed == goal_) {
        if (try_suggestion(phrase)) continue;
        goal_ += phrase[goal_.size()];
      }
      type_next_char();
    }
    if (session_.phase() != Phase::submitted) {
      const double t_down = advance_clock();
      session_.submit(t_down, t_down + rng_.positive_normal(profile_.kpd_mean_ms, profile_.kpd_sd_ms));
    }
  }

 private:
  double advance_clock() {
    clock_ += rng_.positive_normal(profile_.iki_mean_ms, profile_.iki_sd_ms);
    return clock_;
  }

  void tap(std::string_view label) {
    const double t_down = advance_clock();
    const double t_up = t_down + rng_.positive_normal(profile_.kpd_mean_ms, profile_.kpd_sd_ms);
    const SimulatedTap s = motor_.tap(label, t_down, t_up, rng_);
    ++taps_;
    // Submit takes a deliberate press; a stray touch on it registers nothing.
    if (layout_.key(labels::submit).contains(s.registered_point)) return;
    session_.touch(s.registered_point, s.t_down, s.t_up);
  }

  void type_next_char() {
    const std::string before = session_.committed();
    tap(label_for_char(goal_[before.size()]));
    if (session_.phase() == Phase::submitted) return;
    const std::string& after = session_.committed();
    if (is_prefix(after, goal_)) return;
    const bool substitution = after.size() == before.size() + 1 && is_prefix(before, after);
    // Control-key slips (a stray backspace or suggestion) are always seen;
    // a wrong character is seen with probability p_notice_error.
    if (substitution && !rng_.bernoulli(profile_.p_notice_error)) {
      goal_ = after + goal_.substr(after.size());
    }
  }

  bool try_suggestion(std::string_view phrase) {
    const SuggestionPolicy& policy = profile_.suggestions;
    if (!policy.enabled) return false;
    const std::string& committed = session_.committed();
    const auto last_space = committed.find_last_of(' ');
    const std::size_t word_start = last_space == std::string::npos ? 0 : last_space + 1;
    const std::size_t typed = committed.size() - word_start;
    if (common_prefix(committed, goal_) < word_start) return false;
    if (typed == 0 || typed < static_cast<std::size_t>(policy.min_typed_letters)) return false;
    if (word_start > phrase.size() || (word_start > 0 && phrase[word_start - 1] != ' ')) return false;
    const auto word_end = std::min(phrase.find(' ', word_start), phrase.size());
    if (committed.size() > word_end) return false;
    if (word_end == phrase.size() && !policy.use_on_last_word) return false;

    const std::string target(phrase.substr(word_start, word_end - word_start));
    const SuggestionPair& pair = session_.suggestions();
    std::string_view slot;
    if (pair.first && pair.first->word == target) {
      slot = labels::suggestion0;
    } else if (policy.accept_second && pair.second && pair.second->word == target) {
      slot = labels::suggestion1;
    } else {
      return false;
    }
    // On the last word the inserted space is extra and gets erased.
    goal_ = committed.substr(0, word_start) + target + (word_end == phrase.size() ? "" : " ");
    tap(slot);
    return true;
  }

  const TypistProfile& profile_;
  const KeyboardLayout& layout_;
  Session& session_;
  MotorModel motor_;
  Rng& rng_;
  std::string goal_;
  double clock_ = 0.0;
  std::size_t taps_ = 0;
};

}  // namespace

void TypistProfile::validate() const {
  for (double v : {iki_mean_ms, iki_sd_ms, kpd_mean_ms, kpd_sd_ms, latency_ms, settle_ms}) {
    if (!(v >= 0) || !std::isfinite(v)) throw usage_error("profile '" + name + "': times must be >= 0");
  }
  if (!(motor_sigma_mm >= 0) || !(jitter_amplitude_mm >= 0))
    throw usage_error("profile '" + name + "': noise parameters must be >= 0");
  if (!(p_notice_error >= 0 && p_notice_error <= 1))
    throw usage_error("profile '" + name + "': p_notice_error must lie in [0, 1]");
  if (suggestions.min_typed_letters < 0)
    throw usage_error("profile '" + name + "': min_typed_letters must be >= 0");
}

nlohmann::json profile_to_json(const TypistProfile& p) {
  return {{"name", p.name},
          {"iki_mean_ms", p.iki_mean_ms},
          {"iki_sd_ms", p.iki_sd_ms},
          {"kpd_mean_ms", p.kpd_mean_ms},
          {"kpd_sd_ms", p.kpd_sd_ms},
          {"motor_sigma_mm", p.motor_sigma_mm},
          {"jitter_amplitude_mm", p.jitter_amplitude_mm},
          {"jitter_model", to_string(p.jitter_model)},
          {"latency_ms", p.latency_ms},
          {"settle_ms", p.settle_ms},
          {"p_notice_error", p.p_notice_error},
          {"suggestion_policy",
           {{"enabled", p.suggestions.enabled},
            {"min_typed_letters", p.suggestions.min_typed_letters},
            {"accept_second", p.suggestions.accept_second},
            {"use_on_last_word", p.suggestions.use_on_last_word}}}};
}

TypistProfile profile_from_json(const nlohmann::json& j) {
  TypistProfile p;
  try {
    p.name = j.value("name", p.name);
    p.iki_mean_ms = j.value("iki_mean_ms", p.iki_mean_ms);
    p.iki_sd_ms = j.value("iki_sd_ms", p.iki_sd_ms);
    p.kpd_mean_ms = j.value("kpd_mean_ms", p.kpd_mean_ms);
    p.kpd_sd_ms = j.value("kpd_sd_ms", p.kpd_sd_ms);
    p.motor_sigma_mm = j.value("motor_sigma_mm", p.motor_sigma_mm);
    p.jitter_amplitude_mm = j.value("jitter_amplitude_mm", p.jitter_amplitude_mm);
    p.jitter_model = jitter_model_from_string(j.value("jitter_model", std::string("uniform")));
    p.latency_ms = j.value("latency_ms", p.latency_ms);
    p.settle_ms = j.value("settle_ms", p.settle_ms);
    p.p_notice_error = j.value("p_notice_error", p.p_notice_error);
    if (j.contains("suggestion_policy")) {
      const auto& s = j.at("suggestion_policy");
      p.suggestions.enabled = s.value("enabled", p.suggestions.enabled);
      p.suggestions.min_typed_letters = s.value("min_typed_letters", p.suggestions.min_typed_letters);
      p.suggestions.accept_second = s.value("accept_second", p.suggestions.accept_second);
      p.suggestions.use_on_last_word = s.value("use_on_last_word", p.suggestions.use_on_last_word);
    }
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("malformed typist profile: ") + e.what());
  }
  p.validate();
  return p;
}

TypistProfile load_profile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open profile " + path);
  try {
    return profile_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw usage_error("profile " + path + ": " + e.what());
  }
}

MotorModel::MotorModel(const TypistProfile& profile, const KeyboardLayout& layout)
    : profile_(&profile), layout_(&layout) {}

SimulatedTap MotorModel::tap(std::string_view label, double t_down, double t_up, Rng& rng) {
  SimulatedTap s;
  s.intended_label = std::string(label);
  s.target = layout_->key(label).center;
  s.t_down = t_down;
  s.t_up = t_up;

  const double sigma = profile_->motor_sigma_mm;
  s.aimed_point = s.target + TouchPoint{rng.normal(0, sigma), rng.normal(0, sigma)};

  s.tracked_point = s.aimed_point;
  if (previous_ && profile_->latency_ms > 0) {
    const double sample_time = t_down - profile_->latency_ms;
    const double leave = previous_->t_up;
    const double arrive = t_down - profile_->settle_ms;
    if (sample_time <= leave) {
      s.tracked_point = previous_->aimed;
    } else if (sample_time < arrive) {
      const double f = (sample_time - leave) / (arrive - leave);
      s.tracked_point = previous_->aimed + f * (s.aimed_point - previous_->aimed);
    }
  }

  const double a = profile_->jitter_amplitude_mm;
  TouchPoint jitter;
  if (profile_->jitter_model == JitterModel::uniform) {
    jitter = {rng.uniform(-a, a), rng.uniform(-a, a)};
  } else {
    jitter = {rng.normal(0, a), rng.normal(0, a)};
  }
  s.registered_point = s.tracked_point + jitter;

  previous_ = Previous{s.aimed_point, t_up};
  return s;
}

TrialLog simulate_trial(const TypistProfile& profile, std::string_view phrase, const KeyboardLayout& layout,
                        const Lexicon& lexicon, const DecoderOptions& decoder, std::uint64_t seed,
                        TrialMeta meta) {
  profile.validate();
  if (phrase.empty()) throw usage_error("cannot simulate an empty phrase");
  if (phrase.find_first_not_of("abcdefghijklmnopqrstuvwxyz ") != std::string_view::npos)
    throw usage_error("phrases may only contain lowercase letters and spaces");
  if (profile.suggestions.enabled) {
    std::istringstream words{std::string(phrase)};
    std::string word;
    while (words >> word) {
      if (!lexicon.contains_word(word))
        throw usage_error("word '" + word + "' is not in the lexicon; suggestions cannot produce it");
    }
  }

  Session session(layout, lexicon, decoder);
  meta.seed = seed;
  session.show_phrase(std::string(phrase), meta);
  Rng rng(seed);
  Typist typist(profile, layout, session, rng);
  typist.run(phrase);
  return session.completed().back();
}

std::vector<TapInterval> debounce(std::span<const CapacitanceSample> stream, DebounceState& state) {
  if (!(state.engage_threshold > state.release_threshold))
    throw usage_error("engage threshold must exceed the release threshold");
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].t_ms < stream[i - 1].t_ms) throw usage_error("capacitance stream is not time-ordered");
  }
  std::vector<TapInterval> taps;
  for (const CapacitanceSample& s : stream) {
    if (!state.engaged && s.value > state.engage_threshold) {
      state.engaged = true;
      state.engaged_at = s.t_ms;
    } else if (state.engaged && s.value < state.release_threshold) {
      state.engaged = false;
      taps.push_back({state.engaged_at, s.t_ms});
    }
  }
  return taps;
}

}  // namespace star
