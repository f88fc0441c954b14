// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "star/decoder.hpp"
#include "star/geometry.hpp"
#include "star/lexicon.hpp"
#include "star/metrics.hpp"

namespace star {

struct PhraseSet {
  std::string source;
  std::vector<std::string> phrases;
  /// Phrases dropped for containing out-of-lexicon words.
  std::size_t removed_oov = 0;
  /// Lines dropped for characters other than letters and spaces.
  std::size_t removed_invalid = 0;
};

/// Lowercases, collapses whitespace, drops phrases with non-letter
/// characters or any word missing from the lexicon. Throws data_error when
/// nothing survives.
PhraseSet load_phrases(std::istream& in, const Lexicon& lex, std::string source = "<stream>");
PhraseSet load_phrases_file(const std::string& path, const Lexicon& lex);

/// Seeded phrase order. Without replacement the pool is shuffled once and
/// consumed in order; with replacement it is reshuffled on each pass.
class PhraseSchedule {
 public:
  PhraseSchedule(std::vector<std::string> pool, std::uint64_t seed, bool with_replacement = false);

  /// Throws usage_error once a no-replacement pool is exhausted.
  const std::string& next();
  std::size_t remaining() const;

 private:
  void shuffle();

  std::vector<std::string> pool_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::uint64_t seed_;
  std::uint64_t pass_ = 0;
  bool with_replacement_;
};

enum class Phase : std::uint8_t { preparation, phrase_shown, transcribing, submitted };

std::string_view to_string(Phase phase);

struct DecoderOptions {
  std::optional<double> sigma;
  BeamParams beam;
};

/// Bookkeeping copied into each trial's log header.
struct TrialMeta {
  std::string condition;
  std::string group;
  int group_index = 0;
  int block = 1;
  int trial = 1;
  std::uint64_t seed = 0;
};

// User actions accepted by Session::apply.
struct ShowPhrase {
  std::string phrase;
  TrialMeta meta;
};
/// A touch on the keyboard plane, registered through register_tap.
struct Touch {
  TouchPoint point;
  double t_down = 0.0;
  double t_up = 0.0;
};
/// A press on a key named directly, e.g. by a UI button.
struct Press {
  std::string label;
  double t_down = 0.0;
  double t_up = 0.0;
  std::optional<TouchPoint> point;
};
using UserAction = std::variant<ShowPhrase, Touch, Press>;

/// Interactive transcription state machine:
/// preparation -> phrase_shown -> transcribing -> submitted -> phrase_shown ...
/// Single-threaded; callers serialise access.
class Session {
 public:
  Session(const KeyboardLayout& layout, const Lexicon& lexicon, DecoderOptions decoder = {});

  /// Throws usage_error on an action that is illegal in the current phase.
  void apply(const UserAction& action);

  void show_phrase(std::string phrase, TrialMeta meta = {});
  /// Registers the touch and applies the resulting key. Returns that key.
  const Key& touch(TouchPoint p, double t_down, double t_up);
  void press(std::string_view label, double t_down, double t_up, std::optional<TouchPoint> point = std::nullopt);
  void submit(double t_down, double t_up);
  /// Shows the next scheduled phrase; legal before the first trial and
  /// after a submit.
  void next_trial(PhraseSchedule& schedule, TrialMeta meta = {});

  Phase phase() const { return phase_; }
  const std::string& presented() const { return current_.presented; }
  const std::string& committed() const { return committed_; }
  /// Taps of the partial word after the last space, one per letter.
  std::vector<TouchPoint> tap_context() const;
  const SuggestionPair& suggestions() const;
  /// Log of the trial in progress (or the one just submitted).
  const TrialLog& current_log() const { return current_; }
  const std::vector<TrialLog>& completed() const { return completed_; }
  const KeyboardLayout& layout() const { return *layout_; }
  const Lexicon& lexicon() const { return *lexicon_; }
  const SpatialModel& model() const { return model_; }
  const DecoderOptions& decoder_options() const { return decoder_; }

 private:
  void apply_key(const Key& key, double t_down, double t_up, std::optional<TouchPoint> point);
  void require_typing_phase(std::string_view what) const;
  std::size_t partial_word_length() const;

  const KeyboardLayout* layout_;
  const Lexicon* lexicon_;
  SpatialModel model_;
  DecoderOptions decoder_;

  Phase phase_ = Phase::preparation;
  TrialLog current_;
  std::string committed_;
  // One entry per committed character; spaces hold nullopt.
  std::vector<std::optional<TouchPoint>> char_taps_;
  mutable std::optional<SuggestionPair> suggestions_;
  std::vector<TrialLog> completed_;
};

}  // namespace star
