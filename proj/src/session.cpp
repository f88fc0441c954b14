// SPDX-License-Identifier: Apache-2.0
#include "star/session.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "star/error.hpp"
#include "star/random.hpp"

namespace star {
namespace {

// Lowercased, single-spaced; nullopt if anything but letters and spaces.
std::optional<std::string> normalize_phrase(std::string_view line) {
  std::string out;
  bool pending_space = false;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
    if (c < 'a' || c > 'z') return std::nullopt;
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

}  // namespace

PhraseSet load_phrases(std::istream& in, const Lexicon& lex, std::string source) {
  PhraseSet set;
  set.source = std::move(source);
  std::string line;
  while (std::getline(in, line)) {
    auto phrase = normalize_phrase(line);
    if (!phrase) {
      ++set.removed_invalid;
      continue;
    }
    if (phrase->empty()) continue;
    std::istringstream words(*phrase);
    std::string word;
    bool known = true;
    while (words >> word) known = known && lex.contains_word(word);
    if (!known) {
      ++set.removed_oov;
      continue;
    }
    set.phrases.push_back(std::move(*phrase));
  }
  if (set.phrases.empty()) throw data_error("no usable phrases in " + set.source);
  return set;
}

PhraseSet load_phrases_file(const std::string& path, const Lexicon& lex) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open phrase file " + path);
  return load_phrases(in, lex, path);
}

PhraseSchedule::PhraseSchedule(std::vector<std::string> pool, std::uint64_t seed, bool with_replacement)
    : pool_(std::move(pool)), seed_(seed), with_replacement_(with_replacement) {
  if (pool_.empty()) throw usage_error("phrase schedule needs a non-empty pool");
  shuffle();
}

void PhraseSchedule::shuffle() {
  order_.resize(pool_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  Rng rng(derive_seed(seed_, {pass_}));
  // Fisher-Yates with the portable generator.
  for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng.below(i)]);
  cursor_ = 0;
}

const std::string& PhraseSchedule::next() {
  if (cursor_ == order_.size()) {
    if (!with_replacement_)
      throw usage_error("phrase pool of " + std::to_string(pool_.size()) + " exhausted without replacement");
    ++pass_;
    shuffle();
  }
  return pool_[order_[cursor_++]];
}

std::size_t PhraseSchedule::remaining() const { return order_.size() - cursor_; }

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::preparation: return "preparation";
    case Phase::phrase_shown: return "phrase_shown";
    case Phase::transcribing: return "transcribing";
    case Phase::submitted: return "submitted";
  }
  return "unknown";
}

Session::Session(const KeyboardLayout& layout, const Lexicon& lexicon, DecoderOptions decoder)
    : layout_(&layout), lexicon_(&lexicon), model_(layout, decoder.sigma), decoder_(decoder) {}

void Session::apply(const UserAction& action) {
  std::visit(
      [this](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ShowPhrase>) {
          show_phrase(a.phrase, a.meta);
        } else if constexpr (std::is_same_v<T, Touch>) {
          touch(a.point, a.t_down, a.t_up);
        } else {
          press(a.label, a.t_down, a.t_up, a.point);
        }
      },
      action);
}

void Session::show_phrase(std::string phrase, TrialMeta meta) {
  if (phase_ != Phase::preparation && phase_ != Phase::submitted)
    throw usage_error("cannot show a phrase while a trial is in progress");
  current_ = TrialLog{};
  current_.presented = std::move(phrase);
  current_.layout = layout_->name();
  current_.condition = std::move(meta.condition);
  current_.group = meta.group.empty() ? current_.condition : std::move(meta.group);
  current_.group_index = meta.group_index;
  current_.block = meta.block;
  current_.trial = meta.trial;
  current_.seed = meta.seed;
  committed_.clear();
  char_taps_.clear();
  suggestions_.reset();
  phase_ = Phase::phrase_shown;
}

void Session::next_trial(PhraseSchedule& schedule, TrialMeta meta) {
  if (phase_ != Phase::preparation && phase_ != Phase::submitted)
    throw usage_error("next trial requires the previous one to be submitted");
  show_phrase(schedule.next(), std::move(meta));
}

void Session::require_typing_phase(std::string_view what) const {
  if (phase_ != Phase::phrase_shown && phase_ != Phase::transcribing)
    throw usage_error(std::string(what) + " is not allowed in phase " + std::string(to_string(phase_)));
}

const Key& Session::touch(TouchPoint p, double t_down, double t_up) {
  require_typing_phase("touch");
  const Key& key = register_tap(*layout_, p);
  apply_key(key, t_down, t_up, p);
  return key;
}

void Session::press(std::string_view label, double t_down, double t_up, std::optional<TouchPoint> point) {
  const Key& key = layout_->key(label);
  if (key.kind() != KeyKind::submit) require_typing_phase("key press");
  apply_key(key, t_down, t_up, point);
}

void Session::submit(double t_down, double t_up) { press(labels::submit, t_down, t_up); }

std::size_t Session::partial_word_length() const {
  const auto space = committed_.find_last_of(' ');
  return space == std::string::npos ? committed_.size() : committed_.size() - space - 1;
}

std::vector<TouchPoint> Session::tap_context() const {
  std::vector<TouchPoint> taps;
  const std::size_t n = partial_word_length();
  for (std::size_t i = committed_.size() - n; i < committed_.size(); ++i) {
    // Letters that came from a suggestion have no touch; their key centre
    // stands in so backspacing into such a word still decodes it.
    taps.push_back(char_taps_[i].value_or(layout_->letter_key(committed_[i] - 'a').center));
  }
  return taps;
}

const SuggestionPair& Session::suggestions() const {
  if (!suggestions_) {
    const auto taps = tap_context();
    suggestions_ = taps.empty() ? SuggestionPair{} : suggest(model_, *lexicon_, taps, decoder_.beam);
  }
  return *suggestions_;
}

void Session::apply_key(const Key& key, double t_down, double t_up, std::optional<TouchPoint> point) {
  if (key.kind() == KeyKind::submit && phase_ != Phase::phrase_shown && phase_ != Phase::transcribing)
    throw usage_error("submit is not allowed in phase " + std::string(to_string(phase_)));
  if (!(t_up >= t_down)) throw usage_error("key-up must not precede key-down");
  if (!current_.events.empty() && t_down < current_.events.back().t_down)
    throw usage_error("events must arrive in key-down order");

  InputEvent e;
  e.t_down = t_down;
  e.t_up = t_up;
  e.label = key.label;
  e.touch = point;

  switch (key.kind()) {
    case KeyKind::letter:
      e.kind = EventKind::letter;
      e.insert = std::string(1, key.letter());
      char_taps_.push_back(point.value_or(key.center));
      break;
    case KeyKind::space:
      e.kind = EventKind::space;
      e.insert = " ";
      char_taps_.push_back(std::nullopt);
      break;
    case KeyKind::backspace:
      e.kind = EventKind::backspace;
      if (!committed_.empty()) {
        e.erase = 1;
        char_taps_.pop_back();
      }
      break;
    case KeyKind::suggestion: {
      e.kind = EventKind::suggestion;
      const SuggestionPair& pair = suggestions();
      const auto& slot = key.label == labels::suggestion0 ? pair.first : pair.second;
      if (slot) {
        // Replaces the partial word and appends one space.
        e.erase = partial_word_length();
        e.insert = slot->word + " ";
        char_taps_.resize(char_taps_.size() - e.erase);
        char_taps_.insert(char_taps_.end(), slot->word.size(), std::nullopt);
        char_taps_.push_back(std::nullopt);
      }
      break;
    }
    case KeyKind::submit:
      e.kind = EventKind::submit;
      break;
  }

  committed_.resize(committed_.size() - e.erase);
  committed_ += e.insert;
  current_.events.push_back(std::move(e));
  suggestions_.reset();

  if (key.kind() == KeyKind::submit) {
    current_.transcribed = committed_;
    completed_.push_back(current_);
    phase_ = Phase::submitted;
  } else if (phase_ == Phase::phrase_shown) {
    phase_ = Phase::transcribing;
  }
}

}  // namespace star
