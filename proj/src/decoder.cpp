// SPDX-License-Identifier: Apache-2.0
#include "star/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "star/error.hpp"

namespace star {
namespace {

struct Beam {
  std::string letters;
  double prob;
  Lexicon::NodeId node;
  // prob times the best lm_prob under the prefix: no word reachable from
  // this prefix can score higher. Equals prob without a lexicon.
  double bound;
};

bool ranks_before(const std::string& a_letters, double a_prob, const std::string& b_letters, double b_prob) {
  if (a_prob != b_prob) return a_prob > b_prob;
  return a_letters < b_letters;
}

std::array<int, 26> letters_by_probability(const LetterDistribution& dist) {
  std::array<int, 26> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] > dist[b]; });
  return order;
}

// Shared beam expansion; lexicon may be null (no prefix pruning).
std::vector<Beam> expand(const SpatialModel& model, std::span<const TouchPoint> taps, const BeamParams& beam,
                         const Lexicon* lex) {
  if (taps.empty()) throw usage_error("cannot decode an empty tap sequence");
  if (beam.letters_per_tap < 1 || beam.max_sequences < 1)
    throw usage_error("beam needs at least one letter per tap and one sequence");

  const std::size_t per_tap = std::min<std::size_t>(beam.letters_per_tap, 26);
  std::vector<Beam> live{{"", 1.0, lex ? lex->root() : 0, 1.0}};
  for (const TouchPoint& tap : taps) {
    const LetterDistribution dist = spatial_probabilities(model, tap);
    const auto order = letters_by_probability(dist);
    std::vector<Beam> next;
    next.reserve(live.size() * per_tap);
    for (const Beam& b : live) {
      for (std::size_t i = 0; i < per_tap; ++i) {
        const int letter = order[i];
        const char c = char('a' + letter);
        Lexicon::NodeId node = 0;
        const double prob = b.prob * dist[letter];
        double bound = prob;
        if (lex) {
          auto child = lex->child(b.node, c);
          if (!child) continue;
          node = *child;
          bound = prob * lex->best_lm_prob(node);
        }
        next.push_back({b.letters + c, prob, node, bound});
      }
    }
    std::sort(next.begin(), next.end(),
              [](const Beam& a, const Beam& b) { return ranks_before(a.letters, a.bound, b.letters, b.bound); });
    if (next.size() > beam.max_sequences) next.resize(beam.max_sequences);
    live = std::move(next);
    if (live.empty()) break;
  }
  return live;
}

}  // namespace

SpatialModel::SpatialModel(const KeyboardLayout& layout, std::optional<double> sigma)
    : layout_(&layout), sigma_(sigma.value_or(layout.column_pitch())) {
  if (!(sigma_ > 0) || !std::isfinite(sigma_)) throw usage_error("spatial model sigma must be positive");
}

LetterDistribution spatial_probabilities(const SpatialModel& model, TouchPoint p) {
  std::array<double, 26> d2{};
  double nearest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 26; ++i) {
    d2[i] = squared_distance(p, model.layout().letter_key(i).center);
    nearest = std::min(nearest, d2[i]);
  }
  // Shifting by the nearest distance cancels in the normalisation and keeps
  // the nearest key's weight at exactly 1, so far touches cannot underflow.
  const double denom = 2 * model.sigma() * model.sigma();
  LetterDistribution out{};
  double total = 0;
  for (int i = 0; i < 26; ++i) {
    out[i] = std::exp(-(d2[i] - nearest) / denom);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<CandidateSequence> sequence_candidates(const SpatialModel& model, std::span<const TouchPoint> taps,
                                                   const BeamParams& beam) {
  std::vector<CandidateSequence> out;
  for (Beam& b : expand(model, taps, beam, nullptr)) out.push_back({std::move(b.letters), b.prob});
  return out;
}

std::vector<Suggestion> rank_words(const SpatialModel& model, const Lexicon& lex, std::span<const TouchPoint> taps,
                                   std::size_t k, const BeamParams& beam) {
  std::vector<Suggestion> scored;
  if (k == 0 || taps.empty()) return scored;
  const auto live = expand(model, taps, beam, beam.prefix_pruning ? &lex : nullptr);
  // A couple of spare entries per prefix so rounding ties in prob x lm are
  // still resolved by word order below.
  const std::size_t per_prefix = k + 2;
  for (const Beam& b : live) {
    std::optional<Lexicon::NodeId> node = beam.prefix_pruning ? std::optional(b.node) : lex.find_prefix(b.letters);
    if (!node) continue;
    for (std::size_t id : lex.top_entries(*node, per_prefix)) {
      const WordEntry& e = lex.entries()[id];
      scored.push_back({e.word, b.prob * e.lm_prob});
    }
  }
  std::sort(scored.begin(), scored.end(), [](const Suggestion& a, const Suggestion& b) {
    return ranks_before(a.word, a.score, b.word, b.score);
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

SuggestionPair suggest(const SpatialModel& model, const Lexicon& lex, std::span<const TouchPoint> taps,
                       const BeamParams& beam) {
  SuggestionPair pair;
  if (taps.empty()) return pair;
  auto top = rank_words(model, lex, taps, 2, beam);
  if (!top.empty()) pair.first = std::move(top[0]);
  if (top.size() > 1) pair.second = std::move(top[1]);
  return pair;
}

std::string literal_string(const SpatialModel& model, std::span<const TouchPoint> taps) {
  std::string out;
  out.reserve(taps.size());
  for (const TouchPoint& p : taps) out += nearest_key(model.layout(), p, KeyFilter::letters).letter();
  return out;
}

}  // namespace star
