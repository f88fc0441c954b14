// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "star/geometry.hpp"
#include "star/lexicon.hpp"

namespace star {

/// Probability per letter, indexed 0..25 for 'a'..'z'.
using LetterDistribution = std::array<double, 26>;

/// Isotropic bivariate Gaussian touch model centred on every letter key.
class SpatialModel {
 public:
  /// sigma defaults to the layout's column pitch.
  explicit SpatialModel(const KeyboardLayout& layout, std::optional<double> sigma = std::nullopt);

  const KeyboardLayout& layout() const { return *layout_; }
  double sigma() const { return sigma_; }

 private:
  const KeyboardLayout* layout_;
  double sigma_;
};

LetterDistribution spatial_probabilities(const SpatialModel& model, TouchPoint p);

struct CandidateSequence {
  std::string letters;
  double prob = 0.0;
};

struct BeamParams {
  /// Letters kept per tap, best first (1..26). With sigma at the key pitch
  /// the spatial model is broad enough that a frequent word can win with a
  /// letter well past the fifth on some tap; 16 keeps those.
  std::size_t letters_per_tap = 16;
  /// Live sequences kept after each tap. In suggest() they are ranked by
  /// prob times the best lm_prob under the prefix.
  std::size_t max_sequences = 500;
  /// In suggest(): drop sequences that prefix no lexicon word.
  bool prefix_pruning = true;

  static BeamParams wide_open() { return {26, static_cast<std::size_t>(-1), true}; }
};

/// Ranked letter sequences (prob descending, letters ascending on ties).
/// Each prob is the product of per-tap probabilities in tap order.
std::vector<CandidateSequence> sequence_candidates(const SpatialModel& model,
                                                   std::span<const TouchPoint> taps,
                                                   const BeamParams& beam = {});

struct Suggestion {
  std::string word;
  double score = 0.0;
};

struct SuggestionPair {
  std::optional<Suggestion> first;
  std::optional<Suggestion> second;

  bool empty() const { return !first.has_value(); }
  bool contains(std::string_view word) const {
    return (first && first->word == word) || (second && second->word == word);
  }
};

/// Top-k words by spatial(first |taps| letters) x lm_prob. Ties go to the
/// lexicographically smaller word.
std::vector<Suggestion> rank_words(const SpatialModel& model, const Lexicon& lex,
                                   std::span<const TouchPoint> taps, std::size_t k,
                                   const BeamParams& beam = {});

SuggestionPair suggest(const SpatialModel& model, const Lexicon& lex, std::span<const TouchPoint> taps,
                       const BeamParams& beam = {});

/// Nearest letter per tap, concatenated.
std::string literal_string(const SpatialModel& model, std::span<const TouchPoint> taps);

}  // namespace star
