// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace star {

struct WordEntry {
  std::string word;
  std::uint64_t frequency = 0;
  double lm_prob = 0.0;
};

/// What happened while ingesting a word-frequency table.
struct LexiconLoadReport {
  std::size_t rows = 0;
  std::size_t accepted = 0;
  std::size_t dropped_non_letter = 0;
  std::size_t malformed = 0;
  std::size_t merged_duplicates = 0;
  /// First few malformed rows as "line N: reason".
  std::vector<std::string> malformed_samples;
  double probability_sum = 0.0;
};

/// Frequency-weighted word list with a prefix trie. Immutable after load.
class Lexicon {
 public:
  using NodeId = std::uint32_t;
  static constexpr std::size_t kNoLimit = std::numeric_limits<std::size_t>::max();

  /// Rows are (word, count). Words are lowercased; anything outside a-z is
  /// dropped. Throws data_error if nothing usable remains.
  static Lexicon from_rows(const std::vector<std::pair<std::string, std::uint64_t>>& rows,
                           LexiconLoadReport* report = nullptr);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  /// Entries in lexicographic order.
  const std::vector<WordEntry>& entries() const { return entries_; }

  const WordEntry* find(std::string_view word) const;
  bool contains_word(std::string_view word) const;
  /// 0 for unknown words.
  double lm_prob(std::string_view word) const;

  /// Words starting with `prefix`, by lm_prob descending then word ascending.
  std::vector<WordEntry> words_with_prefix(std::string_view prefix, std::size_t limit = kNoLimit) const;

  // Trie navigation for decoders that walk prefixes incrementally.
  NodeId root() const { return 0; }
  std::optional<NodeId> child(NodeId node, char letter) const;
  std::optional<NodeId> find_prefix(std::string_view prefix) const;
  /// Entry indices under `node`, best first, at most `limit` of them.
  std::vector<std::size_t> top_entries(NodeId node, std::size_t limit) const;
  /// Largest lm_prob of any word under `node`.
  double best_lm_prob(NodeId node) const { return entries_[nodes_[node].top.front()].lm_prob; }

 private:
  struct Node {
    std::array<std::int32_t, 26> children;
    std::uint32_t begin = 0;  // range into entries_
    std::uint32_t end = 0;
    std::vector<std::uint32_t> top;  // cached best entries, ranked
  };

  static constexpr std::size_t kCachedTop = 4;

  bool ranks_before(std::size_t a, std::size_t b) const;
  void build_index();

  std::vector<WordEntry> entries_;
  std::vector<Node> nodes_;
};

Lexicon load_lexicon(std::istream& in, LexiconLoadReport* report = nullptr);
/// Reads a "word<TAB>count" file.
Lexicon load_lexicon_file(const std::string& path, LexiconLoadReport* report = nullptr);

}  // namespace star
