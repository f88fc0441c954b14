// SPDX-License-Identifier: Apache-2.0
#include "star/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "star/error.hpp"

namespace star {
namespace {

constexpr std::size_t kMalformedSamples = 5;

bool is_letters(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

Lexicon Lexicon::from_rows(const std::vector<std::pair<std::string, std::uint64_t>>& rows,
                           LexiconLoadReport* report) {
  LexiconLoadReport local;
  LexiconLoadReport& r = report ? *report : local;
  r.rows += rows.size();

  std::map<std::string, std::uint64_t> merged;
  for (const auto& [raw, count] : rows) {
    if (count == 0) {
      ++r.malformed;
      continue;
    }
    std::string word = lowercase(raw);
    if (!is_letters(word)) {
      ++r.dropped_non_letter;
      continue;
    }
    auto [it, inserted] = merged.try_emplace(std::move(word), 0);
    if (!inserted) ++r.merged_duplicates;
    it->second += count;
  }
  if (merged.empty()) throw data_error("lexicon source has no usable rows");

  Lexicon lex;
  long double total = 0;
  for (const auto& [word, count] : merged) total += static_cast<long double>(count);
  lex.entries_.reserve(merged.size());
  long double sum = 0;
  for (const auto& [word, count] : merged) {
    const double p = static_cast<double>(static_cast<long double>(count) / total);
    lex.entries_.push_back({word, count, p});
    sum += p;
  }
  r.accepted = lex.entries_.size();
  r.probability_sum = static_cast<double>(sum);
  lex.build_index();
  return lex;
}

bool Lexicon::ranks_before(std::size_t a, std::size_t b) const {
  // Same denominator everywhere, so integer counts order lm_prob exactly.
  if (entries_[a].frequency != entries_[b].frequency) return entries_[a].frequency > entries_[b].frequency;
  return entries_[a].word < entries_[b].word;
}

void Lexicon::build_index() {
  nodes_.clear();
  Node root;
  root.children.fill(-1);
  root.begin = 0;
  root.end = static_cast<std::uint32_t>(entries_.size());
  nodes_.push_back(std::move(root));

  auto offer = [this](Node& node, std::uint32_t id) {
    auto pos = std::find_if(node.top.begin(), node.top.end(),
                            [&](std::uint32_t other) { return ranks_before(id, other); });
    if (pos == node.top.end() && node.top.size() >= kCachedTop) return;
    node.top.insert(pos, id);
    if (node.top.size() > kCachedTop) node.top.pop_back();
  };

  // Entries are sorted, so each prefix occupies a contiguous id range.
  for (std::uint32_t id = 0; id < entries_.size(); ++id) {
    std::size_t node = 0;
    offer(nodes_[0], id);
    for (char c : entries_[id].word) {
      const int slot = c - 'a';
      if (nodes_[node].children[slot] < 0) {
        Node fresh;
        fresh.children.fill(-1);
        fresh.begin = id;
        fresh.end = id;
        nodes_[node].children[slot] = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(std::move(fresh));
      }
      node = static_cast<std::size_t>(nodes_[node].children[slot]);
      nodes_[node].end = id + 1;
      offer(nodes_[node], id);
    }
  }
}

const WordEntry* Lexicon::find(std::string_view word) const {
  const std::string key = lowercase(word);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const WordEntry& e, const std::string& w) { return e.word < w; });
  return (it != entries_.end() && it->word == key) ? &*it : nullptr;
}

bool Lexicon::contains_word(std::string_view word) const { return find(word) != nullptr; }

double Lexicon::lm_prob(std::string_view word) const {
  const WordEntry* e = find(word);
  return e ? e->lm_prob : 0.0;
}

std::optional<Lexicon::NodeId> Lexicon::child(NodeId node, char letter) const {
  if (letter < 'a' || letter > 'z') return std::nullopt;
  const std::int32_t next = nodes_[node].children[letter - 'a'];
  if (next < 0) return std::nullopt;
  return static_cast<NodeId>(next);
}

std::optional<Lexicon::NodeId> Lexicon::find_prefix(std::string_view prefix) const {
  NodeId node = root();
  for (char c : prefix) {
    auto next = child(node, c);
    if (!next) return std::nullopt;
    node = *next;
  }
  return node;
}

std::vector<std::size_t> Lexicon::top_entries(NodeId node, std::size_t limit) const {
  const Node& n = nodes_[node];
  const std::size_t range = n.end - n.begin;
  if (limit <= n.top.size() || range <= n.top.size()) {
    const std::size_t count = std::min(limit, n.top.size());
    return {n.top.begin(), n.top.begin() + static_cast<std::ptrdiff_t>(count)};
  }
  std::vector<std::size_t> ids(range);
  for (std::size_t i = 0; i < range; ++i) ids[i] = n.begin + i;
  const std::size_t count = std::min(limit, range);
  auto cmp = [this](std::size_t a, std::size_t b) { return ranks_before(a, b); };
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count), ids.end(), cmp);
  ids.resize(count);
  return ids;
}

std::vector<WordEntry> Lexicon::words_with_prefix(std::string_view prefix, std::size_t limit) const {
  std::vector<WordEntry> out;
  const std::string key = lowercase(prefix);
  auto node = find_prefix(key);
  if (!node || limit == 0) return out;
  for (std::size_t id : top_entries(*node, limit)) out.push_back(entries_[id]);
  return out;
}

Lexicon load_lexicon(std::istream& in, LexiconLoadReport* report) {
  LexiconLoadReport local;
  LexiconLoadReport& r = report ? *report : local;
  std::vector<std::pair<std::string, std::uint64_t>> rows;
  std::string line;
  std::size_t line_no = 0;
  auto malformed = [&](const std::string& why) {
    ++r.malformed;
    ++r.rows;
    if (r.malformed_samples.size() < kMalformedSamples)
      r.malformed_samples.push_back("line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      malformed("expected word<TAB>count");
      continue;
    }
    const std::string_view count_text = std::string_view(line).substr(tab + 1);
    std::uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size() || count == 0) {
      malformed("count must be a positive integer");
      continue;
    }
    rows.emplace_back(line.substr(0, tab), count);
  }
  if (rows.empty()) throw data_error("lexicon source is empty");
  return Lexicon::from_rows(rows, &r);
}

Lexicon load_lexicon_file(const std::string& path, LexiconLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open lexicon file " + path);
  return load_lexicon(in, report);
}

}  // namespace star
