// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "star/geometry.hpp"

namespace star {

enum class EventKind : std::uint8_t { letter, space, backspace, suggestion, submit };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view s);

/// One tap as it affected the text field. The committed text changes by
/// dropping `erase` trailing characters and then appending `insert`.
struct InputEvent {
  double t_down = 0.0;  // ms since trial start
  double t_up = 0.0;
  std::string label;
  EventKind kind = EventKind::letter;
  std::optional<TouchPoint> touch;
  std::size_t erase = 0;
  std::string insert;

  bool is_key_input() const { return kind != EventKind::submit; }
};

struct TrialLog {
  std::string presented;
  std::string layout;
  std::string condition;
  /// Summary column this trial belongs to, and that column's position.
  std::string group;
  int group_index = 0;
  int block = 1;
  int trial = 1;
  std::uint64_t seed = 0;
  std::vector<InputEvent> events;
  std::string transcribed;

  bool submitted() const { return !events.empty() && events.back().kind == EventKind::submit; }
};

/// Applies each event's erase/insert to an empty field.
std::string replay(std::span<const InputEvent> events);

struct MetricsReport {
  double wpm = 0.0;
  double uer_pct = 0.0;
  double cer_pct = 0.0;
  double backspace_count = 0.0;
  double mean_iki_ms = 0.0;
  double mean_kpd_ms = 0.0;
  double char_count = 0.0;
  double duration_ms = 0.0;
};

/// Levenshtein distance with unit costs.
std::size_t msd(std::string_view a, std::string_view b);

double wpm(const TrialLog& log);
double uncorrected_error_rate(const TrialLog& log);
double corrected_error_rate(const TrialLog& log);
std::size_t backspace_count(const TrialLog& log);
/// First to last key input, by key-down time.
double entry_duration_ms(const TrialLog& log);

std::vector<double> iki_series(const TrialLog& log);
double mean_iki(const TrialLog& log);
std::vector<double> kpd_series(const TrialLog& log);
double mean_kpd(const TrialLog& log);

MetricsReport compute_metrics(const TrialLog& log);

/// Per-group mean and sample standard deviation of every metric.
struct GroupSummary {
  std::string label;
  std::size_t trials = 0;
  MetricsReport mean;
  MetricsReport sd;
  /// False when the group has a single trial; sd is then reported as 0.
  bool sd_defined = false;
};

struct SummaryTable {
  std::vector<GroupSummary> groups;
};

struct SummaryRow {
  std::string_view name;
  double MetricsReport::*field;
  int decimals;
};

/// The six rows reported per group, in table order.
std::span<const SummaryRow> summary_rows();

/// Groups follow `group_order`; every listed group must have trials.
SummaryTable summarize(std::span<const TrialLog> logs, std::span<const std::string> group_order);
/// Groups taken from each log's `group`, ordered by (group_index, group).
SummaryTable summarize(std::span<const TrialLog> logs);

std::string summary_csv(const SummaryTable& table);
std::string summary_text(const SummaryTable& table);

}  // namespace star
