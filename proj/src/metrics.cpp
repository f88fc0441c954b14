// SPDX-License-Identifier: Apache-2.0
#include "star/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "star/error.hpp"

namespace star {
namespace {

std::vector<const InputEvent*> key_inputs(const TrialLog& log) {
  std::vector<const InputEvent*> out;
  for (const InputEvent& e : log.events) {
    if (e.is_key_input()) out.push_back(&e);
  }
  return out;
}

void require_submit(const TrialLog& log) {
  if (!log.submitted()) throw data_error("trial has no submit event; error rates are undefined");
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

constexpr std::array<SummaryRow, 6> kRows = {{
    {"Text Entry Speed (WPM)", &MetricsReport::wpm, 1},
    {"UER (%)", &MetricsReport::uer_pct, 1},
    {"CER (%)", &MetricsReport::cer_pct, 1},
    {"IKI (ms)", &MetricsReport::mean_iki_ms, 0},
    {"Backspace Usage (count)", &MetricsReport::backspace_count, 1},
    {"Key Press Duration (ms)", &MetricsReport::mean_kpd_ms, 0},
}};

constexpr std::array<double MetricsReport::*, 8> kAllFields = {
    &MetricsReport::wpm,         &MetricsReport::uer_pct,     &MetricsReport::cer_pct,
    &MetricsReport::backspace_count, &MetricsReport::mean_iki_ms, &MetricsReport::mean_kpd_ms,
    &MetricsReport::char_count,  &MetricsReport::duration_ms};

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::letter: return "letter";
    case EventKind::space: return "space";
    case EventKind::backspace: return "backspace";
    case EventKind::suggestion: return "suggestion";
    case EventKind::submit: return "submit";
  }
  return "unknown";
}

EventKind event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::letter, EventKind::space, EventKind::backspace, EventKind::suggestion,
                 EventKind::submit}) {
    if (to_string(k) == s) return k;
  }
  throw data_error("unknown event kind '" + std::string(s) + "'");
}

std::string replay(std::span<const InputEvent> events) {
  std::string text;
  for (const InputEvent& e : events) {
    if (e.erase > text.size()) throw data_error("event erases more text than the field holds");
    text.resize(text.size() - e.erase);
    text += e.insert;
  }
  return text;
}

std::size_t msd(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double entry_duration_ms(const TrialLog& log) {
  const auto keys = key_inputs(log);
  if (keys.size() < 2) throw data_error("need at least two key inputs to measure entry duration");
  return keys.back()->t_down - keys.front()->t_down;
}

double wpm(const TrialLog& log) {
  const double duration = entry_duration_ms(log);
  if (!(duration > 0)) throw data_error("entry duration must be positive to compute WPM");
  const double words = (static_cast<double>(log.transcribed.size()) - 1.0) / 5.0;
  return words / (duration / 60000.0);
}

double uncorrected_error_rate(const TrialLog& log) {
  require_submit(log);
  const std::size_t longest = std::max(log.presented.size(), log.transcribed.size());
  if (longest == 0) return 0.0;
  return 100.0 * static_cast<double>(msd(log.presented, log.transcribed)) / static_cast<double>(longest);
}

double corrected_error_rate(const TrialLog& log) {
  require_submit(log);
  const double backspaces = static_cast<double>(backspace_count(log));
  const double longest = static_cast<double>(std::max(log.presented.size(), log.transcribed.size()));
  if (longest + backspaces == 0) return 0.0;
  return 100.0 * (static_cast<double>(msd(log.presented, log.transcribed)) + backspaces) / (longest + backspaces);
}

std::size_t backspace_count(const TrialLog& log) {
  return static_cast<std::size_t>(std::count_if(log.events.begin(), log.events.end(),
                                                [](const InputEvent& e) { return e.kind == EventKind::backspace; }));
}

std::vector<double> iki_series(const TrialLog& log) {
  const auto keys = key_inputs(log);
  if (keys.size() < 2) throw data_error("need at least two key inputs for inter-key intervals");
  std::vector<double> out;
  out.reserve(keys.size() - 1);
  for (std::size_t i = 1; i < keys.size(); ++i) out.push_back(keys[i]->t_down - keys[i - 1]->t_down);
  return out;
}

double mean_iki(const TrialLog& log) { return mean_of(iki_series(log)); }

std::vector<double> kpd_series(const TrialLog& log) {
  const auto keys = key_inputs(log);
  if (keys.empty()) throw data_error("no key inputs for key press durations");
  std::vector<double> out;
  out.reserve(keys.size());
  for (const InputEvent* e : keys) out.push_back(e->t_up - e->t_down);
  return out;
}

double mean_kpd(const TrialLog& log) { return mean_of(kpd_series(log)); }

MetricsReport compute_metrics(const TrialLog& log) {
  MetricsReport r;
  r.wpm = wpm(log);
  r.uer_pct = uncorrected_error_rate(log);
  r.cer_pct = corrected_error_rate(log);
  r.backspace_count = static_cast<double>(backspace_count(log));
  r.mean_iki_ms = mean_iki(log);
  r.mean_kpd_ms = mean_kpd(log);
  r.char_count = static_cast<double>(log.transcribed.size());
  r.duration_ms = entry_duration_ms(log);
  return r;
}

std::span<const SummaryRow> summary_rows() { return kRows; }

SummaryTable summarize(std::span<const TrialLog> logs, std::span<const std::string> group_order) {
  SummaryTable table;
  for (const std::string& label : group_order) {
    std::vector<MetricsReport> reports;
    for (const TrialLog& log : logs) {
      if (log.group == label) reports.push_back(compute_metrics(log));
    }
    if (reports.empty()) throw data_error("summary group '" + label + "' has no trials");

    GroupSummary g;
    g.label = label;
    g.trials = reports.size();
    g.sd_defined = reports.size() > 1;
    const double n = static_cast<double>(reports.size());
    for (auto field : kAllFields) {
      double sum = 0;
      for (const auto& r : reports) sum += r.*field;
      const double mean = sum / n;
      double ss = 0;
      for (const auto& r : reports) ss += (r.*field - mean) * (r.*field - mean);
      g.mean.*field = mean;
      g.sd.*field = g.sd_defined ? std::sqrt(ss / (n - 1)) : 0.0;
    }
    table.groups.push_back(std::move(g));
  }
  return table;
}

SummaryTable summarize(std::span<const TrialLog> logs) {
  std::map<std::tuple<int, std::string>, bool> keys;
  for (const TrialLog& log : logs) keys[{log.group_index, log.group}] = true;
  std::vector<std::string> order;
  for (const auto& [key, unused] : keys) {
    const std::string& label = std::get<1>(key);
    if (std::find(order.begin(), order.end(), label) == order.end()) order.push_back(label);
  }
  return summarize(logs, order);
}

std::string summary_csv(const SummaryTable& table) {
  std::ostringstream out;
  out << "group,metric,trials,mean,sd,sd_defined\n";
  for (const GroupSummary& g : table.groups) {
    for (const SummaryRow& row : kRows) {
      out << g.label << ',' << row.name << ',' << g.trials << ',' << fixed(g.mean.*row.field, 6) << ','
          << fixed(g.sd.*row.field, 6) << ',' << (g.sd_defined ? "true" : "false") << '\n';
    }
  }
  return out.str();
}

std::string summary_text(const SummaryTable& table) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{""};
  for (const GroupSummary& g : table.groups) header.push_back(g.label);
  cells.push_back(header);
  for (const SummaryRow& row : kRows) {
    std::vector<std::string> line{std::string(row.name)};
    for (const GroupSummary& g : table.groups) {
      line.push_back(fixed(g.mean.*row.field, row.decimals) + " (" +
                     (g.sd_defined ? fixed(g.sd.*row.field, row.decimals) : std::string("n/a")) + ")");
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
  }
  std::ostringstream out;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c == 0) {
        out << line[c] << std::string(widths[c] - line[c].size(), ' ');
      } else {
        out << "  " << std::string(widths[c] - line[c].size(), ' ') << line[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace star
