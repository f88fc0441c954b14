// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "star/metrics.hpp"

namespace star {

// Trial logs are JSON Lines. Each trial is a "trial" header record, one
// "event" record per input event and a closing "end" record carrying the
// transcribed text. A file may hold any number of trials.

nlohmann::json event_to_json(const InputEvent& e);
InputEvent event_from_json(const nlohmann::json& j);

void write_trial(std::ostream& out, const TrialLog& log);
std::string trial_to_jsonl(const TrialLog& log);

/// Parses and validates every trial in the stream; throws data_error naming
/// the offending line.
std::vector<TrialLog> read_trials(std::istream& in);
std::vector<TrialLog> read_trial_file(const std::filesystem::path& path);

/// Structural checks shared by the reader and writers: ordering, durations,
/// backspace deltas and replay consistency.
void validate_trial(const TrialLog& log);

struct LogDirectoryScan {
  std::vector<TrialLog> logs;
  /// "file: reason" for every file that failed to parse.
  std::vector<std::string> warnings;
  std::size_t files = 0;
};

/// Reads every *.jsonl file under `dir` in name order; corrupt files are
/// skipped and reported.
LogDirectoryScan read_log_directory(const std::filesystem::path& dir);

}  // namespace star
