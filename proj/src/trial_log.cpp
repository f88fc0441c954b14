// SPDX-License-Identifier: Apache-2.0
#include "star/trial_log.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "star/error.hpp"

namespace star {

using nlohmann::json;

json event_to_json(const InputEvent& e) {
  json j = {{"record", "event"},
            {"t_down", e.t_down},
            {"t_up", e.t_up},
            {"label", e.label},
            {"kind", to_string(e.kind)}};
  if (e.touch) {
    j["x"] = e.touch->x;
    j["y"] = e.touch->y;
  }
  j["erase"] = e.erase;
  j["insert"] = e.insert;
  return j;
}

InputEvent event_from_json(const json& j) {
  InputEvent e;
  e.t_down = j.at("t_down").get<double>();
  e.t_up = j.at("t_up").get<double>();
  e.label = j.at("label").get<std::string>();
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("x") || j.contains("y")) e.touch = TouchPoint{j.at("x").get<double>(), j.at("y").get<double>()};
  e.erase = j.value("erase", std::size_t{0});
  e.insert = j.value("insert", std::string());
  return e;
}

void write_trial(std::ostream& out, const TrialLog& log) {
  json header = {{"record", "trial"},         {"presented", log.presented}, {"layout", log.layout},
                 {"condition", log.condition}, {"group", log.group},         {"group_index", log.group_index},
                 {"block", log.block},         {"trial", log.trial},         {"seed", log.seed}};
  out << header.dump() << '\n';
  for (const InputEvent& e : log.events) out << event_to_json(e).dump() << '\n';
  out << json{{"record", "end"}, {"transcribed", log.transcribed}}.dump() << '\n';
}

std::string trial_to_jsonl(const TrialLog& log) {
  std::ostringstream out;
  write_trial(out, log);
  return out.str();
}

void validate_trial(const TrialLog& log) {
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const InputEvent& e = log.events[i];
    const std::string where = "event " + std::to_string(i + 1) + ": ";
    if (!(e.t_up >= e.t_down)) throw data_error(where + "key-up precedes key-down");
    if (i > 0 && e.t_down < log.events[i - 1].t_down) throw data_error(where + "events out of time order");
    if (e.kind == EventKind::backspace && (e.erase > 1 || !e.insert.empty()))
      throw data_error(where + "backspace must remove at most one character");
    if (e.kind == EventKind::submit && i + 1 != log.events.size())
      throw data_error(where + "submit must be the last event");
  }
  if (replay(log.events) != log.transcribed)
    throw data_error("transcribed text does not match the replayed events");
}

std::vector<TrialLog> read_trials(std::istream& in) {
  std::vector<TrialLog> trials;
  std::optional<TrialLog> open;
  std::string line;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const json j = json::parse(line);
      const std::string record = j.at("record").get<std::string>();
      if (record == "trial") {
        if (open) throw data_error("trial header before the previous trial ended");
        TrialLog log;
        log.presented = j.at("presented").get<std::string>();
        log.layout = j.value("layout", std::string());
        log.condition = j.value("condition", std::string());
        log.group = j.value("group", log.condition);
        log.group_index = j.value("group_index", 0);
        log.block = j.value("block", 1);
        log.trial = j.value("trial", 1);
        log.seed = j.value("seed", std::uint64_t{0});
        open = std::move(log);
      } else if (record == "event") {
        if (!open) throw data_error("event outside a trial");
        open->events.push_back(event_from_json(j));
      } else if (record == "end") {
        if (!open) throw data_error("end record outside a trial");
        open->transcribed = j.at("transcribed").get<std::string>();
        validate_trial(*open);
        trials.push_back(std::move(*open));
        open.reset();
      } else {
        throw data_error("unknown record type '" + record + "'");
      }
    }
    if (open) throw data_error("trial is missing its end record");
  } catch (const json::exception& e) {
    throw data_error("line " + std::to_string(line_no) + ": " + e.what());
  } catch (const Error& e) {
    throw data_error("line " + std::to_string(line_no) + ": " + e.what());
  }
  return trials;
}

std::vector<TrialLog> read_trial_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open trial log " + path.string());
  return read_trials(in);
}

LogDirectoryScan read_log_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw data_error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  LogDirectoryScan scan;
  scan.files = files.size();
  for (const auto& file : files) {
    try {
      auto trials = read_trial_file(file);
      for (auto& t : trials) scan.logs.push_back(std::move(t));
    } catch (const Error& e) {
      scan.warnings.push_back(file.string() + ": " + e.what());
    }
  }
  return scan;
}

}  // namespace star
