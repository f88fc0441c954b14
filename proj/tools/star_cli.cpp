// SPDX-License-Identifier: Apache-2.0
// Command-line front end: decode tap files, run simulated experiments,
// recompute metrics from logs, validate data files and serve sessions.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "star/decoder.hpp"
#include "star/error.hpp"
#include "star/experiment.hpp"
#include "star/geometry.hpp"
#include "star/lexicon.hpp"
#include "star/metrics.hpp"
#include "star/service.hpp"
#include "star/session.hpp"
#include "star/trial_log.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

std::atomic<bool> g_stop{false};

std::string data_dir() {
  if (const char* env = std::getenv("STAR_DATA_DIR")) return env;
  return STAR_DEFAULT_DATA_DIR;
}

std::string data_file(const std::string& name) { return (fs::path(data_dir()) / name).string(); }

std::vector<star::TouchPoint> read_taps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw star::data_error("cannot open tap file " + path);
  std::vector<star::TouchPoint> taps;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    star::TouchPoint p;
    std::string extra;
    if (!(fields >> p.x >> p.y) || (fields >> extra) || !std::isfinite(p.x) || !std::isfinite(p.y))
      throw star::data_error(path + ":" + std::to_string(n) + ": expected \"x y\" in millimetres, got \"" + line + "\"");
    taps.push_back(p);
  }
  if (taps.empty()) throw star::usage_error("tap file " + path + " contains no taps");
  return taps;
}

struct DecodeArgs {
  std::string taps;
  std::string layout = "enlarged";
  std::string lexicon;
  std::optional<double> sigma;
  std::size_t letters_per_tap = star::BeamParams{}.letters_per_tap;
  std::size_t max_sequences = star::BeamParams{}.max_sequences;
  std::size_t show = 5;
  bool json = false;
};

int cmd_decode(const DecodeArgs& a) {
  const auto taps = read_taps(a.taps);
  const star::KeyboardLayout layout = star::resolve_layout(a.layout);
  const star::Lexicon lex = star::load_lexicon_file(a.lexicon.empty() ? data_file("lexicon.tsv") : a.lexicon);
  const star::SpatialModel model(layout, a.sigma);
  star::BeamParams beam;
  beam.letters_per_tap = a.letters_per_tap;
  beam.max_sequences = a.max_sequences;

  const auto candidates = star::sequence_candidates(model, taps, {beam.letters_per_tap, beam.max_sequences, false});
  const auto pair = star::suggest(model, lex, taps, beam);
  const std::string literal = star::literal_string(model, taps);

  if (a.json) {
    nlohmann::json out = {{"literal", literal}, {"suggestions", star::suggestions_to_json(pair)}};
    auto& list = out["candidates"] = nlohmann::json::array();
    for (std::size_t i = 0; i < candidates.size() && i < a.show; ++i)
      list.push_back({{"letters", candidates[i].letters}, {"prob", candidates[i].prob}});
    std::cout << out.dump(2) << '\n';
    return kOk;
  }
  std::cout << "literal: " << literal << "\ncandidates:\n";
  for (std::size_t i = 0; i < candidates.size() && i < a.show; ++i)
    std::cout << "  " << candidates[i].letters << "  " << std::setprecision(6) << candidates[i].prob << '\n';
  std::cout << "suggestions:\n";
  if (pair.empty()) std::cout << "  (none)\n";
  int slot = 1;
  for (const auto* s : {&pair.first, &pair.second}) {
    if (*s) std::cout << "  " << slot++ << ". " << (*s)->word << "  " << std::setprecision(6) << (*s)->score << '\n';
  }
  return kOk;
}

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string layout;
  std::string lexicon;
  std::string phrases;
  std::optional<unsigned> threads;
};

star::ExperimentConfig load_config(const SimulateArgs& a) {
  const std::string path = a.config.empty() ? data_file("configs/default_experiment.json") : a.config;
  star::ExperimentConfig config = star::load_experiment_file(path);
  if (a.seed) config.master_seed = *a.seed;
  if (!a.out.empty()) config.output_dir = a.out;
  if (!a.lexicon.empty()) config.lexicon_file = a.lexicon;
  if (!a.phrases.empty()) config.phrase_file = a.phrases;
  if (a.threads) config.threads = *a.threads;
  if (!a.layout.empty()) {
    for (auto& c : config.conditions) c.layout = a.layout;
  }
  return config;
}

int cmd_simulate(const SimulateArgs& a) {
  const star::ExperimentConfig config = load_config(a);
  if (config.output_dir.empty()) throw star::usage_error("no output directory (set output_dir or --out)");
  const star::ExperimentResult result = star::run_experiment(config);
  star::write_experiment(result, config.output_dir);
  std::cout << star::summary_text(result.summary);
  std::cout << result.logs.size() << " trials written to " << config.output_dir << '\n';
  return kOk;
}

int cmd_metrics(const std::string& dir, const std::string& csv_out) {
  const star::LogDirectoryScan scan = star::read_log_directory(dir);
  for (const auto& w : scan.warnings) std::cerr << "warning: " << w << '\n';
  if (scan.logs.empty()) throw star::data_error("no valid trial logs under " + dir);
  const star::SummaryTable table = star::summarize(scan.logs);
  std::cout << star::summary_text(table);
  if (!csv_out.empty()) {
    std::ofstream out(csv_out, std::ios::binary);
    if (!out) throw star::runtime_error("cannot write " + csv_out);
    out << star::summary_csv(table);
  }
  return kOk;
}

int cmd_validate_lexicon(const std::string& file) {
  star::LexiconLoadReport report;
  const star::Lexicon lex = star::load_lexicon_file(file, &report);
  const bool sum_ok = std::abs(report.probability_sum - 1.0) <= 1e-9;
  std::cout << "lexicon:              " << file << '\n'
            << "rows:                 " << report.rows << '\n'
            << "entries:              " << lex.size() << '\n'
            << "dropped (non-letter): " << report.dropped_non_letter << '\n'
            << "malformed rows:       " << report.malformed << '\n'
            << "merged duplicates:    " << report.merged_duplicates << '\n'
            << "probability sum:      " << std::setprecision(15) << report.probability_sum
            << (sum_ok ? "  (ok)" : "  (FAILED: off by more than 1e-9)") << '\n';
  for (const auto& m : report.malformed_samples) std::cout << "  " << m << '\n';
  return sum_ok ? kOk : kData;
}

int cmd_validate_phrases(const std::string& file, const std::string& lexicon) {
  const star::Lexicon lex = star::load_lexicon_file(lexicon);
  const star::PhraseSet set = star::load_phrases_file(file, lex);
  std::cout << "phrases:          " << file << '\n'
            << "retained:         " << set.phrases.size() << '\n'
            << "removed (OOV):    " << set.removed_oov << '\n'
            << "removed (chars):  " << set.removed_invalid << '\n';
  return kOk;
}

int cmd_validate_layout(const std::string& name) {
  const star::KeyboardLayout layout = star::resolve_layout(name);
  std::cout << "layout " << layout.name() << ": " << layout.keys().size() << " keys, key width "
            << layout.key_width() << " mm, gap " << layout.key_gap() << " mm, pitch " << layout.column_pitch()
            << " mm (ok)\n";
  return kOk;
}

int cmd_validate_logs(const std::string& dir) {
  const star::LogDirectoryScan scan = star::read_log_directory(dir);
  std::cout << scan.files << " files, " << scan.logs.size() << " valid trials, " << scan.warnings.size()
            << " corrupt files\n";
  for (const auto& w : scan.warnings) std::cout << "  " << w << '\n';
  return scan.warnings.empty() ? kOk : kData;
}

struct CalibrateArgs {
  SimulateArgs sim;
  std::string condition = "STAR";
  double target_cer = 8.5;
  double tolerance = 0.05;
  std::string write_profile;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const star::ExperimentConfig config = load_config(a.sim);
  const star::Lexicon lex = star::load_lexicon_file(config.lexicon_file);
  const star::PhraseSet phrases = star::load_phrases_file(config.phrase_file, lex);
  const auto result = star::calibrate_motor_sigma(config, a.condition, a.target_cer, lex, phrases, 0.0, 6.0, a.tolerance);
  std::cout << "condition " << a.condition << ": motor_sigma_mm = " << std::setprecision(6) << result.motor_sigma_mm
            << " -> mean CER " << result.achieved_cer_pct << "% after " << result.iterations << " iterations\n";
  if (!a.write_profile.empty()) {
    auto it = std::find_if(config.conditions.begin(), config.conditions.end(),
                           [&](const auto& c) { return c.name == a.condition; });
    star::TypistProfile profile = it->profile;
    profile.motor_sigma_mm = result.motor_sigma_mm;
    std::ofstream out(a.write_profile);
    if (!out) throw star::runtime_error("cannot write " + a.write_profile);
    out << star::profile_to_json(profile).dump(2) << '\n';
  }
  return kOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string layout = "enlarged";
  std::string lexicon;
  std::string phrases;
  double jitter = 0.0;
  double latency = 0.0;
  std::uint64_t seed = 1;
  std::string static_dir;
  std::string out;
};

int cmd_serve(const ServeArgs& a) {
  const star::Lexicon lex = star::load_lexicon_file(a.lexicon.empty() ? data_file("lexicon.tsv") : a.lexicon);
  star::PhraseSet phrases = star::load_phrases_file(a.phrases.empty() ? data_file("phrases.txt") : a.phrases, lex);
  star::ServiceOptions options;
  options.default_layout = a.layout;
  options.jitter_mm = a.jitter;
  options.latency_ms = a.latency;
  options.phrase_seed = a.seed;
  options.log_dir = a.out;
  star::SessionService service(lex, std::move(phrases), options);
  star::HttpFrontend http(service, a.static_dir);
  const int port = http.start(a.host, a.port);
  std::cout << "serving on http://" << a.host << ':' << port << std::endl;

  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  http.stop();
  service.flush_all();
  std::cout << "stopped; logs flushed" << (a.out.empty() ? " (no --out, nothing written)" : " to " + a.out) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual-keyboard decoding, typist simulation and text-entry metrics"};
  app.require_subcommand(1);

  DecodeArgs decode;
  auto* dec = app.add_subcommand("decode", "Decode a tap file into candidate sequences and suggestions");
  dec->add_option("--taps,taps", decode.taps, "File with one \"x y\" pair (mm) per line")->required();
  dec->add_option("--layout", decode.layout, "Layout preset or layout file");
  dec->add_option("--lexicon", decode.lexicon, "Lexicon TSV (word<TAB>count)");
  dec->add_option("--sigma", decode.sigma, "Gaussian sigma in mm (default: column pitch)");
  dec->add_option("--letters-per-tap", decode.letters_per_tap, "Beam letters kept per tap");
  dec->add_option("--max-sequences", decode.max_sequences, "Beam live-sequence cap");
  dec->add_option("--show", decode.show, "Candidate sequences to print");
  dec->add_flag("--json", decode.json, "Print JSON");

  SimulateArgs sim;
  auto add_sim_flags = [](CLI::App* cmd, SimulateArgs& s) {
    cmd->add_option("--config", s.config, "Experiment config (JSON)");
    cmd->add_option("--seed", s.seed, "Master seed (overrides the config)");
    cmd->add_option("--out", s.out, "Output directory (overrides the config)");
    cmd->add_option("--layout", s.layout, "Layout for every condition (overrides the config)");
    cmd->add_option("--lexicon", s.lexicon, "Lexicon TSV (overrides the config)");
    cmd->add_option("--phrases", s.phrases, "Phrase file (overrides the config)");
    cmd->add_option("--threads", s.threads, "Worker threads (0 = all cores)");
  };
  auto* simc = app.add_subcommand("simulate", "Run a simulated transcription experiment");
  add_sim_flags(simc, sim);

  std::string metrics_dir;
  std::string metrics_csv;
  auto* met = app.add_subcommand("metrics", "Recompute the summary table from a directory of trial logs");
  met->add_option("dir", metrics_dir, "Directory containing *.jsonl trial logs")->required();
  met->add_option("--csv", metrics_csv, "Also write the CSV summary here");

  auto* val = app.add_subcommand("validate", "Check data files");
  val->require_subcommand(1);
  std::string val_file;
  std::string val_lexicon;
  auto* val_lex = val->add_subcommand("lexicon", "Entry count, dropped rows and probability-sum check");
  val_lex->add_option("file", val_file, "Lexicon TSV");
  auto* val_phr = val->add_subcommand("phrases", "Phrases retained after out-of-lexicon filtering");
  val_phr->add_option("file", val_file, "Phrase file");
  val_phr->add_option("--lexicon", val_lexicon, "Lexicon TSV");
  auto* val_lay = val->add_subcommand("layout", "Check a layout preset or file");
  val_lay->add_option("layout", val_file, "Preset name or file")->required();
  auto* val_logs = val->add_subcommand("logs", "Parse every trial log in a directory");
  val_logs->add_option("dir", val_file, "Log directory")->required();

  std::string layout_name;
  std::string layout_out;
  auto* lay = app.add_subcommand("layout", "Print a layout document");
  lay->add_option("name", layout_name, "Preset name or layout file")->required();
  lay->add_option("--out", layout_out, "Write to this file instead of stdout");

  CalibrateArgs cal;
  auto* calc = app.add_subcommand("calibrate", "Bisect a condition's motor noise to hit a target CER");
  add_sim_flags(calc, cal.sim);
  calc->add_option("--condition", cal.condition, "Condition to calibrate");
  calc->add_option("--target-cer", cal.target_cer, "Target mean CER in percent");
  calc->add_option("--tolerance", cal.tolerance, "Stop within this many percentage points");
  calc->add_option("--write-profile", cal.write_profile, "Write the calibrated profile here");

  ServeArgs serve;
  auto* srv = app.add_subcommand("serve", "Serve the session API over HTTP");
  srv->add_option("--host", serve.host, "Bind address");
  srv->add_option("--port", serve.port, "Port (0 picks a free one)");
  srv->add_option("--layout", serve.layout, "Default layout");
  srv->add_option("--lexicon", serve.lexicon, "Lexicon TSV");
  srv->add_option("--phrases", serve.phrases, "Phrase file");
  srv->add_option("--jitter", serve.jitter, "Default client-side jitter (mm)");
  srv->add_option("--latency", serve.latency, "Default client-side latency (ms)");
  srv->add_option("--seed", serve.seed, "Phrase-order seed");
  srv->add_option("--static", serve.static_dir, "Directory of UI assets to serve at /");
  srv->add_option("--out", serve.out, "Directory for session logs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*dec) return cmd_decode(decode);
    if (*simc) return cmd_simulate(sim);
    if (*met) return cmd_metrics(metrics_dir, metrics_csv);
    if (*val_lex) return cmd_validate_lexicon(val_file.empty() ? data_file("lexicon.tsv") : val_file);
    if (*val_phr)
      return cmd_validate_phrases(val_file.empty() ? data_file("phrases.txt") : val_file,
                                  val_lexicon.empty() ? data_file("lexicon.tsv") : val_lexicon);
    if (*val_lay) return cmd_validate_layout(val_file);
    if (*val_logs) return cmd_validate_logs(val_file);
    if (*lay) {
      const auto doc = star::layout_to_json(star::resolve_layout(layout_name)).dump(2);
      if (layout_out.empty()) {
        std::cout << doc << '\n';
      } else {
        std::ofstream(layout_out) << doc << '\n';
      }
      return kOk;
    }
    if (*calc) return cmd_calibrate(cal);
    if (*srv) return cmd_serve(serve);
  } catch (const star::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case star::ErrorKind::usage: return kUsage;
      case star::ErrorKind::data: return kData;
      case star::ErrorKind::runtime: return kRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
