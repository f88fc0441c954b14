// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "star/metrics.hpp"
#include "star/session.hpp"
#include "star/simulator.hpp"

namespace star {

/// One typing condition of an experiment, e.g. STAR or Smartphone.
struct ConditionConfig {
  std::string name;
  std::string layout = "enlarged";  // preset name or layout file
  TypistProfile profile;
  int blocks = 1;
  int trials_per_block = 10;
  /// One summary column for all blocks instead of one per block.
  bool pool_blocks = false;
};

struct ExperimentConfig {
  std::vector<ConditionConfig> conditions;
  std::string phrase_file;
  std::string lexicon_file;
  std::uint64_t master_seed = 1;
  std::string output_dir;
  bool phrases_with_replacement = false;
  DecoderOptions decoder;
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;

  /// Throws usage_error on structural problems (no conditions, blocks < 1...).
  void validate() const;
};

/// Parses a config document. Relative paths (profiles, phrase and lexicon
/// files, output directory) resolve against `base_dir`; profile entries may
/// be inline objects or paths to profile files.
ExperimentConfig experiment_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_file(const std::filesystem::path& path);

struct ExperimentResult {
  /// Ordered by condition, then block, then trial.
  std::vector<TrialLog> logs;
  std::vector<std::string> group_order;
  SummaryTable summary;
};

/// Simulates every trial. Phrases come from one seeded schedule consumed in
/// condition/block/trial order; each trial has its own derived seed, so the
/// result is independent of the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, const Lexicon& lexicon, const PhraseSet& phrases);

/// Loads lexicon and phrases named in the config, then runs.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes logs/<condition>_b<block>_t<trial>.jsonl, summary.csv and summary.txt.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir);

std::string log_file_name(const TrialLog& log);

struct CalibrationResult {
  double motor_sigma_mm = 0.0;
  double achieved_cer_pct = 0.0;
  int iterations = 0;
};

/// Bisects the motor noise of one condition until its mean CER over all of
/// its trials is within `tolerance_pp` of the target.
CalibrationResult calibrate_motor_sigma(const ExperimentConfig& config, const std::string& condition,
                                        double target_cer_pct, const Lexicon& lexicon, const PhraseSet& phrases,
                                        double lo_mm = 0.0, double hi_mm = 6.0, double tolerance_pp = 0.05,
                                        int max_iterations = 40);

}  // namespace star
