// SPDX-License-Identifier: Apache-2.0
#include "star/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "star/error.hpp"
#include "star/trial_log.hpp"

namespace star {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kPhraseStream = 0x7068726173657321ULL;

std::string resolve_path(const std::string& p, const fs::path& base) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

// Layout presets stay names; anything else is a file relative to the config.
std::string resolve_layout_ref(const std::string& ref, const fs::path& base) {
  if (ref == "original" || ref == "enlarged") return ref;
  return resolve_path(ref, base);
}

struct Job {
  std::size_t condition;
  int block;
  int trial;
  std::string phrase;
  TrialMeta meta;
};

}  // namespace

void ExperimentConfig::validate() const {
  if (conditions.empty()) throw usage_error("experiment needs at least one condition");
  for (const ConditionConfig& c : conditions) {
    if (c.name.empty()) throw usage_error("every condition needs a name");
    if (c.blocks < 1) throw usage_error("condition '" + c.name + "': blocks must be >= 1");
    if (c.trials_per_block < 1) throw usage_error("condition '" + c.name + "': trials_per_block must be >= 1");
    c.profile.validate();
  }
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    for (std::size_t j = i + 1; j < conditions.size(); ++j) {
      if (conditions[i].name == conditions[j].name)
        throw usage_error("duplicate condition name '" + conditions[i].name + "'");
    }
  }
}

ExperimentConfig experiment_from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  ExperimentConfig config;
  try {
    config.master_seed = doc.value("master_seed", config.master_seed);
    config.phrase_file = resolve_path(doc.value("phrases", std::string()), base_dir);
    config.lexicon_file = resolve_path(doc.value("lexicon", std::string()), base_dir);
    config.output_dir = resolve_path(doc.value("output_dir", std::string()), base_dir);
    config.phrases_with_replacement = doc.value("phrases_with_replacement", false);
    config.threads = doc.value("threads", 0u);
    if (doc.contains("decoder")) {
      const auto& d = doc.at("decoder");
      if (d.contains("sigma_mm") && !d.at("sigma_mm").is_null()) config.decoder.sigma = d.at("sigma_mm").get<double>();
      config.decoder.beam.letters_per_tap = d.value("letters_per_tap", config.decoder.beam.letters_per_tap);
      config.decoder.beam.max_sequences = d.value("max_sequences", config.decoder.beam.max_sequences);
      config.decoder.beam.prefix_pruning = d.value("prefix_pruning", config.decoder.beam.prefix_pruning);
    }
    for (const auto& c : doc.at("conditions")) {
      ConditionConfig cond;
      cond.name = c.at("name").get<std::string>();
      cond.layout = resolve_layout_ref(c.value("layout", cond.layout), base_dir);
      cond.blocks = c.value("blocks", cond.blocks);
      cond.trials_per_block = c.value("trials_per_block", cond.trials_per_block);
      cond.pool_blocks = c.value("pool_blocks", cond.pool_blocks);
      const auto& profile = c.at("profile");
      if (profile.is_string()) {
        cond.profile = load_profile_file(resolve_path(profile.get<std::string>(), base_dir));
      } else {
        cond.profile = profile_from_json(profile);
      }
      if (c.contains("overrides")) {
        nlohmann::json merged = profile_to_json(cond.profile);
        merged.merge_patch(c.at("overrides"));
        cond.profile = profile_from_json(merged);
      }
      config.conditions.push_back(std::move(cond));
    }
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("malformed experiment config: ") + e.what());
  }
  config.validate();
  return config;
}

ExperimentConfig load_experiment_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open experiment config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw usage_error("experiment config " + path.string() + ": " + e.what());
  }
  return experiment_from_json(doc, path.parent_path());
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Lexicon& lexicon, const PhraseSet& phrases) {
  config.validate();

  std::vector<KeyboardLayout> layouts;
  for (const ConditionConfig& c : config.conditions) layouts.push_back(resolve_layout(c.layout));

  ExperimentResult result;
  std::vector<Job> jobs;
  PhraseSchedule schedule(phrases.phrases, derive_seed(config.master_seed, {kPhraseStream}),
                          config.phrases_with_replacement);
  int group_index = 0;
  for (std::size_t ci = 0; ci < config.conditions.size(); ++ci) {
    const ConditionConfig& c = config.conditions[ci];
    const bool per_block = c.blocks > 1 && !c.pool_blocks;
    if (!per_block) result.group_order.push_back(c.name);
    for (int block = 1; block <= c.blocks; ++block) {
      std::string group = c.name;
      if (per_block) {
        group += " B" + std::to_string(block);
        result.group_order.push_back(group);
      }
      for (int trial = 1; trial <= c.trials_per_block; ++trial) {
        TrialMeta meta{c.name, group, group_index, block, trial, 0};
        jobs.push_back({ci, block, trial, schedule.next(), std::move(meta)});
      }
      if (per_block) ++group_index;
    }
    if (!per_block) ++group_index;
  }

  result.logs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      try {
        const std::uint64_t seed = derive_seed(
            config.master_seed, {job.condition, static_cast<std::uint64_t>(job.block), static_cast<std::uint64_t>(job.trial)});
        result.logs[i] = simulate_trial(config.conditions[job.condition].profile, job.phrase, layouts[job.condition],
                                        lexicon, config.decoder, seed, job.meta);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  result.summary = summarize(result.logs, result.group_order);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.lexicon_file.empty() || config.phrase_file.empty())
    throw usage_error("experiment config must name a lexicon and a phrase file");
  const Lexicon lexicon = load_lexicon_file(config.lexicon_file);
  const PhraseSet phrases = load_phrases_file(config.phrase_file, lexicon);
  return run_experiment(config, lexicon, phrases);
}

std::string log_file_name(const TrialLog& log) {
  std::string condition;
  for (char c : log.condition) condition += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s_b%d_t%02d.jsonl", condition.c_str(), log.block, log.trial);
  return buf;
}

void write_experiment(const ExperimentResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "logs", ec);
  if (ec) throw runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const TrialLog& log : result.logs) {
    std::ofstream out(dir / "logs" / log_file_name(log), std::ios::binary);
    if (!out) throw runtime_error("cannot write trial log in " + dir.string());
    write_trial(out, log);
  }
  std::ofstream csv(dir / "summary.csv", std::ios::binary);
  csv << summary_csv(result.summary);
  std::ofstream text(dir / "summary.txt", std::ios::binary);
  text << summary_text(result.summary);
  if (!csv || !text) throw runtime_error("cannot write summary files in " + dir.string());
}

CalibrationResult calibrate_motor_sigma(const ExperimentConfig& config, const std::string& condition,
                                        double target_cer_pct, const Lexicon& lexicon, const PhraseSet& phrases,
                                        double lo_mm, double hi_mm, double tolerance_pp, int max_iterations) {
  ExperimentConfig probe = config;
  auto it = std::find_if(probe.conditions.begin(), probe.conditions.end(),
                         [&](const ConditionConfig& c) { return c.name == condition; });
  if (it == probe.conditions.end()) throw usage_error("no condition named '" + condition + "'");
  // Keep the phrase and seed streams identical to a full run by simulating
  // everything, then reading off this condition.
  auto cer_at = [&](double sigma) {
    it->profile.motor_sigma_mm = sigma;
    const ExperimentResult r = run_experiment(probe, lexicon, phrases);
    double sum = 0;
    std::size_t n = 0;
    for (const TrialLog& log : r.logs) {
      if (log.condition != condition) continue;
      sum += corrected_error_rate(log);
      ++n;
    }
    return sum / static_cast<double>(n);
  };

  CalibrationResult out;
  double lo = lo_mm;
  double hi = hi_mm;
  for (out.iterations = 1; out.iterations <= max_iterations; ++out.iterations) {
    const double mid = (lo + hi) / 2;
    const double cer = cer_at(mid);
    out.motor_sigma_mm = mid;
    out.achieved_cer_pct = cer;
    if (std::abs(cer - target_cer_pct) <= tolerance_pp) break;
    (cer < target_cer_pct ? lo : hi) = mid;
  }
  return out;
}

}  // namespace star
