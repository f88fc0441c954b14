// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "star/geometry.hpp"
#include "star/lexicon.hpp"
#include "star/metrics.hpp"
#include "star/random.hpp"
#include "star/session.hpp"

namespace star {

enum class JitterModel : std::uint8_t { uniform, gaussian };

struct SuggestionPolicy {
  bool enabled = true;
  /// Letters of the current word typed before suggestions are considered.
  int min_typed_letters = 2;
  /// Accept the target when it is the second suggestion too, not only the first.
  bool accept_second = true;
  /// Tapping a suggestion appends a space; on the phrase's last word the
  /// typist then erases it with one backspace.
  bool use_on_last_word = true;
};

/// Stochastic parameters of a simulated typist.
struct TypistProfile {
  std::string name = "typist";
  double iki_mean_ms = 585.0;
  double iki_sd_ms = 100.0;
  double kpd_mean_ms = 139.0;
  double kpd_sd_ms = 20.0;
  /// Isotropic Gaussian aim error around the key centre.
  double motor_sigma_mm = 0.0;
  /// Tracking noise: half-range of the uniform model, sd of the Gaussian one.
  double jitter_amplitude_mm = 0.0;
  JitterModel jitter_model = JitterModel::uniform;
  /// The registered position is the tracked thumb position this long before
  /// key-down.
  double latency_ms = 0.0;
  /// How long before key-down the thumb has reached its aim point.
  double settle_ms = 0.0;
  double p_notice_error = 1.0;
  SuggestionPolicy suggestions;

  /// Throws usage_error on negative times or sigmas, or probabilities
  /// outside [0, 1].
  void validate() const;
};

nlohmann::json profile_to_json(const TypistProfile& p);
/// Missing fields keep their defaults.
TypistProfile profile_from_json(const nlohmann::json& j);
TypistProfile load_profile_file(const std::string& path);

struct SimulatedTap {
  std::string intended_label;
  TouchPoint target;          // key centre
  TouchPoint aimed_point;     // target + motor noise
  TouchPoint tracked_point;   // latency-delayed position on the aim trajectory
  TouchPoint registered_point;  // tracked + jitter
  double t_down = 0.0;
  double t_up = 0.0;
};

/// Turns intended keys into noisy touch points. The thumb travels in a
/// straight line from the previous aim point (leaving at its key-up) to the
/// next one, arriving settle_ms before key-down.
class MotorModel {
 public:
  MotorModel(const TypistProfile& profile, const KeyboardLayout& layout);

  SimulatedTap tap(std::string_view label, double t_down, double t_up, Rng& rng);
  void reset() { previous_.reset(); }

 private:
  struct Previous {
    TouchPoint aimed;
    double t_up;
  };

  const TypistProfile* profile_;
  const KeyboardLayout* layout_;
  std::optional<Previous> previous_;
};

/// Samples one typist trial through a Session. Deterministic in `seed`.
TrialLog simulate_trial(const TypistProfile& profile, std::string_view phrase, const KeyboardLayout& layout,
                        const Lexicon& lexicon, const DecoderOptions& decoder, std::uint64_t seed,
                        TrialMeta meta = {});

struct DebounceState {
  double engage_threshold = 250.0;
  double release_threshold = 200.0;
  bool engaged = false;
  /// Key-down time of the tap in progress.
  double engaged_at = 0.0;
};

struct CapacitanceSample {
  double t_ms = 0.0;
  double value = 0.0;
};

struct TapInterval {
  double t_down = 0.0;
  double t_up = 0.0;

  friend bool operator==(const TapInterval&, const TapInterval&) = default;
};

/// Two-threshold tap detection: engages on the first sample strictly above
/// the engage threshold, releases on the first strictly below the release
/// threshold. `state` carries an open tap across calls.
std::vector<TapInterval> debounce(std::span<const CapacitanceSample> stream, DebounceState& state);

}  // namespace star
