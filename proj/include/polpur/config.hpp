// Copyright 2026 The polpur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POLPUR_CONFIG_HPP_
#define POLPUR_CONFIG_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polpur/channels.hpp"
#include "polpur/detection.hpp"
#include "polpur/protocol.hpp"

namespace polpur {

enum class ExperimentKind { Pair, Pdc, Channel, Fiber, DarkBudget, Sweep };
std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// Every violation found while parsing or validating, one message each.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct DetectorOverride {
  std::optional<DetectorKind> kind;
  std::optional<double> eta;
  std::optional<double> nu;
  bool operator==(const DetectorOverride&) const = default;
};

struct SweepAxis {
  /// A numeric configuration key, e.g. "detector.eta".
  std::string key;
  std::vector<double> values;
  bool operator==(const SweepAxis&) const = default;
};

/// Polar form (magnitude, phase) of a complex parameter.
struct Polar {
  double abs = 1.0;
  double arg = 0.0;
  Complex value() const { return std::polar(abs, arg); }
  bool operator==(const Polar&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Pair;

  // source.*
  double alpha_sq = 0.5;
  double phase = 0.0;
  double gamma = 0.1;
  double pump_phase = 0.0;
  bool phase_averaged = true;

  // detector.*
  DetectorModel detector{DetectorKind::SinglePhoton, 1.0, 0.0};
  std::map<std::string, DetectorOverride> detector_overrides;

  // protocol.*
  bool veto = true;
  bool postselect = false;
  std::vector<Coincidence> coincidences{kAllCoincidences.begin(), kAllCoincidences.end()};

  int n_max = 4;
  std::uint64_t seed = 1;
  std::size_t samples = 10000;

  // channel.*
  std::string channel_process = "uniform_phases";
  Polar f_a;
  Polar f_b;
  double min_mag = 0.2;
  bool compensate = false;
  /// Index (k − 1)·2 + (V ? 1 : 0).
  std::array<Polar, 8> mu{};

  // fiber.*
  FiberCase fiber_case = FiberCase::A;
  double tau_plus = 1.0;
  double tau_minus = 1.0;
  double dt = 1e-3;
  SwapStrategy strategy = SwapStrategy::Auto;
  PhaseModel phase_model = PhaseModel::Idealized;
  double phase_sigma = 3.141592653589793;

  // dark.*
  double dark_gamma_sq = 1e-4;
  double dark_nu = 1e-6;
  double dark_margin = 100.0;
  int fit_points = 6;

  // verify.*
  double tolerance = 1e-10;

  // sweep.*
  ExperimentKind sweep_base = ExperimentKind::Pair;
  std::vector<SweepAxis> axes;

  /// Detector model for a name in kDetectorNames with overrides applied.
  DetectorModel detector_model(const std::string& name) const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and invalid
/// values are collected and reported together.
ExperimentConfig parse_config(const std::string& text);

/// Cross-field checks; throws ConfigError.
void validate(const ExperimentConfig& c);

/// Canonical text form; parse_config(render(c)) == c.
std::string render(const ExperimentConfig& c);

/// Sets one key from its textual value; throws std::invalid_argument.
void set_key(ExperimentConfig& c, const std::string& key, const std::string& value);

/// Keys a sweep axis may vary.
std::vector<std::string> numeric_keys();

/// Cartesian product of the axes, first axis slowest. Each point has kind
/// sweep_base and is validated.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& c);

/// Detector and source settings as a protocol run (pair and pdc kinds).
RunConfig to_run_config(const ExperimentConfig& c);

/// The channel process described by channel.*.
FluctuationProcess to_process(const ExperimentConfig& c);

/// Double formatted with 17 significant digits.
std::string format_double(double x);

}  // namespace polpur

#endif  // POLPUR_CONFIG_HPP_
