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

#ifndef POLPUR_PROTOCOL_HPP_
#define POLPUR_PROTOCOL_HPP_

#include <array>
#include <map>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "polpur/detection.hpp"
#include "polpur/fockspace.hpp"
#include "polpur/optics.hpp"
#include "polpur/sources.hpp"

namespace polpur {

// Spatial labels. Alice holds 1, 3 and 5, 6; Bob holds 2, 4. The wave plates
// act in place, so the primed detector modes 5' and 4' share labels 5 and 4.
inline constexpr int kAlicePairA = 1;
inline constexpr int kBobPairA = 2;
inline constexpr int kAlicePairB = 3;
inline constexpr int kBobPairB = 4;
inline constexpr int kAliceDetect = 5;
inline constexpr int kAliceKeep = 6;

/// Detector names used in configurations.
inline const std::array<std::string, 6> kDetectorNames = {"5'H", "5'V", "4'H", "4'V", "6", "2"};

/// One of the four heralding coincidences: (D_5'a, D_4'b).
struct Coincidence {
  Pol alice = Pol::H;
  Pol bob = Pol::H;

  std::string label() const;
  static Coincidence parse(const std::string& s);
  auto operator<=>(const Coincidence&) const = default;
};

inline constexpr std::array<Coincidence, 4> kAllCoincidences = {
    Coincidence{Pol::H, Pol::H}, Coincidence{Pol::V, Pol::V}, Coincidence{Pol::H, Pol::V},
    Coincidence{Pol::V, Pol::H}};

/// Mode-local phases the optics leave unspecified: the two outputs of the 90°
/// plate and the four routes through the beam splitter. Observable statistics
/// do not depend on them once the heralded-state corrections are recalibrated.
struct OpticsGauge {
  Complex r90_h = 1.0;
  Complex r90_v = 1.0;
  PbsPhases pbs = {1.0, 1.0, 1.0, 1.0};

  static OpticsGauge random(std::mt19937_64& rng);
};

/// R90 on mode 3, PBS (1, 3 → 6, 5), R45 on 5 and on 4.
LinearTransform purification_circuit(const OpticsGauge& gauge = {});

/// Phase applied to mode 2V after each coincidence so that the heralded pair
/// is |Φ⁺⟩₆₂. Derived from the ideal circuit at α = β.
std::map<Coincidence, double> calibrate_corrections(const OpticsGauge& gauge = {});

struct IdealSource {
  PairSpec pair;
};
struct PdcSource {
  PdcSpec spec{0.0, 0.0};
  bool phase_averaged = true;
};
/// Any classical mixture on modes 1–4.
struct EnsembleSource {
  MixedEnsemble state;
};
using Source = std::variant<IdealSource, PdcSource, EnsembleSource>;

struct RunConfig {
  Source source = IdealSource{PairSpec{1.0, 0.0}};
  /// Keyed by kDetectorNames. "6" and "2" are needed only for post-selection.
  std::map<std::string, DetectorModel> detectors;
  std::vector<Coincidence> coincidences{kAllCoincidences.begin(), kAllCoincidences.end()};
  /// Discard events where the complementary detector on either side fired.
  bool veto = true;
  /// Keep only events with counts at D_6 and D_2.
  bool postselect = false;
  int n_max = 4;
  OpticsGauge gauge;

  /// Same detector model everywhere.
  static RunConfig uniform(Source source, DetectorModel model);
  void validate() const;
};

struct CoincidenceStats {
  Coincidence which;
  double probability = 0.0;
  double fidelity = 0.0;
};

struct RunStatistics {
  /// Probability of the first listed coincidence.
  double p = 0.0;
  /// Sum over all listed coincidences.
  double p_total = 0.0;
  /// Heralded |Φ⁺⟩₆₂ weight, first coincidence.
  double p_s = 0.0;
  /// p − p_s.
  double p_e = 0.0;
  /// Error parts with zero and one photon in modes 6, 2.
  double p_e0 = 0.0;
  double p_e1 = 0.0;
  /// Remaining error weight (two or more photons but not |Φ⁺⟩).
  double p_e_rest = 0.0;
  /// Fidelity of the corrected output, averaged over all coincidences.
  double fidelity = 0.0;
  MixedEnsemble output;
  double dropped_weight = 0.0;
  std::vector<CoincidenceStats> per_coincidence;
  /// Set by run_mixture when some component is not of the |α,β⟩|α,β⟩ form.
  bool nonidentical_pairs = false;

  nlohmann::ordered_json to_json(bool with_state = false) const;
};

/// The input state on modes 1–4.
MixedEnsemble prepare_source(const RunConfig& config);

RunStatistics run(const RunConfig& config);

/// run() with the D_6 / D_2 post-selection switched on.
RunStatistics postselect(RunConfig config);

/// One draw of the classical mixture: pair (1,2) and pair (3,4).
struct PairDraw {
  double weight = 1.0;
  PairSpec pair12;
  PairSpec pair34;
};

RunStatistics run_mixture(std::span<const PairDraw> draws, RunConfig config);

/// Shot-noise view of a run: multinomial counts over
/// {success, vacuum error, one-photon error, other error, no coincidence}.
struct ShotCounts {
  std::size_t shots = 0;
  std::array<std::size_t, 5> counts{};
};
ShotCounts sample_shots(const RunStatistics& stats, std::size_t shots, std::mt19937_64& rng);

/// Fourfold coincidences (D_5'H, D_4'H, D_6, D_2) split by how many of the
/// four counts are dark counts.
struct DarkBudgetOptions {
  DetectorKind kind = DetectorKind::Conventional;
  double efficiency = 1.0;
  double alpha_sq = 0.5;
  int n_max = 4;
  /// "≪" means at least this factor.
  double margin = 100.0;
};

struct DarkCountBudget {
  double gamma_sq = 0.0;
  double nu = 0.0;
  /// P_0 … P_4.
  std::array<double, 5> contributions{};
  /// max_i P_i / P_0.
  double worst_ratio = 0.0;
  /// ν ≪ 1 and ν²/γ² ≪ 1.
  bool negligible = false;

  nlohmann::ordered_json to_json() const;
};

DarkCountBudget dark_count_budget(double gamma_sq, double nu, const DarkBudgetOptions& opts = {});

/// Log-log slopes of P_0..P_4 against γ and against ν, each fitted over the
/// decade below the operating point.
struct DarkOrderFit {
  std::array<double, 5> gamma_exponent{};
  std::array<double, 5> nu_exponent{};
};

DarkOrderFit fit_dark_count_orders(double gamma_sq, double nu, const DarkBudgetOptions& opts = {},
                                   int points = 6);

/// Least-squares slope of log y against log x.
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace polpur

#endif  // POLPUR_PROTOCOL_HPP_
