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

#ifndef POLPUR_CHANNELS_HPP_
#define POLPUR_CHANNELS_HPP_

#include <array>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "polpur/fockspace.hpp"
#include "polpur/optics.hpp"
#include "polpur/sources.hpp"

namespace polpur {

/// Offset between a channel mode and its loss ancilla: k → k + 10.
inline constexpr int kAncillaOffset = 10;

/// Complex transmissions μ_kL of the eight channel modes (k = 1..4).
class ChannelSample {
 public:
  /// Lossless.
  ChannelSample();

  Complex mu(int k, Pol p) const;
  void set_mu(int k, Pol p, Complex value);

  void validate() const;

  nlohmann::ordered_json to_json() const;
  bool operator==(const ChannelSample&) const = default;

 private:
  static std::size_t index(int k, Pol p);
  std::array<Complex, 8> mu_;
};

struct TransmitResult {
  /// Full received state on modes 1–4 with the ancillas traced out.
  MixedEnsemble received;
  /// Weight of the four-photon component.
  double four_photon_weight = 0.0;
  /// The normalized four-photon component, if it has weight.
  std::optional<MixedEnsemble> four_photon;
};

/// Sends |Φ⁺⟩₁₂|Φ⁺⟩₃₄ through the eight lossy channels.
TransmitResult transmit(const ChannelSample& sample);

/// ¼(|μ1Hμ2H|²+|μ1Vμ2V|²)(|μ3Hμ4H|²+|μ3Vμ4V|²).
double four_photon_weight(const ChannelSample& sample);

/// (α₁₂, β₁₂) and (α₃₄, β₃₄) of the received four-photon state. Empty when a
/// pair is lost entirely.
struct PairCoefficients {
  PairSpec pair12;
  PairSpec pair34;
};
std::optional<PairCoefficients> pair_coefficients(const ChannelSample& sample);

/// Cross-ratios; each is empty when its denominator vanishes.
struct FFactors {
  std::optional<Complex> f;
  std::optional<Complex> f_a;
  std::optional<Complex> f_b;
};
FFactors f_factors(const ChannelSample& sample);

/// Distribution of channel samples.
class FluctuationProcess {
 public:
  using Sampler = std::function<ChannelSample(std::mt19937_64&)>;

  FluctuationProcess(std::string name, Sampler sampler, bool deterministic = false);

  /// Always the same sample.
  static FluctuationProcess constant(const ChannelSample& sample);
  /// Independent uniform phases on every μ, unit magnitude.
  static FluctuationProcess uniform_phases();
  /// Random common amplitudes and phases with F_A and F_B held fixed.
  static FluctuationProcess constant_f(Complex f_a, Complex f_b);
  /// Independent random magnitudes in [min_mag, 1] and uniform phases.
  static FluctuationProcess independent(double min_mag = 0.2);

  ChannelSample sample(std::mt19937_64& rng) const;
  const std::string& name() const { return name_; }
  bool deterministic() const { return deterministic_; }

 private:
  std::string name_;
  Sampler sampler_;
  bool deterministic_ = false;
};

struct PurifiabilityReport {
  /// ⟨P |α₁₂β₃₄ − β₁₂α₃₄|²⟩.
  double condition = 0.0;
  /// Standard error of the estimate.
  double condition_stderr = 0.0;
  /// ⟨P⟩.
  double mean_weight = 0.0;
  bool purifiable = false;
  /// Heralded fidelity after purifying the post-selected four-photon mixture
  /// with perfect detectors.
  double post_fidelity = 0.0;
  std::size_t samples = 0;

  nlohmann::ordered_json to_json() const;
};

struct PurifiabilityOptions {
  std::size_t samples = 10000;
  double abs_tol = 1e-12;
  /// Sigma multiple below which a Monte Carlo estimate counts as zero.
  double sigmas = 3.0;
};

PurifiabilityReport purifiability(const FluctuationProcess& process, std::mt19937_64& rng,
                                  const PurifiabilityOptions& opts = {});

/// A local attenuator-plus-phase: multiplies the amplitude of one mode.
struct Compensation {
  ModeId mode = mode_h(3);
  Complex factor = 1.0;

  bool is_identity() const { return factor == Complex{1.0}; }
  /// The operation as a lossy channel into the mode's ancilla.
  LinearTransform transform() const;
  ChannelSample applied_to(ChannelSample sample) const;
};

/// Makes a constant F equal to one: factor F on 3H when |F| ≤ 1, otherwise
/// factor 1/F on 3V.
Compensation compensate(Complex f);
/// Compensation for a sample's F; throws when F is undefined or zero.
Compensation compensate(const ChannelSample& sample);

FluctuationProcess compensated(const FluctuationProcess& process, const Compensation& c);

struct ProcrusteanResult {
  double success_probability = 0.0;
  double fidelity = 0.0;
  Compensation attenuation;
};

/// Single-pair concentration on a known pure pair state on spatial modes
/// (a, b): attenuate the larger polarization term and keep the events where
/// both photons survive. Throws std::invalid_argument for mixed input.
ProcrusteanResult procrustean(const MixedEnsemble& pair, int mode_a = 1, int mode_b = 2);

// ---------------------------------------------------------------------------
// Fiber time-delay scenario

enum class FiberCase { A, B, C, D };
std::string to_string(FiberCase c);
FiberCase fiber_case_from_string(const std::string& s);

/// Exchanges Bob applies before transmission and Alice undoes afterwards.
enum class SwapStrategy { Auto, None, Swap1V3H, Swap1V3V };
std::string to_string(SwapStrategy s);
SwapStrategy swap_strategy_from_string(const std::string& s);

enum class PhaseModel {
  /// φ± at t + Δt either equal or independent uniform, by case.
  Idealized,
  /// Stationary Gaussian φ± with exponential correlation exp(−Δt/τ±).
  OrnsteinUhlenbeck
};
std::string to_string(PhaseModel m);
PhaseModel phase_model_from_string(const std::string& s);

/// The case implied by correlation times: Δt below τ keeps that phase fixed.
FiberCase classify_fiber_case(double tau_plus, double tau_minus, double dt);

struct FiberOptions {
  FiberCase fiber_case = FiberCase::A;
  double tau_plus = 1.0;
  double tau_minus = 1.0;
  double dt = 1e-3;
  std::size_t samples = 10000;
  SwapStrategy strategy = SwapStrategy::Auto;
  PhaseModel model = PhaseModel::Idealized;
  /// Stationary standard deviation of φ± in the Gaussian model.
  double phase_sigma = 3.141592653589793;
  double tolerance = 1e-9;
};

struct FiberReport {
  FiberCase fiber_case = FiberCase::A;
  SwapStrategy strategy = SwapStrategy::None;
  bool purification_used = false;
  /// Mean Φ⁺ fidelity of each received pair after undoing the swap.
  double direct_fidelity = 0.0;
  /// Heralded fidelity after purification.
  double purified_fidelity = 0.0;
  /// The fidelity of the reported route.
  double fidelity = 0.0;
  bool success = false;
  std::size_t samples = 0;

  nlohmann::ordered_json to_json() const;
};

/// The four phases (1H, 1V, 3H, 3V) seen after the swap is undone, as a
/// channel sample with μ₂ = μ₄ = 1.
ChannelSample fiber_sample(double phi_plus_t, double phi_minus_t, double phi_plus_dt,
                           double phi_minus_dt, SwapStrategy strategy);

FiberReport fiber_scenario(const FiberOptions& opts, std::mt19937_64& rng);

}  // namespace polpur

#endif  // POLPUR_CHANNELS_HPP_
