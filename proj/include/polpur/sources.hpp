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

#ifndef POLPUR_SOURCES_HPP_
#define POLPUR_SOURCES_HPP_

#include "polpur/fockspace.hpp"

namespace polpur {

/// Coefficients of α|1⟩_H|1⟩_H + β|1⟩_V|1⟩_V, with |α|² + |β|² = 1.
struct PairSpec {
  Complex alpha{1.0};
  Complex beta{0.0};

  /// Validated constructor.
  static PairSpec make(Complex alpha, Complex beta);
  /// |α|² = alpha_sq, arg β − arg α = relative_phase, α real.
  static PairSpec from_weight(double alpha_sq, double relative_phase = 0.0);

  bool is_normalized(double tol = 1e-12) const;
  bool operator==(const PairSpec&) const = default;
};

/// Pump couplings of the two down-conversion crystals. The phases of γ_H and
/// γ_V are φ_p ± Δφ_p/2.
class PdcSpec {
 public:
  PdcSpec(Complex gamma_h, Complex gamma_v);

  /// Builds the couplings that give pair amplitude γ and partial entanglement
  /// (α, β) at pump phase φ_p. Requires γ < 1.
  static PdcSpec from_pair(double gamma, const PairSpec& pair, double pump_phase = 0.0);

  Complex gamma_h() const { return gamma_h_; }
  Complex gamma_v() const { return gamma_v_; }

  /// γ = √(tanh²|γ_H| + tanh²|γ_V|).
  double gamma() const;
  /// sech²|γ_H| sech²|γ_V|.
  double g() const;
  /// φ_p, the mean of the two pump phases (modulo π; α, β absorb the sign).
  double pump_phase() const;
  /// α, β with the common pump phase removed.
  PairSpec pair() const;

 private:
  Complex gamma_h_;
  Complex gamma_v_;
};

/// α|1⟩_aH|1⟩_bH + β|1⟩_aV|1⟩_bV.
PureState ideal_pair(const PairSpec& spec, int mode_a = 1, int mode_b = 2);

/// |α,β⟩₁₂ ⊗ |α,β⟩₃₄.
PureState ideal_two_pairs(const PairSpec& spec);

/// Two-mode squeezed output of both crystals on spatial modes (a, b),
/// truncated at `n_max` total photons.
PureState pdc_single(const PdcSpec& spec, int mode_a, int mode_b, int n_max);

/// Source pumped twice: pdc_single on (1,2) ⊗ pdc_single on (3,4).
PureState pdc_double(const PdcSpec& spec, int n_max);

/// The double-pass state averaged over the unknown pump phase: one component
/// per total-photon-number sector, with cross-sector coherences removed.
MixedEnsemble phase_averaged_pdc(const PdcSpec& spec, int n_max);

/// The double-pass state at its fixed pump phase, as a one-component ensemble.
MixedEnsemble fixed_phase_pdc(const PdcSpec& spec, int n_max);

}  // namespace polpur

#endif  // POLPUR_SOURCES_HPP_
