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

#ifndef POLPUR_OPTICS_HPP_
#define POLPUR_OPTICS_HPP_

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "polpur/fockspace.hpp"

namespace polpur {

/// Linear map on creation operators: a†_in[j] → Σ_i matrix(i, j) a†_out[i].
///
/// Input and output mode lists may differ (a beam splitter relabels paths).
/// For a single photon the amplitude vector transforms as ψ_out = U ψ_in, so
/// composition is matrix multiplication.
class LinearTransform {
 public:
  LinearTransform() = default;
  LinearTransform(std::vector<ModeId> inputs, std::vector<ModeId> outputs,
                  Eigen::MatrixXcd matrix);

  /// Square transform acting in place on `modes`.
  LinearTransform(std::vector<ModeId> modes, Eigen::MatrixXcd matrix);

  static LinearTransform identity(std::vector<ModeId> modes);

  const std::vector<ModeId>& inputs() const { return inputs_; }
  const std::vector<ModeId>& outputs() const { return outputs_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

  bool is_unitary(double tol = 1e-12) const;

  /// Multiplies the image of each listed output mode by a phase or loss factor.
  LinearTransform with_output_factors(const std::vector<std::pair<ModeId, Complex>>& f) const;

 private:
  std::vector<ModeId> inputs_;
  std::vector<ModeId> outputs_;
  Eigen::MatrixXcd matrix_;
};

/// `second ∘ first`. Modes produced by `first` that `second` does not consume
/// pass through; inputs of `second` not produced by `first` become inputs of
/// the result.
LinearTransform compose(const LinearTransform& second, const LinearTransform& first);

enum class WavePlate { Deg45, Deg90 };

/// Half-wave plate rotating linear polarization by 45° or 90°.
///
/// Jones matrix [[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]] with the fast axis at
/// θ = 22.5° or 45°:
///   45°: a†_H → (a†_H + a†_V)/√2,  a†_V → (a†_H − a†_V)/√2
///   90°: a†_H → a†_V,              a†_V → a†_H
LinearTransform half_wave_plate(ModeId h_mode, ModeId v_mode, WavePlate angle);

/// Phases attached to the four routes through a polarizing beam splitter,
/// in the order (in1 H→t, in1 V→r, in2 H→r, in2 V→t).
using PbsPhases = std::array<Complex, 4>;

/// Polarizing beam splitter. H is transmitted, V reflected:
///   in1 H → out_t H,  in1 V → out_r V,  in2 H → out_r H,  in2 V → out_t V.
LinearTransform pbs(int in1, int in2, int out_t, int out_r, PbsPhases phases = {1.0, 1.0, 1.0, 1.0});

/// Beam-splitter loss model: the photon stays in `mode` with amplitude μ and
/// leaks into `ancilla` with amplitude √(1−|μ|²).
LinearTransform lossy_channel(ModeId mode, Complex mu, ModeId ancilla);

/// Single-mode phase shift a† → e^{iφ} a†.
LinearTransform phase_shift(ModeId mode, double phase);

/// Exchanges two modes.
LinearTransform mode_swap(ModeId a, ModeId b);

/// Applies `t` to every term of `s`. Inputs of `t` must be registered in `s`;
/// outputs replace them in the registry. Terms above `opts.n_max` are counted
/// into the truncated weight.
PureState apply(const LinearTransform& t, const PureState& s, const FockOptions& opts = {});

MixedEnsemble apply(const LinearTransform& t, const MixedEnsemble& e, const FockOptions& opts = {});

}  // namespace polpur

#endif  // POLPUR_OPTICS_HPP_
