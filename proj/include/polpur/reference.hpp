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

#ifndef POLPUR_REFERENCE_HPP_
#define POLPUR_REFERENCE_HPP_

#include <array>

#include <json.hpp>

namespace polpur::reference {

/// Closed forms for one (D_5'H, D_4'H) coincidence with an ideal pair source.
struct IdealPair {
  double p = 0.0;
  double p_s = 0.0;
  double p_e = 0.0;
  /// Output weights of |Φ⁺⟩₆₂ and of |0⟩₆|1⟩_2V.
  double weight_phi = 0.0;
  double weight_error = 0.0;
};

IdealPair ideal_conventional(double eta, double alpha_sq);
IdealPair ideal_single(double eta, double alpha_sq);

/// Closed forms for the double-pass down-conversion source, leading order in γ,
/// with the complementary detectors used as a veto.
struct Pdc {
  /// Normalization C of the output state.
  double c = 0.0;
  double p = 0.0;
  double p_s = 0.0;
  double p_e0 = 0.0;
  double p_e1 = 0.0;
  /// P_e0 when the complementary detectors are ignored.
  double p_e0_no_veto = 0.0;
  /// Output weights of |Φ⁺⟩₆₂, |0⟩₆|0⟩₂, |0⟩₆|1⟩_2V, |1⟩_6V|0⟩₂.
  std::array<double, 4> weights{};
};

/// g² for pair amplitude γ: the vacuum probability of the doubled source.
double pdc_g_squared(double gamma, double alpha_sq);

Pdc pdc_conventional(double eta, double gamma, double alpha_sq);
Pdc pdc_single_photon(double eta, double gamma, double alpha_sq);

nlohmann::ordered_json to_json(const IdealPair& r);
nlohmann::ordered_json to_json(const Pdc& r);

}  // namespace polpur::reference

#endif  // POLPUR_REFERENCE_HPP_
