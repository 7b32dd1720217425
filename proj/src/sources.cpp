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

#include "polpur/sources.hpp"

#include <cmath>
#include <stdexcept>

namespace polpur {

namespace {

Complex unit_phase(Complex z) { return z == Complex{} ? Complex{1.0} : z / std::abs(z); }

Complex ipow(Complex z, int n) {
  Complex r{1.0};
  for (int k = 0; k < n; ++k) r *= z;
  return r;
}

double sech2(double x) {
  double c = std::cosh(x);
  return 1.0 / (c * c);
}

}  // namespace

PairSpec PairSpec::make(Complex alpha, Complex beta) {
  PairSpec p{alpha, beta};
  if (!p.is_normalized()) throw std::invalid_argument("pair coefficients not normalized");
  return p;
}

PairSpec PairSpec::from_weight(double alpha_sq, double relative_phase) {
  if (!(alpha_sq >= 0.0 && alpha_sq <= 1.0)) throw std::invalid_argument("alpha_sq outside [0,1]");
  return {std::sqrt(alpha_sq), std::polar(std::sqrt(1.0 - alpha_sq), relative_phase)};
}

bool PairSpec::is_normalized(double tol) const {
  return std::abs(std::norm(alpha) + std::norm(beta) - 1.0) <= tol;
}

PdcSpec::PdcSpec(Complex gamma_h, Complex gamma_v) : gamma_h_(gamma_h), gamma_v_(gamma_v) {
  if (!(gamma() < 1.0)) throw std::invalid_argument("pair amplitude gamma must be < 1");
}

PdcSpec PdcSpec::from_pair(double gamma, const PairSpec& pair, double pump_phase) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
  if (!pair.is_normalized()) throw std::invalid_argument("pair coefficients not normalized");
  auto coupling = [&](Complex c) {
    double r = std::atanh(gamma * std::abs(c));
    return std::polar(r, pump_phase + std::arg(unit_phase(c)));
  };
  return PdcSpec(coupling(pair.alpha), coupling(pair.beta));
}

double PdcSpec::gamma() const {
  double th = std::tanh(std::abs(gamma_h_));
  double tv = std::tanh(std::abs(gamma_v_));
  return std::sqrt(th * th + tv * tv);
}

double PdcSpec::g() const { return sech2(std::abs(gamma_h_)) * sech2(std::abs(gamma_v_)); }

double PdcSpec::pump_phase() const {
  // Mean of the two pump phases; a crystal with zero coupling does not fix its phase.
  if (gamma_h_ == Complex{} && gamma_v_ == Complex{}) return 0.0;
  if (gamma_h_ == Complex{}) return std::arg(gamma_v_);
  if (gamma_v_ == Complex{}) return std::arg(gamma_h_);
  return std::arg(gamma_h_ * gamma_v_) / 2.0;
}

PairSpec PdcSpec::pair() const {
  double gm = gamma();
  if (gm == 0.0) return {1.0, 0.0};
  Complex common = std::polar(1.0, -pump_phase());
  return {unit_phase(gamma_h_) * std::tanh(std::abs(gamma_h_)) / gm * common,
          unit_phase(gamma_v_) * std::tanh(std::abs(gamma_v_)) / gm * common};
}

PureState ideal_pair(const PairSpec& spec, int mode_a, int mode_b) {
  if (!spec.is_normalized()) throw std::invalid_argument("pair coefficients not normalized");
  PureState s(ModeRegistry::of_spatial({mode_a, mode_b}));
  if (spec.alpha != Complex{}) s.add({{mode_h(mode_a), 1}, {mode_h(mode_b), 1}}, spec.alpha);
  if (spec.beta != Complex{}) s.add({{mode_v(mode_a), 1}, {mode_v(mode_b), 1}}, spec.beta);
  return s;
}

PureState ideal_two_pairs(const PairSpec& spec) {
  return tensor(ideal_pair(spec, 1, 2), ideal_pair(spec, 3, 4));
}

PureState pdc_single(const PdcSpec& spec, int mode_a, int mode_b, int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  const Complex rh = unit_phase(spec.gamma_h()) * std::tanh(std::abs(spec.gamma_h()));
  const Complex rv = unit_phase(spec.gamma_v()) * std::tanh(std::abs(spec.gamma_v()));
  const double amp0 = std::sqrt(spec.g());

  PureState s(ModeRegistry::of_spatial({mode_a, mode_b}));
  // The kept sectors have 2(n+m) ≤ n_max photons; the geometric tail is the rest.
  double kept = 0.0;
  for (int n = 0; 2 * n <= n_max; ++n) {
    for (int m = 0; 2 * (n + m) <= n_max; ++m) {
      Complex a = amp0 * ipow(rh, n) * ipow(rv, m);
      if (a == Complex{}) continue;
      s.add({{mode_h(mode_a), n}, {mode_h(mode_b), n}, {mode_v(mode_a), m}, {mode_v(mode_b), m}},
            a);
      kept += std::norm(a);
    }
  }
  s.set_truncated_weight(std::max(0.0, 1.0 - kept));
  return s;
}

PureState pdc_double(const PdcSpec& spec, int n_max) {
  PureState s = tensor(pdc_single(spec, 1, 2, n_max), pdc_single(spec, 3, 4, n_max));
  s.apply_options({.n_max = n_max, .prune_tol = 0.0});
  s.set_truncated_weight(std::max(0.0, 1.0 - s.norm2()));
  return s;
}

MixedEnsemble phase_averaged_pdc(const PdcSpec& spec, int n_max) {
  PureState s = pdc_double(spec, n_max);
  MixedEnsemble e(s.registry());
  auto modes = s.registry().modes();
  for (int total = 0; total <= n_max; total += 2) {
    e.add_unnormalized(1.0, s.photon_sector(modes, total));
  }
  e.set_dropped_weight(s.truncated_weight());
  return e;
}

MixedEnsemble fixed_phase_pdc(const PdcSpec& spec, int n_max) {
  PureState s = pdc_double(spec, n_max);
  MixedEnsemble e(s.registry());
  e.add_unnormalized(1.0, s);
  e.set_dropped_weight(s.truncated_weight());
  return e;
}

}  // namespace polpur
