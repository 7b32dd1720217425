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

#include "polpur/reference.hpp"

#include <stdexcept>

namespace polpur::reference {

namespace {

void check(double eta, double alpha_sq) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("efficiency outside [0,1]");
  if (!(alpha_sq >= 0.0 && alpha_sq <= 1.0)) throw std::invalid_argument("alpha_sq outside [0,1]");
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
}

}  // namespace

IdealPair ideal_conventional(double eta, double a2) {
  check(eta, a2);
  const double b2 = 1.0 - a2;
  IdealPair r;
  r.p = eta * eta * b2 * (2.0 * a2 + (2.0 - eta) * b2) / 4.0;
  r.p_s = eta * eta * a2 * b2 / 2.0;
  r.p_e = eta * eta * (2.0 - eta) * b2 * b2 / 4.0;
  const double norm = 1.0 - eta * b2 / 2.0;
  r.weight_phi = a2 / norm;
  r.weight_error = (1.0 - eta / 2.0) * b2 / norm;
  return r;
}

IdealPair ideal_single(double eta, double a2) {
  check(eta, a2);
  const double b2 = 1.0 - a2;
  IdealPair r;
  r.p = eta * eta * b2 * (a2 + (1.0 - eta) * b2) / 2.0;
  r.p_s = eta * eta * a2 * b2 / 2.0;
  r.p_e = eta * eta * (1.0 - eta) * b2 * b2 / 2.0;
  const double norm = 1.0 - eta * b2;
  r.weight_phi = a2 / norm;
  r.weight_error = (1.0 - eta) * b2 / norm;
  return r;
}

double pdc_g_squared(double gamma, double a2) {
  check_gamma(gamma);
  const double g = (1.0 - gamma * gamma * a2) * (1.0 - gamma * gamma * (1.0 - a2));
  return g * g;
}

Pdc pdc_conventional(double eta, double gamma, double a2) {
  check(eta, a2);
  const double b2 = 1.0 - a2;
  const double g2 = pdc_g_squared(gamma, a2);
  const double y2 = gamma * gamma;
  const double pre = eta * eta * g2 * y2 * b2;
  Pdc r;
  r.c = 4.0 + 4.0 * (4.0 - eta) * y2 * a2 + (24.0 - 28.0 * eta + 9.0 * eta * eta) * y2 * b2;
  r.p = pre * r.c / 16.0;
  r.p_s = eta * eta * g2 * y2 * y2 * a2 * b2 / 2.0;
  const double vac = 4.0 + (4.0 - 3.0 * eta) * (4.0 - 3.0 * eta) * y2 * b2;
  r.p_e0 = pre * vac / 16.0;
  r.p_e1 = eta * eta * (2.0 - eta) * g2 * y2 * y2 * b2 / 4.0;
  r.p_e0_no_veto = pre * (4.0 + (4.0 - eta) * (4.0 - eta) * y2 * b2) / 16.0;
  r.weights = {8.0 * y2 * a2 / r.c, vac / r.c, 4.0 * (2.0 - eta) * y2 * b2 / r.c,
               4.0 * (2.0 - eta) * y2 * a2 / r.c};
  return r;
}

Pdc pdc_single_photon(double eta, double gamma, double a2) {
  check(eta, a2);
  const double b2 = 1.0 - a2;
  const double g2 = pdc_g_squared(gamma, a2);
  const double y2 = gamma * gamma;
  const double pre = eta * eta * g2 * y2 * b2;
  Pdc r;
  r.c = 1.0 + 2.0 * (2.0 - eta) * y2 * a2 + 2.0 * (3.0 - 2.0 * eta) * (1.0 - eta) * y2 * b2;
  r.p = pre * r.c / 4.0;
  r.p_s = eta * eta * g2 * y2 * y2 * a2 * b2 / 2.0;
  const double vac = 1.0 + 4.0 * (1.0 - eta) * (1.0 - eta) * y2 * b2;
  r.p_e0 = pre * vac / 4.0;
  r.p_e1 = eta * eta * (1.0 - eta) * g2 * y2 * y2 * b2 / 2.0;
  r.p_e0_no_veto = pre * (1.0 + (2.0 - eta) * (2.0 - eta) * y2 * b2) / 4.0;
  r.weights = {2.0 * y2 * a2 / r.c, vac / r.c, 2.0 * (1.0 - eta) * y2 * b2 / r.c,
               2.0 * (1.0 - eta) * y2 * a2 / r.c};
  return r;
}

nlohmann::ordered_json to_json(const IdealPair& r) {
  return {{"p", r.p}, {"p_s", r.p_s}, {"p_e", r.p_e}, {"weight_phi", r.weight_phi},
          {"weight_error", r.weight_error}};
}

nlohmann::ordered_json to_json(const Pdc& r) {
  return {{"c", r.c},         {"p", r.p},
          {"p_s", r.p_s},     {"p_e0", r.p_e0},
          {"p_e1", r.p_e1},   {"p_e0_no_veto", r.p_e0_no_veto},
          {"weights", r.weights}};
}

}  // namespace polpur::reference
