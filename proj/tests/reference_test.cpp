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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "polpur/reference.hpp"

namespace polpur::reference {
namespace {

constexpr double kTol = 1e-15;

// Independent oracle for the ideal source: the detection-stage terms of the
// circuit output, listed as (|amplitude|², photons in 5'H, 5'V, 4'H, 4'V,
// whether modes 6 and 2 hold Φ±). Probabilities follow from per-detector
// click functions written out here.
struct Term {
  double weight;
  int n5h, n5v, n4h, n4v;
  bool bell;
};

std::vector<Term> detection_terms(double a2) {
  const double b2 = 1.0 - a2;
  return {{a2 * a2 / 2, 0, 0, 1, 0, false}, {a2 * a2 / 2, 0, 0, 0, 1, false},
          {b2 * b2 / 4, 2, 0, 1, 0, false}, {b2 * b2 / 4, 2, 0, 0, 1, false},
          {b2 * b2 / 4, 0, 2, 1, 0, false}, {b2 * b2 / 4, 0, 2, 0, 1, false},
          {a2 * b2 / 2, 1, 0, 1, 0, true},  {a2 * b2 / 2, 1, 0, 0, 1, true},
          {a2 * b2 / 2, 0, 1, 1, 0, true},  {a2 * b2 / 2, 0, 1, 0, 1, true}};
}

struct OracleResult {
  double p = 0, p_s = 0, p_e = 0;
};

OracleResult oracle(double a2, const std::function<double(int)>& fire, const std::function<double(int)>& silent) {
  OracleResult r;
  for (const auto& t : detection_terms(a2)) {
    const double w = t.weight * fire(t.n5h) * fire(t.n4h) * silent(t.n5v) * silent(t.n4v);
    r.p += w;
    (t.bell ? r.p_s : r.p_e) += w;
  }
  return r;
}

TEST(IdealConventional, MatchesTermByTermOracle) {
  for (int i = 1; i <= 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double eta = i / 10.0, a2 = 0.05 + j / 10.0;
      auto fire = [&](int m) { return 1.0 - std::pow(1.0 - eta, m); };
      auto silent = [&](int m) { return std::pow(1.0 - eta, m); };
      const OracleResult o = oracle(a2, fire, silent);
      const IdealPair r = ideal_conventional(eta, a2);
      EXPECT_NEAR(r.p, o.p, kTol);
      EXPECT_NEAR(r.p_s, o.p_s, kTol);
      EXPECT_NEAR(r.p_e, o.p_e, kTol);
      EXPECT_NEAR(r.weight_phi, o.p_s / o.p, 1e-13);
    }
  }
}

TEST(IdealSingle, MatchesTermByTermOracle) {
  for (int i = 1; i <= 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double eta = i / 10.0, a2 = 0.05 + j / 10.0;
      auto fire = [&](int m) { return m >= 1 ? m * eta * std::pow(1.0 - eta, m - 1) : 0.0; };
      auto silent = [&](int m) { return std::pow(1.0 - eta, m); };
      const OracleResult o = oracle(a2, fire, silent);
      const IdealPair r = ideal_single(eta, a2);
      EXPECT_NEAR(r.p, o.p, kTol);
      EXPECT_NEAR(r.p_s, o.p_s, kTol);
      EXPECT_NEAR(r.p_e, o.p_e, kTol);
      EXPECT_NEAR(r.weight_error, o.p_e / o.p, 1e-13);
    }
  }
}

TEST(IdealConventional, UnitEfficiencyWeights) {
  const IdealPair r = ideal_conventional(1.0, 0.5);
  EXPECT_NEAR(r.weight_phi, 2.0 / 3.0, kTol);
  EXPECT_NEAR(r.weight_error, 1.0 / 3.0, kTol);
  EXPECT_EQ(ideal_conventional(0.7, 1.0).p, 0.0);
}

TEST(IdealConventional, ErrorAtUnitEfficiencyIsQuarterBetaFourth) {
  for (double a2 : {0.1, 0.5, 0.9}) {
    const double b2 = 1 - a2;
    EXPECT_NEAR(ideal_conventional(1.0, a2).p_e, b2 * b2 / 4, kTol);
  }
}

TEST(IdealSingle, UnitEfficiencyHasNoErrorAndZeroEfficiencyNothing) {
  for (double a2 : {0.1, 0.5, 0.9}) {
    EXPECT_EQ(ideal_single(1.0, a2).p_e, 0.0);
    const IdealPair z = ideal_single(0.0, a2);
    EXPECT_EQ(z.p, 0.0);
    EXPECT_EQ(z.p_s, 0.0);
    EXPECT_EQ(z.p_e, 0.0);
  }
  // (1/4)(1/2)(1/2 + 1/4)/2
  EXPECT_NEAR(ideal_single(0.5, 0.5).p, 0.046875, kTol);
}

TEST(PdcConventional, NormalizerAtUnitEfficiency) {
  // 4 + 12·0.01·0.5 + 5·0.01·0.5
  EXPECT_NEAR(pdc_conventional(1.0, 0.1, 0.5).c, 4.085, 1e-14);
  EXPECT_EQ(pdc_conventional(0.6, 0.0, 0.5).p, 0.0);
}

TEST(PdcConventional, UnitEfficiencyErrorValues) {
  for (double gamma : {0.05, 0.1}) {
    for (double a2 : {0.2, 0.7}) {
      const double b2 = 1 - a2, y2 = gamma * gamma, g2 = pdc_g_squared(gamma, a2);
      const Pdc r = pdc_conventional(1.0, gamma, a2);
      EXPECT_NEAR(r.p_e0, g2 * y2 * b2 * (4 + y2 * b2) / 16, kTol);
      EXPECT_NEAR(r.p_e1, g2 * y2 * y2 * b2 / 4, kTol);
      EXPECT_NEAR(r.p_e0_no_veto, g2 * y2 * b2 * (4 + 9 * y2 * b2) / 16, kTol);
    }
  }
}

TEST(PdcSinglePhoton, UnitEfficiencyValues) {
  for (double gamma : {0.05, 0.1}) {
    for (double a2 : {0.2, 0.7}) {
      const double b2 = 1 - a2, y2 = gamma * gamma, g2 = pdc_g_squared(gamma, a2);
      const Pdc r = pdc_single_photon(1.0, gamma, a2);
      EXPECT_NEAR(r.c, 1 + 2 * y2 * a2, kTol);
      EXPECT_EQ(r.p_e1, 0.0);
      EXPECT_NEAR(r.p_e0, g2 * y2 * b2 / 4, kTol);
      EXPECT_NEAR(r.p_e0_no_veto, g2 * y2 * b2 * (1 + y2 * b2) / 4, kTol);
    }
  }
  EXPECT_EQ(pdc_single_photon(0.6, 0.0, 0.5).p, 0.0);
}

TEST(GSquared, MatchesDefinition) {
  EXPECT_NEAR(pdc_g_squared(0.1, 0.5), std::pow(1 - 0.005, 4), kTol);
  EXPECT_THROW(pdc_g_squared(1.0, 0.5), std::invalid_argument);
}

TEST(ReferenceProperty, ProbabilitiesDecomposeAndWeightsSumToOne) {
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double eta = i / 20.0, a2 = j / 20.0;
      for (const IdealPair& r : {ideal_conventional(eta, a2), ideal_single(eta, a2)}) {
        EXPECT_NEAR(r.p, r.p_s + r.p_e, 1e-12);
        if (r.p > 0) {
          EXPECT_NEAR(r.weight_phi + r.weight_error, 1.0, 1e-12);
        }
      }
      for (double gamma : {0.0, 0.05, 0.1, 0.3}) {
        for (const Pdc& r : {pdc_conventional(eta, gamma, a2), pdc_single_photon(eta, gamma, a2)}) {
          EXPECT_NEAR(r.p, r.p_s + r.p_e0 + r.p_e1, 1e-12);
          EXPECT_NEAR(r.weights[0] + r.weights[1] + r.weights[2] + r.weights[3], 1.0, 1e-12);
          EXPECT_GE(r.p_e0_no_veto, r.p_e0 - 1e-18);
        }
      }
    }
  }
}

TEST(Reference, RejectsOutOfRangeInputs) {
  EXPECT_THROW(ideal_conventional(1.1, 0.5), std::invalid_argument);
  EXPECT_THROW(ideal_single(0.5, -0.1), std::invalid_argument);
  EXPECT_THROW(pdc_conventional(0.5, 1.2, 0.5), std::invalid_argument);
}

}  // namespace
}  // namespace polpur::reference
