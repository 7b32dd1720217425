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
#include <random>

#include "generators.hpp"
#include "polpur/detection.hpp"
#include "polpur/optics.hpp"
#include "polpur/protocol.hpp"
#include "polpur/sources.hpp"

namespace polpur {
namespace {

constexpr double kEtas[] = {0.0, 0.3, 0.7, 1.0};
constexpr double kNus[] = {0.0, 1e-6, 1e-4};

TEST(PovmN, PerfectResolutionAndBinomial) {
  for (int n = 0; n <= 4; ++n)
    for (int m = 0; m <= 6; ++m) EXPECT_EQ(povm_n(1.0, n)(m), m == n ? 1.0 : 0.0);
  EXPECT_DOUBLE_EQ(povm_n(0.5, 1)(2), 0.5);
  for (double eta : kEtas) {
    for (int m = 0; m <= 6; ++m) {
      double sum = 0.0;
      for (int n = 0; n <= m; ++n) sum += povm_n(eta, n)(m);
      EXPECT_NEAR(sum, 1.0, 1e-15);
    }
  }
  EXPECT_THROW(povm_n(1.2, 0), std::invalid_argument);
}

TEST(PovmConventional, ClickAndCompleteness) {
  for (int m = 1; m <= 6; ++m) EXPECT_EQ(povm_conventional(1.0, true)(m), 1.0);
  EXPECT_DOUBLE_EQ(povm_conventional(0.5, true)(2), 0.75);
  for (double eta : kEtas)
    for (int m = 0; m <= 6; ++m)
      EXPECT_NEAR(povm_conventional(eta, true)(m) + povm_conventional(eta, false)(m), 1.0, 1e-15);
}

TEST(PovmSingle, OneCountAndCompleteness) {
  for (int m = 0; m <= 6; ++m) EXPECT_EQ(povm_single(1.0, SingleOutcome::One)(m), m == 1 ? 1.0 : 0.0);
  EXPECT_DOUBLE_EQ(povm_single(0.5, SingleOutcome::One)(2), 0.5);
  for (double eta : kEtas) {
    for (int m = 0; m <= 6; ++m) {
      const double s = povm_single(eta, SingleOutcome::None)(m) + povm_single(eta, SingleOutcome::One)(m) +
                       povm_single(eta, SingleOutcome::Multi)(m);
      EXPECT_NEAR(s, 1.0, 1e-15);
      // One count is the n = 1 element of the number-resolving family.
      EXPECT_NEAR(povm_single(eta, SingleOutcome::One)(m), povm_n(eta, 1)(m), 1e-15);
    }
  }
}

TEST(OutcomeSetProperty, RowsSumToOneForEveryModel) {
  for (double eta : kEtas) {
    for (double nu : kNus) {
      for (const auto& set : {OutcomeSet::conventional(eta, nu), OutcomeSet::single_photon(eta, nu),
                              with_dark_counts(OutcomeSet::single_photon(eta), nu)}) {
        for (int m = 0; m <= 6; ++m) {
          double sum = 0.0;
          for (const auto& o : set.outcomes()) {
            EXPECT_GE(o.element(m), 0.0);
            EXPECT_LE(o.element(m), 1.0);
            sum += o.element(m);
          }
          EXPECT_EQ(sum, 1.0) << "eta=" << eta << " nu=" << nu << " m=" << m;
        }
      }
    }
  }
}

TEST(DarkCounts, ZeroMeanIsIdentity) {
  for (double eta : kEtas) {
    const auto base = OutcomeSet::conventional(eta);
    const auto same = with_dark_counts(base, 0.0);
    for (std::size_t i = 0; i < base.size(); ++i)
      for (int m = 0; m <= 6; ++m) EXPECT_EQ(base.element(i)(m), same.element(i)(m));
  }
}

TEST(DarkCounts, VacuumClickRates) {
  // The open bin is 1 minus the others, so small click rates carry an
  // absolute error of a few ulp of 1.
  const double nu_c = 1e-6;
  EXPECT_NEAR(with_dark_counts(OutcomeSet::conventional(0.8), nu_c).element(kClick)(0), -std::expm1(-nu_c),
              1e-16);
  const double nu_s = 1e-4;
  EXPECT_NEAR(with_dark_counts(OutcomeSet::single_photon(0.8), nu_s).element(kOneCount)(0),
              nu_s * std::exp(-nu_s), 1e-20);
}

TEST(DarkCountsProperty, PoissonConvolutionOracle) {
  // Oracle: direct double sum over real and dark counts.
  for (double eta : kEtas) {
    for (double nu : {1e-3, 0.2}) {
      for (int m = 0; m <= 6; ++m) {
        for (int k = 0; k <= 8; ++k) {
          double expected = 0.0;
          for (int real = 0; real <= std::min(k, m); ++real) {
            const int dark = k - real;
            const double binom = std::tgamma(m + 1) / (std::tgamma(real + 1) * std::tgamma(m - real + 1));
            expected += binom * std::pow(eta, real) * std::pow(1 - eta, m - real) * std::exp(-nu) *
                        std::pow(nu, dark) / std::tgamma(dark + 1);
          }
          EXPECT_NEAR(photocount_probability(k, m, eta, nu), expected, 1e-14);
        }
      }
    }
  }
}

TEST(SamplePhotocount, MeanMatchesModel) {
  std::mt19937_64 rng(41);
  const int m = 3, shots = 200000;
  const double eta = 0.6, nu = 0.05;
  double sum = 0.0;
  for (int i = 0; i < shots; ++i) sum += sample_photocount(m, eta, nu, rng);
  const double mean = m * eta + nu;
  const double sd = std::sqrt(m * eta * (1 - eta) + nu);
  EXPECT_NEAR(sum / shots, mean, 5.0 * sd / std::sqrt(shots));
}

MixedEnsemble circuit_output(const PairSpec& p) {
  return MixedEnsemble::pure(apply(purification_circuit(), ideal_two_pairs(p)));
}

TEST(Measure, VacuumNoCountLeavesStateUnchanged) {
  const PureState phi = bell_state(Bell::PhiPlus, 6, 2).with_modes(ModeRegistry{mode_h(5)});
  const auto r = measure(MixedEnsemble::pure(phi), std::map<ModeId, PovmElement>{{mode_h(5), povm_n(0.7, 0)}});
  EXPECT_NEAR(r.probability, 1.0, 1e-15);
  ASSERT_TRUE(r.conditional);
  EXPECT_NEAR(fidelity_to_bell(*r.conditional, Bell::PhiPlus, 6, 2), 1.0, 1e-15);
}

// Heralds on 5'H and 4'H with a given element; the other output modes of
// the detection stage are traced out.
MeasurementResult herald_hh(const MixedEnsemble& e, const PovmElement& el) {
  auto r = measure(e, std::map<ModeId, PovmElement>{{mode_h(5), el}, {mode_h(4), el}});
  if (r.conditional) r.conditional = trace_out(*r.conditional, ModeRegistry{mode_v(5), mode_v(4)});
  return r;
}

TEST(Measure, ConventionalHeraldProbabilityAndMixture) {
  for (double eta : {0.1, 0.5, 1.0}) {
    for (double a2 : {0.2, 0.5, 0.8}) {
      const double b2 = 1.0 - a2;
      const auto r = herald_hh(circuit_output(PairSpec::from_weight(a2)), povm_conventional(eta, true));
      EXPECT_NEAR(r.probability, eta * eta * b2 * (2 * a2 + (2 - eta) * b2) / 4, 1e-14);
      ASSERT_TRUE(r.conditional);
      const double w_phi = 2 * a2 / (2 * a2 + (2 - eta) * b2);
      EXPECT_NEAR(fidelity_to_bell(*r.conditional, Bell::PhiPlus, 6, 2), w_phi, 1e-12);
      const auto err = PureState::basis(r.conditional->registry(), {{mode_v(2), 1}});
      EXPECT_NEAR(r.conditional->expectation(err), 1.0 - w_phi, 1e-12);
    }
  }
}

TEST(Measure, SinglePhotonHeraldProbabilityAndMixture) {
  for (double eta : {0.1, 0.5, 1.0}) {
    for (double a2 : {0.2, 0.5, 0.8}) {
      const double b2 = 1.0 - a2;
      const auto r = herald_hh(circuit_output(PairSpec::from_weight(a2)), povm_single(eta, SingleOutcome::One));
      EXPECT_NEAR(r.probability, eta * eta * b2 * (a2 + (1 - eta) * b2) / 2, 1e-14);
      ASSERT_TRUE(r.conditional);
      EXPECT_NEAR(fidelity_to_bell(*r.conditional, Bell::PhiPlus, 6, 2), a2 / (a2 + (1 - eta) * b2), 1e-12);
    }
  }
}

TEST(MeasureProperty, ConditionalsReconstructReducedState) {
  std::mt19937_64 rng(42);
  const auto reg = ModeRegistry::of_spatial({1, 2});
  const std::vector<ModeId> det_modes{mode_h(1), mode_v(1)};
  const ModeRegistry measured(det_modes);
  for (double eta : kEtas) {
    for (double nu : kNus) {
      for (int trial = 0; trial < 5; ++trial) {
        MixedEnsemble e(reg);
        for (int k = 0; k < 3; ++k) e.add(testing::uniform(rng, 0.1, 1.0), testing::random_state(rng, reg, 6, 4));
        e = e.normalized();
        for (const auto& set : {OutcomeSet::conventional(eta, nu, 8), OutcomeSet::single_photon(eta, nu, 8)}) {
          MixedEnsemble sum(reg.without(measured));
          double total = 0.0;
          for (const auto& o : set.outcomes()) {
            const DetectorAssignment d{det_modes, o.element};
            const auto r = measure(e, std::span<const DetectorAssignment>(&d, 1));
            EXPECT_NEAR(r.probability, outcome_probability(e, std::span<const DetectorAssignment>(&d, 1)), 1e-15);
            total += r.probability;
            if (r.conditional) sum.add(r.probability, *r.conditional);
          }
          EXPECT_NEAR(total, 1.0, 1e-12);
          EXPECT_LT(testing::max_density_diff(testing::density(sum), testing::partial_trace(e, measured)), 1e-12);
        }
      }
    }
  }
}

TEST(Filter, KeepsRegistryAndRenormalizes) {
  const auto e = circuit_output(PairSpec::from_weight(0.5));
  const DetectorAssignment d{{mode_h(5), mode_v(5)}, povm_n(1.0, 0)};
  const auto r = filter(e, std::span<const DetectorAssignment>(&d, 1));
  // No photon in mode 5 happens only for the α² branch: weight |α|⁴ = 1/4.
  EXPECT_NEAR(r.probability, 0.25, 1e-15);
  ASSERT_TRUE(r.conditional);
  EXPECT_EQ(r.conditional->registry(), e.registry());
  EXPECT_NEAR(r.conditional->trace(), 1.0, 1e-15);
}

TEST(Measure, RejectsOverlappingDetectors) {
  const auto e = circuit_output(PairSpec::from_weight(0.5));
  const std::vector<DetectorAssignment> d{{{mode_h(5)}, povm_n(1, 0)}, {{mode_h(5)}, povm_n(1, 1)}};
  EXPECT_THROW(measure(e, d), ModeError);
}

}  // namespace
}  // namespace polpur
