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
#include <numbers>
#include <random>

#include "generators.hpp"
#include "polpur/channels.hpp"

namespace polpur {
namespace {

using std::numbers::pi;

ChannelSample random_sample(std::mt19937_64& rng, double min_mag = 0.1) {
  ChannelSample s;
  for (int k = 1; k <= 4; ++k)
    for (Pol p : {Pol::H, Pol::V}) s.set_mu(k, p, std::polar(testing::uniform(rng, min_mag, 1.0), testing::random_phase(rng)));
  return s;
}

// (μ_aH μ_bH |HH⟩ + μ_aV μ_bV |VV⟩) normalized.
PureState expected_pair(const ChannelSample& s, int a, int b) {
  PureState p(ModeRegistry::of_spatial({a, b}));
  p.add({{mode_h(a), 1}, {mode_h(b), 1}}, s.mu(a, Pol::H) * s.mu(b, Pol::H));
  p.add({{mode_v(a), 1}, {mode_v(b), 1}}, s.mu(a, Pol::V) * s.mu(b, Pol::V));
  return p.normalized();
}

TEST(ChannelSample, RejectsGain) {
  ChannelSample s;
  s.set_mu(2, Pol::V, 1.1);
  EXPECT_THROW(s.validate(), std::invalid_argument);
  EXPECT_THROW(s.mu(5, Pol::H), ModeError);
}

TEST(Transmit, LosslessKeepsInput) {
  const TransmitResult r = transmit(ChannelSample{});
  EXPECT_NEAR(r.four_photon_weight, 1.0, 1e-15);
  ASSERT_TRUE(r.four_photon);
  const PureState in = tensor(bell_state(Bell::PhiPlus, 1, 2), bell_state(Bell::PhiPlus, 3, 4));
  EXPECT_NEAR(r.four_photon->expectation(in), 1.0, 1e-14);
}

TEST(Transmit, OpaqueVerticalChannelLeavesProductPair) {
  ChannelSample s;
  s.set_mu(1, Pol::V, 0.0);
  const auto pc = pair_coefficients(s);
  ASSERT_TRUE(pc);
  EXPECT_EQ(pc->pair12.beta, Complex(0.0));
  EXPECT_NEAR(std::abs(pc->pair12.alpha), 1.0, 1e-15);
  // ¼ (1 + 0)(1 + 1)
  EXPECT_NEAR(transmit(s).four_photon_weight, 0.5, 1e-15);
}

TEST(TransmitProperty, FourPhotonWeightAndStateMatchChannelProducts) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const ChannelSample s = random_sample(rng);
    auto n2 = [&](int k, Pol p) { return std::norm(s.mu(k, p)); };
    const double expected = 0.25 * (n2(1, Pol::H) * n2(2, Pol::H) + n2(1, Pol::V) * n2(2, Pol::V)) *
                            (n2(3, Pol::H) * n2(4, Pol::H) + n2(3, Pol::V) * n2(4, Pol::V));
    const TransmitResult r = transmit(s);
    EXPECT_NEAR(r.four_photon_weight, expected, 1e-10);
    EXPECT_NEAR(four_photon_weight(s), expected, 1e-15);
    EXPECT_NEAR(r.received.trace(), 1.0, 1e-12);
    ASSERT_TRUE(r.four_photon);
    const PureState product = tensor(expected_pair(s, 1, 2), expected_pair(s, 3, 4));
    EXPECT_NEAR(r.four_photon->expectation(product), 1.0, 1e-10);
  }
}

TEST(FFactors, EqualChannelsGiveUnity) {
  ChannelSample s;
  for (int k = 1; k <= 4; ++k)
    for (Pol p : {Pol::H, Pol::V}) s.set_mu(k, p, std::polar(0.7, 0.3));
  const FFactors f = f_factors(s);
  ASSERT_TRUE(f.f && f.f_a && f.f_b);
  EXPECT_NEAR(std::abs(*f.f - 1.0), 0.0, 1e-15);
}

TEST(FFactors, PhaseOnOneChannelRotatesF) {
  ChannelSample s;
  s.set_mu(1, Pol::H, std::polar(1.0, 0.4));
  const Complex f = *f_factors(s).f;
  EXPECT_NEAR(std::abs(f), 1.0, 1e-15);
  EXPECT_NEAR(std::arg(f), 0.4, 1e-15);
}

TEST(FFactors, UndefinedForZeroDenominator) {
  ChannelSample s;
  s.set_mu(3, Pol::H, 0.0);
  const FFactors f = f_factors(s);
  EXPECT_FALSE(f.f);
  EXPECT_FALSE(f.f_a);
  EXPECT_TRUE(f.f_b);
}

TEST(FFactorsProperty, FactorsIntoAliceAndBob) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 100; ++trial) {
    const FFactors f = f_factors(random_sample(rng));
    EXPECT_NEAR(std::abs(*f.f - *f.f_a * *f.f_b), 0.0, 1e-10 * std::abs(*f.f));
  }
}

TEST(Purifiability, ConstantFactorsArePurifiable) {
  std::mt19937_64 rng(63);
  const auto rep = purifiability(FluctuationProcess::constant_f(std::polar(0.8, 0.4), std::polar(1.0 / 0.8, -0.4)),
                                 rng, {.samples = 2000});
  EXPECT_LE(rep.condition, 1e-12);
  EXPECT_TRUE(rep.purifiable);
  EXPECT_NEAR(rep.post_fidelity, 1.0, 1e-9);
}

TEST(Purifiability, UniformPhasesAreNot) {
  std::mt19937_64 rng(64);
  const auto rep = purifiability(FluctuationProcess::uniform_phases(), rng, {.samples = 2000});
  EXPECT_GT(rep.condition, 3 * rep.condition_stderr);
  EXPECT_FALSE(rep.purifiable);
  EXPECT_LT(rep.post_fidelity, 0.99);
}

TEST(Purifiability, DeterministicChannelIsOneSample) {
  std::mt19937_64 rng(65);
  ChannelSample s;
  s.set_mu(2, Pol::V, std::polar(0.5, 1.0));
  const auto rep = purifiability(FluctuationProcess::constant(s), rng);
  EXPECT_EQ(rep.samples, 1u);
  // Only pair 12 is distorted, so the two received pairs differ.
  EXPECT_FALSE(rep.purifiable);
  EXPECT_LT(rep.post_fidelity, 0.99);

  ChannelSample both = s;
  both.set_mu(4, Pol::V, std::polar(0.5, 1.0));
  const auto same = purifiability(FluctuationProcess::constant(both), rng);
  EXPECT_TRUE(same.purifiable);
  EXPECT_NEAR(same.post_fidelity, 1.0, 1e-12);
}

TEST(PurifiabilityProperty, ConditionZeroIffUnitFidelity) {
  std::mt19937_64 rng(66);
  std::vector<FluctuationProcess> processes{FluctuationProcess::uniform_phases(),
                                            FluctuationProcess::independent(0.3),
                                            FluctuationProcess::constant_f(std::polar(0.5, pi / 3), 1.0),
                                            FluctuationProcess::constant_f(2.0, std::polar(0.7, -1.0))};
  for (int i = 0; i < 3; ++i) {
    const Complex fa = std::polar(testing::uniform(rng, 0.3, 2.0), testing::random_phase(rng));
    const Complex fb = std::polar(testing::uniform(rng, 0.3, 2.0), testing::random_phase(rng));
    processes.push_back(FluctuationProcess::constant_f(fa, fb));
  }
  for (const auto& p : processes) {
    const auto rep = purifiability(p, rng, {.samples = 1000});
    EXPECT_EQ(rep.purifiable, std::abs(rep.post_fidelity - 1.0) <= 1e-9) << p.name();
  }
}

TEST(Compensate, UnitFIsIdentity) {
  EXPECT_TRUE(compensate(Complex(1.0)).is_identity());
  EXPECT_THROW(compensate(Complex(0.0)), std::invalid_argument);
}

TEST(Compensate, ConstantFIsRestored) {
  std::mt19937_64 rng(67);
  const Complex f = std::polar(0.5, pi / 3);
  const auto process = FluctuationProcess::constant_f(f, 1.0);
  const Compensation c = compensate(f);
  EXPECT_EQ(c.mode, mode_h(3));
  EXPECT_TRUE(c.transform().is_unitary());
  const auto before = purifiability(process, rng, {.samples = 1000});
  const auto after = purifiability(compensated(process, c), rng, {.samples = 1000});
  EXPECT_FALSE(before.purifiable);
  EXPECT_LE(after.condition, 1e-12);
  EXPECT_TRUE(after.purifiable);
  EXPECT_NEAR(after.post_fidelity, 1.0, 1e-9);
}

TEST(Compensate, LargeFAttenuatesOppositePolarization) {
  std::mt19937_64 rng(68);
  const Complex f = std::polar(2.5, -0.7);
  const Compensation c = compensate(f);
  EXPECT_EQ(c.mode, mode_v(3));
  EXPECT_LE(std::abs(c.factor), 1.0);
  const auto after = purifiability(compensated(FluctuationProcess::constant_f(1.0, f), c), rng, {.samples = 500});
  EXPECT_TRUE(after.purifiable);
  EXPECT_NEAR(after.post_fidelity, 1.0, 1e-9);
}

TEST(CompensateProperty, PerSampleCompensationGivesUnitF) {
  std::mt19937_64 rng(69);
  for (int trial = 0; trial < 50; ++trial) {
    const ChannelSample s = random_sample(rng, 0.3);
    const ChannelSample fixed = compensate(s).applied_to(s);
    EXPECT_NEAR(std::abs(*f_factors(fixed).f - 1.0), 0.0, 1e-12);
  }
}

MixedEnsemble pair_state(Complex a, Complex b) { return MixedEnsemble::pure(ideal_pair(PairSpec::make(a, b))); }

TEST(Procrustean, BalancedPairNeedsNoAttenuation) {
  const auto r = procrustean(pair_state(std::sqrt(0.5), std::sqrt(0.5)));
  EXPECT_NEAR(r.success_probability, 1.0, 1e-15);
  EXPECT_NEAR(r.fidelity, 1.0, 1e-15);
  EXPECT_NEAR(std::abs(r.attenuation.factor), 1.0, 1e-15);
}

TEST(Procrustean, UnbalancedPair) {
  const auto r = procrustean(pair_state(std::sqrt(0.8), std::sqrt(0.2)));
  EXPECT_NEAR(r.success_probability, 0.4, 1e-15);
  EXPECT_NEAR(r.fidelity, 1.0, 1e-15);
  EXPECT_EQ(r.attenuation.mode, mode_h(1));
  const auto v = procrustean(pair_state(std::sqrt(0.3), std::polar(std::sqrt(0.7), 1.0)));
  EXPECT_NEAR(v.success_probability, 0.6, 1e-15);
  EXPECT_NEAR(v.fidelity, 1.0, 1e-14);
  EXPECT_EQ(v.attenuation.mode, mode_v(1));
}

TEST(Procrustean, RejectsUnknownPairs) {
  MixedEnsemble e(ModeRegistry::of_spatial({1, 2}));
  e.add(0.5, ideal_pair(PairSpec::from_weight(0.3)));
  e.add(0.5, ideal_pair(PairSpec::from_weight(0.7)));
  EXPECT_THROW(procrustean(e), std::invalid_argument);
}

TEST(Fiber, ClassifiesByCorrelationTimes) {
  EXPECT_EQ(classify_fiber_case(1.0, 1.0, 1e-3), FiberCase::A);
  EXPECT_EQ(classify_fiber_case(1e-6, 1.0, 1e-3), FiberCase::B);
  EXPECT_EQ(classify_fiber_case(1.0, 1e-6, 1e-3), FiberCase::C);
  EXPECT_EQ(classify_fiber_case(1e-6, 1e-6, 1e-3), FiberCase::D);
  EXPECT_THROW(classify_fiber_case(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST(Fiber, NamesRoundTrip) {
  for (auto c : {FiberCase::A, FiberCase::B, FiberCase::C, FiberCase::D}) EXPECT_EQ(fiber_case_from_string(to_string(c)), c);
  for (auto s : {SwapStrategy::Auto, SwapStrategy::None, SwapStrategy::Swap1V3H, SwapStrategy::Swap1V3V})
    EXPECT_EQ(swap_strategy_from_string(to_string(s)), s);
  for (auto m : {PhaseModel::Idealized, PhaseModel::OrnsteinUhlenbeck}) EXPECT_EQ(phase_model_from_string(to_string(m)), m);
}

TEST(Fiber, SwapInCaseAGivesBellPairsDirectly) {
  // Equal phases at both times: after the swap each pair sees one common phase.
  const ChannelSample s = fiber_sample(0.3, 1.1, 0.3, 1.1, SwapStrategy::Swap1V3H);
  const auto pc = pair_coefficients(s);
  ASSERT_TRUE(pc);
  EXPECT_NEAR(std::abs(pc->pair12.alpha - pc->pair12.beta), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(pc->pair34.alpha - pc->pair34.beta), 0.0, 1e-15);
}

FiberReport run_case(FiberCase c, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return fiber_scenario({.fiber_case = c, .samples = samples}, rng);
}

TEST(FiberScenario, IdealizedCases) {
  const FiberReport a = run_case(FiberCase::A, 500, 71);
  EXPECT_FALSE(a.purification_used);
  EXPECT_NEAR(a.fidelity, 1.0, 1e-9);
  const FiberReport b = run_case(FiberCase::B, 500, 72);
  EXPECT_TRUE(b.purification_used);
  EXPECT_NEAR(b.fidelity, 1.0, 1e-9);
  EXPECT_LT(b.direct_fidelity, 0.99);
  const FiberReport c = run_case(FiberCase::C, 500, 73);
  EXPECT_EQ(c.strategy, SwapStrategy::Swap1V3V);
  EXPECT_NEAR(c.fidelity, 1.0, 1e-9);
  const FiberReport d = run_case(FiberCase::D, 2000, 74);
  EXPECT_FALSE(d.success);
  EXPECT_LT(d.fidelity, 0.99);
}

TEST(FiberScenario, GaussianModelSeparatesRegimes) {
  std::mt19937_64 rng(75);
  FiberOptions o{.samples = 500, .model = PhaseModel::OrnsteinUhlenbeck};
  o.dt = 1e-3;
  o.tau_plus = 1e-6;
  o.tau_minus = 1e3;
  const FiberReport b = fiber_scenario(o, rng);
  EXPECT_EQ(b.fiber_case, FiberCase::B);
  EXPECT_GT(b.fidelity, 0.999);
  o.tau_minus = 1e-6;
  const FiberReport d = fiber_scenario(o, rng);
  EXPECT_EQ(d.fiber_case, FiberCase::D);
  EXPECT_LT(d.fidelity, 0.99);
}

TEST(FiberScenario, SameSeedSameReport) {
  EXPECT_EQ(run_case(FiberCase::D, 300, 9).to_json(), run_case(FiberCase::D, 300, 9).to_json());
}

}  // namespace
}  // namespace polpur
