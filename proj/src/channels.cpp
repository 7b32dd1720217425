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

#include "polpur/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "polpur/protocol.hpp"

namespace polpur {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ModeId ancilla_of(ModeId m) { return {m.spatial + kAncillaOffset, m.pol}; }

Complex random_phase(std::mt19937_64& rng) {
  return std::polar(1.0, std::uniform_real_distribution<double>(0.0, kTwoPi)(rng));
}

RunConfig perfect_detection() {
  return RunConfig::uniform(IdealSource{}, DetectorModel{DetectorKind::SinglePhoton, 1.0, 0.0});
}

double pair_fidelity(const PairSpec& p) { return std::norm(p.alpha + p.beta) / 2.0; }

}  // namespace

// ---------------------------------------------------------------------------
// ChannelSample

ChannelSample::ChannelSample() { mu_.fill(1.0); }

std::size_t ChannelSample::index(int k, Pol p) {
  if (k < 1 || k > 4) throw ModeError("channel index must be 1..4");
  return static_cast<std::size_t>((k - 1) * 2 + (p == Pol::H ? 0 : 1));
}

Complex ChannelSample::mu(int k, Pol p) const { return mu_[index(k, p)]; }

void ChannelSample::set_mu(int k, Pol p, Complex value) { mu_[index(k, p)] = value; }

void ChannelSample::validate() const {
  for (int k = 1; k <= 4; ++k) {
    for (Pol p : {Pol::H, Pol::V}) {
      Complex m = mu(k, p);
      if (!std::isfinite(m.real()) || !std::isfinite(m.imag()) || std::abs(m) > 1.0 + 1e-12) {
        throw std::invalid_argument("channel transmission mu_" + ModeId{k, p}.label() +
                                    " must satisfy |mu| <= 1");
      }
    }
  }
}

nlohmann::ordered_json ChannelSample::to_json() const {
  nlohmann::ordered_json j;
  for (int k = 1; k <= 4; ++k) {
    for (Pol p : {Pol::H, Pol::V}) {
      Complex m = mu(k, p);
      j[ModeId{k, p}.label()] = {m.real(), m.imag()};
    }
  }
  return j;
}

TransmitResult transmit(const ChannelSample& sample) {
  sample.validate();
  const ModeRegistry pair_modes = ModeRegistry::of_spatial({1, 2, 3, 4});
  const ModeRegistry ancillas = ModeRegistry::of_spatial(
      {1 + kAncillaOffset, 2 + kAncillaOffset, 3 + kAncillaOffset, 4 + kAncillaOffset});
  PureState s = tensor(bell_state(Bell::PhiPlus, 1, 2), bell_state(Bell::PhiPlus, 3, 4))
                    .with_modes(ancillas);
  for (ModeId m : pair_modes.modes()) {
    s = apply(lossy_channel(m, sample.mu(m.spatial, m.pol), ancilla_of(m)), s);
  }
  TransmitResult r;
  r.received = trace_out(MixedEnsemble::pure(s), ancillas);
  MixedEnsemble four(pair_modes);
  for (const auto& c : r.received.components()) {
    four.add_unnormalized(c.weight, c.state.photon_sector(pair_modes.modes(), 4));
  }
  r.four_photon_weight = four.trace();
  if (r.four_photon_weight > kZeroProbability) r.four_photon = four.normalized();
  return r;
}

double four_photon_weight(const ChannelSample& s) {
  const double n12 = std::norm(s.mu(1, Pol::H) * s.mu(2, Pol::H)) + std::norm(s.mu(1, Pol::V) * s.mu(2, Pol::V));
  const double n34 = std::norm(s.mu(3, Pol::H) * s.mu(4, Pol::H)) + std::norm(s.mu(3, Pol::V) * s.mu(4, Pol::V));
  return n12 * n34 / 4.0;
}

std::optional<PairCoefficients> pair_coefficients(const ChannelSample& s) {
  auto pair = [&](int a, int b) -> std::optional<PairSpec> {
    Complex h = s.mu(a, Pol::H) * s.mu(b, Pol::H);
    Complex v = s.mu(a, Pol::V) * s.mu(b, Pol::V);
    double n = std::sqrt(std::norm(h) + std::norm(v));
    if (n == 0.0) return std::nullopt;
    return PairSpec{h / n, v / n};
  };
  auto p12 = pair(1, 2);
  auto p34 = pair(3, 4);
  if (!p12 || !p34) return std::nullopt;
  return PairCoefficients{*p12, *p34};
}

FFactors f_factors(const ChannelSample& s) {
  auto ratio = [](Complex num, Complex den) -> std::optional<Complex> {
    if (den == Complex{}) return std::nullopt;
    return num / den;
  };
  const Complex m1h = s.mu(1, Pol::H), m1v = s.mu(1, Pol::V);
  const Complex m2h = s.mu(2, Pol::H), m2v = s.mu(2, Pol::V);
  const Complex m3h = s.mu(3, Pol::H), m3v = s.mu(3, Pol::V);
  const Complex m4h = s.mu(4, Pol::H), m4v = s.mu(4, Pol::V);
  return {ratio(m1h * m2h * m3v * m4v, m1v * m2v * m3h * m4h), ratio(m1h * m3v, m1v * m3h),
          ratio(m2h * m4v, m2v * m4h)};
}

// ---------------------------------------------------------------------------
// FluctuationProcess

FluctuationProcess::FluctuationProcess(std::string name, Sampler sampler, bool deterministic)
    : name_(std::move(name)), sampler_(std::move(sampler)), deterministic_(deterministic) {}

FluctuationProcess FluctuationProcess::constant(const ChannelSample& sample) {
  sample.validate();
  return {"constant", [sample](std::mt19937_64&) { return sample; }, true};
}

FluctuationProcess FluctuationProcess::uniform_phases() {
  return {"uniform_phases", [](std::mt19937_64& rng) {
            ChannelSample s;
            for (int k = 1; k <= 4; ++k) {
              for (Pol p : {Pol::H, Pol::V}) s.set_mu(k, p, random_phase(rng));
            }
            return s;
          }};
}

FluctuationProcess FluctuationProcess::constant_f(Complex f_a, Complex f_b) {
  if (f_a == Complex{} || f_b == Complex{}) throw std::invalid_argument("F_A and F_B must be nonzero");
  // μ3V = c·F_A·μ1V·μ3H/μ1H and the same on Bob's side, rescaled into the unit disc.
  return {"constant_f", [f_a, f_b](std::mt19937_64& rng) {
            std::uniform_real_distribution<double> mag(0.3, 1.0);
            ChannelSample s;
            auto side = [&](int x, int y, Complex f) {
              Complex xh = mag(rng) * random_phase(rng), xv = mag(rng) * random_phase(rng);
              Complex yh = mag(rng) * random_phase(rng);
              Complex yv = f * xv * yh / xh;
              double scale = std::max({1.0, std::abs(yv)});
              s.set_mu(x, Pol::H, xh / scale);
              s.set_mu(x, Pol::V, xv / scale);
              s.set_mu(y, Pol::H, yh / scale);
              s.set_mu(y, Pol::V, yv / scale);
            };
            side(1, 3, f_a);
            side(2, 4, f_b);
            return s;
          }};
}

FluctuationProcess FluctuationProcess::independent(double min_mag) {
  if (!(min_mag >= 0.0 && min_mag <= 1.0)) throw std::invalid_argument("min_mag outside [0,1]");
  return {"independent", [min_mag](std::mt19937_64& rng) {
            std::uniform_real_distribution<double> mag(min_mag, 1.0);
            ChannelSample s;
            for (int k = 1; k <= 4; ++k) {
              for (Pol p : {Pol::H, Pol::V}) s.set_mu(k, p, mag(rng) * random_phase(rng));
            }
            return s;
          }};
}

ChannelSample FluctuationProcess::sample(std::mt19937_64& rng) const {
  ChannelSample s = sampler_(rng);
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Purifiability

nlohmann::ordered_json PurifiabilityReport::to_json() const {
  return {{"condition", condition},         {"condition_stderr", condition_stderr},
          {"mean_weight", mean_weight},     {"purifiable", purifiable},
          {"post_fidelity", post_fidelity}, {"samples", samples}};
}

PurifiabilityReport purifiability(const FluctuationProcess& process, std::mt19937_64& rng,
                                  const PurifiabilityOptions& opts) {
  if (opts.samples == 0) throw std::invalid_argument("need at least one sample");
  const std::size_t n = process.deterministic() ? 1 : opts.samples;
  std::vector<PairDraw> draws;
  draws.reserve(n);
  double sum = 0.0, sum_sq = 0.0, weight = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ChannelSample s = process.sample(rng);
    Complex d = s.mu(1, Pol::H) * s.mu(2, Pol::H) * s.mu(3, Pol::V) * s.mu(4, Pol::V) -
                s.mu(1, Pol::V) * s.mu(2, Pol::V) * s.mu(3, Pol::H) * s.mu(4, Pol::H);
    double x = std::norm(d) / 4.0;
    sum += x;
    sum_sq += x * x;
    double w = four_photon_weight(s);
    weight += w;
    if (auto pc = pair_coefficients(s); pc && w > 0.0) draws.push_back({w, pc->pair12, pc->pair34});
  }
  PurifiabilityReport r;
  r.samples = n;
  const double dn = static_cast<double>(n);
  r.condition = sum / dn;
  r.mean_weight = weight / dn;
  if (n > 1) {
    double var = std::max(0.0, (sum_sq - dn * r.condition * r.condition) / (dn - 1.0));
    r.condition_stderr = std::sqrt(var / dn);
  }
  r.purifiable = r.condition <= std::max(opts.abs_tol, opts.sigmas * r.condition_stderr);
  if (!draws.empty()) r.post_fidelity = run_mixture(draws, perfect_detection()).fidelity;
  return r;
}

// ---------------------------------------------------------------------------
// Compensation and the Procrustean method

LinearTransform Compensation::transform() const {
  return lossy_channel(mode, factor, ancilla_of(mode));
}

ChannelSample Compensation::applied_to(ChannelSample sample) const {
  sample.set_mu(mode.spatial, mode.pol, sample.mu(mode.spatial, mode.pol) * factor);
  return sample;
}

Compensation compensate(Complex f) {
  if (f == Complex{} || !std::isfinite(std::abs(f))) throw std::invalid_argument("F must be finite and nonzero");
  if (std::abs(f) <= 1.0) return {mode_h(3), f};
  return {mode_v(3), 1.0 / f};
}

Compensation compensate(const ChannelSample& sample) {
  auto f = f_factors(sample).f;
  if (!f) throw std::invalid_argument("F undefined for this sample");
  return compensate(*f);
}

FluctuationProcess compensated(const FluctuationProcess& process, const Compensation& c) {
  return {process.name() + "+compensated",
          [process, c](std::mt19937_64& rng) { return c.applied_to(process.sample(rng)); },
          process.deterministic()};
}

ProcrusteanResult procrustean(const MixedEnsemble& pair, int mode_a, int mode_b) {
  const ModeRegistry modes = ModeRegistry::of_spatial({mode_a, mode_b});
  if (pair.registry() != modes) throw ModeError("procrustean: ensemble must live on the pair's modes");
  MixedEnsemble e = pair.normalized().consolidated();
  if (e.size() != 1) {
    throw std::invalid_argument("procrustean method needs a known pure pair state");
  }
  const PureState& s = e.components()[0].state;
  const Complex alpha = s.amplitude({{mode_h(mode_a), 1}, {mode_h(mode_b), 1}});
  const Complex beta = s.amplitude({{mode_v(mode_a), 1}, {mode_v(mode_b), 1}});
  if (std::abs(std::norm(alpha) + std::norm(beta) - s.norm2()) > 1e-12) {
    throw std::invalid_argument("procrustean: state is not of the form a|HH> + b|VV>");
  }
  ProcrusteanResult r;
  r.attenuation = std::abs(alpha) >= std::abs(beta) ? Compensation{mode_h(mode_a), beta / alpha}
                                                    : Compensation{mode_v(mode_a), alpha / beta};
  const ModeId anc = ancilla_of(r.attenuation.mode);
  PureState out = apply(r.attenuation.transform(), s.normalized().with_modes(ModeRegistry{anc}));
  MixedEnsemble traced = trace_out(MixedEnsemble::pure(out), ModeRegistry{anc});
  MixedEnsemble kept(modes);
  for (const auto& c : traced.components()) {
    kept.add_unnormalized(c.weight, c.state.photon_sector(modes.modes(), 2));
  }
  r.success_probability = kept.trace();
  if (r.success_probability > kZeroProbability) {
    r.fidelity = fidelity_to_bell(kept.normalized(), Bell::PhiPlus, mode_a, mode_b);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Fiber scenario

std::string to_string(FiberCase c) {
  switch (c) {
    case FiberCase::A: return "a";
    case FiberCase::B: return "b";
    case FiberCase::C: return "c";
    case FiberCase::D: return "d";
  }
  return "?";
}

FiberCase fiber_case_from_string(const std::string& s) {
  if (s == "a") return FiberCase::A;
  if (s == "b") return FiberCase::B;
  if (s == "c") return FiberCase::C;
  if (s == "d") return FiberCase::D;
  throw std::invalid_argument("unknown fiber case '" + s + "' (a, b, c or d)");
}

std::string to_string(SwapStrategy s) {
  switch (s) {
    case SwapStrategy::Auto: return "auto";
    case SwapStrategy::None: return "none";
    case SwapStrategy::Swap1V3H: return "swap_1V_3H";
    case SwapStrategy::Swap1V3V: return "swap_1V_3V";
  }
  return "?";
}

SwapStrategy swap_strategy_from_string(const std::string& s) {
  for (auto v : {SwapStrategy::Auto, SwapStrategy::None, SwapStrategy::Swap1V3H, SwapStrategy::Swap1V3V}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown swap strategy '" + s + "'");
}

std::string to_string(PhaseModel m) {
  return m == PhaseModel::Idealized ? "idealized" : "ornstein_uhlenbeck";
}

PhaseModel phase_model_from_string(const std::string& s) {
  if (s == "idealized") return PhaseModel::Idealized;
  if (s == "ornstein_uhlenbeck") return PhaseModel::OrnsteinUhlenbeck;
  throw std::invalid_argument("unknown phase model '" + s + "'");
}

FiberCase classify_fiber_case(double tau_plus, double tau_minus, double dt) {
  if (!(tau_plus > 0.0 && tau_minus > 0.0 && dt > 0.0)) {
    throw std::invalid_argument("correlation times and delay must be positive");
  }
  const bool plus_fixed = dt < tau_plus;
  const bool minus_fixed = dt < tau_minus;
  if (plus_fixed && minus_fixed) return FiberCase::A;
  if (minus_fixed) return FiberCase::B;
  if (plus_fixed) return FiberCase::C;
  return FiberCase::D;
}

ChannelSample fiber_sample(double pp_t, double pm_t, double pp_dt, double pm_dt, SwapStrategy strategy) {
  const double h_t = pp_t + pm_t, v_t = pp_t - pm_t;
  const double h_dt = pp_dt + pm_dt, v_dt = pp_dt - pm_dt;
  // Slots: (1H, 1V) travel at t, (3H, 3V) at t + Δt.
  double p1h = h_t, p1v = v_t, p3h = h_dt, p3v = v_dt;
  switch (strategy) {
    case SwapStrategy::Swap1V3H:
      p1v = h_dt;
      p3h = v_t;
      break;
    case SwapStrategy::Swap1V3V:
      p1v = v_dt;
      p3v = v_t;
      break;
    case SwapStrategy::None:
      break;
    case SwapStrategy::Auto:
      throw std::invalid_argument("fiber_sample needs a concrete swap strategy");
  }
  ChannelSample s;
  s.set_mu(1, Pol::H, std::polar(1.0, p1h));
  s.set_mu(1, Pol::V, std::polar(1.0, p1v));
  s.set_mu(3, Pol::H, std::polar(1.0, p3h));
  s.set_mu(3, Pol::V, std::polar(1.0, p3v));
  return s;
}

nlohmann::ordered_json FiberReport::to_json() const {
  return {{"case", to_string(fiber_case)},
          {"strategy", to_string(strategy)},
          {"purification_used", purification_used},
          {"direct_fidelity", direct_fidelity},
          {"purified_fidelity", purified_fidelity},
          {"fidelity", fidelity},
          {"success", success},
          {"samples", samples}};
}

FiberReport fiber_scenario(const FiberOptions& opts, std::mt19937_64& rng) {
  if (opts.samples == 0) throw std::invalid_argument("need at least one sample");
  const FiberCase fcase = opts.model == PhaseModel::Idealized
                              ? opts.fiber_case
                              : classify_fiber_case(opts.tau_plus, opts.tau_minus, opts.dt);

  struct Draw {
    double pp_t, pm_t, pp_dt, pm_dt;
  };
  std::vector<Draw> draws(opts.samples);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  std::normal_distribution<double> gauss(0.0, opts.phase_sigma);
  for (auto& d : draws) {
    if (opts.model == PhaseModel::Idealized) {
      d.pp_t = uni(rng);
      d.pm_t = uni(rng);
      const bool plus_fixed = fcase == FiberCase::A || fcase == FiberCase::C;
      const bool minus_fixed = fcase == FiberCase::A || fcase == FiberCase::B;
      d.pp_dt = plus_fixed ? d.pp_t : uni(rng);
      d.pm_dt = minus_fixed ? d.pm_t : uni(rng);
    } else {
      const double rp = std::exp(-opts.dt / opts.tau_plus);
      const double rm = std::exp(-opts.dt / opts.tau_minus);
      d.pp_t = gauss(rng);
      d.pm_t = gauss(rng);
      d.pp_dt = rp * d.pp_t + std::sqrt(1.0 - rp * rp) * gauss(rng);
      d.pm_dt = rm * d.pm_t + std::sqrt(1.0 - rm * rm) * gauss(rng);
    }
  }

  struct Outcome {
    double direct = 0.0;
    double purified = 0.0;
  };
  auto evaluate = [&](SwapStrategy strategy) {
    Outcome o;
    std::vector<PairDraw> mixture;
    mixture.reserve(draws.size());
    for (const auto& d : draws) {
      auto pc = pair_coefficients(fiber_sample(d.pp_t, d.pm_t, d.pp_dt, d.pm_dt, strategy));
      o.direct += (pair_fidelity(pc->pair12) + pair_fidelity(pc->pair34)) / 2.0;
      mixture.push_back({1.0, pc->pair12, pc->pair34});
    }
    o.direct /= static_cast<double>(draws.size());
    o.purified = run_mixture(mixture, perfect_detection()).fidelity;
    return o;
  };

  FiberReport r;
  r.fiber_case = fcase;
  r.samples = opts.samples;
  auto take = [&](SwapStrategy s, const Outcome& o, bool purify) {
    r.strategy = s;
    r.direct_fidelity = o.direct;
    r.purified_fidelity = o.purified;
    r.purification_used = purify;
    r.fidelity = purify ? o.purified : o.direct;
  };

  if (opts.strategy != SwapStrategy::Auto) {
    Outcome o = evaluate(opts.strategy);
    take(opts.strategy, o, o.purified > o.direct);
  } else if (fcase == FiberCase::A) {
    take(SwapStrategy::Swap1V3H, evaluate(SwapStrategy::Swap1V3H), false);
  } else if (fcase == FiberCase::B) {
    take(SwapStrategy::None, evaluate(SwapStrategy::None), true);
  } else if (fcase == FiberCase::C) {
    take(SwapStrategy::Swap1V3V, evaluate(SwapStrategy::Swap1V3V), true);
  } else {
    bool first = true;
    for (auto s : {SwapStrategy::None, SwapStrategy::Swap1V3H, SwapStrategy::Swap1V3V}) {
      Outcome o = evaluate(s);
      const bool purify = o.purified > o.direct;
      const double best = std::max(o.purified, o.direct);
      if (first || best > r.fidelity) take(s, o, purify);
      first = false;
    }
  }
  r.success = r.fidelity >= 1.0 - opts.tolerance;
  return r;
}

}  // namespace polpur
