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

#include "polpur/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>

namespace polpur {

namespace {

Pol other(Pol p) { return p == Pol::H ? Pol::V : Pol::H; }

char pol_char(Pol p) { return p == Pol::H ? 'H' : 'V'; }

std::string detector_name(int spatial, Pol p) {
  return std::to_string(spatial) + "'" + pol_char(p);
}

std::vector<ModeId> detector_modes(const std::string& name) {
  if (name == "5'H") return {mode_h(kAliceDetect)};
  if (name == "5'V") return {mode_v(kAliceDetect)};
  if (name == "4'H") return {mode_h(kBobPairB)};
  if (name == "4'V") return {mode_v(kBobPairB)};
  if (name == "6") return {mode_h(kAliceKeep), mode_v(kAliceKeep)};
  if (name == "2") return {mode_h(kBobPairA), mode_v(kBobPairA)};
  throw std::invalid_argument("unknown detector '" + name + "'");
}

const DetectorModel& model_of(const RunConfig& c, const std::string& name) {
  auto it = c.detectors.find(name);
  if (it == c.detectors.end()) throw std::invalid_argument("no model for detector '" + name + "'");
  return it->second;
}

std::vector<ModeId> output_pair_modes() {
  return {mode_h(kBobPairA), mode_v(kBobPairA), mode_h(kAliceKeep), mode_v(kAliceKeep)};
}

double uniform_phase(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
}

struct Herald {
  double probability = 0.0;
  std::optional<MixedEnsemble> state;  // on modes 2 and 6, before correction
};

Herald herald(const MixedEnsemble& after_circuit, const RunConfig& config, Coincidence c) {
  std::vector<DetectorAssignment> dets;
  auto fire = [&](const std::string& name) {
    dets.push_back({detector_modes(name), fired_element(model_of(config, name))});
  };
  auto veto = [&](const std::string& name) {
    dets.push_back({detector_modes(name), silent_element(model_of(config, name))});
  };
  fire(detector_name(kAliceDetect, c.alice));
  fire(detector_name(kBobPairB, c.bob));
  if (config.veto) {
    veto(detector_name(kAliceDetect, other(c.alice)));
    veto(detector_name(kBobPairB, other(c.bob)));
  }
  MeasurementResult r = measure(after_circuit, dets);
  Herald h{r.probability, std::nullopt};
  if (!r.conditional) return h;
  MixedEnsemble cond = std::move(*r.conditional);
  // Unwatched complementary modes are traced out.
  ModeRegistry leftover = cond.registry().without(ModeRegistry(output_pair_modes()));
  if (!leftover.empty()) cond = trace_out(cond, leftover);

  if (config.postselect) {
    std::vector<DetectorAssignment> keep{
        {detector_modes("6"), fired_element(model_of(config, "6"))},
        {detector_modes("2"), fired_element(model_of(config, "2"))}};
    MeasurementResult f = filter(cond, keep);
    h.probability *= f.probability;
    if (!f.conditional) return h;
    cond = std::move(*f.conditional);
  }
  h.state = std::move(cond);
  return h;
}

}  // namespace

std::string Coincidence::label() const {
  return detector_name(kAliceDetect, alice) + "," + detector_name(kBobPairB, bob);
}

Coincidence Coincidence::parse(const std::string& s) {
  for (const auto& c : kAllCoincidences) {
    if (c.label() == s) return c;
  }
  throw std::invalid_argument("unknown coincidence '" + s + "' (expected e.g. 5'H,4'H)");
}

OpticsGauge OpticsGauge::random(std::mt19937_64& rng) {
  OpticsGauge g;
  g.r90_h = std::polar(1.0, uniform_phase(rng));
  g.r90_v = std::polar(1.0, uniform_phase(rng));
  for (auto& p : g.pbs) p = std::polar(1.0, uniform_phase(rng));
  return g;
}

LinearTransform purification_circuit(const OpticsGauge& gauge) {
  LinearTransform r90 = half_wave_plate(mode_h(kAlicePairB), mode_v(kAlicePairB), WavePlate::Deg90)
                            .with_output_factors({{mode_h(kAlicePairB), gauge.r90_h},
                                                  {mode_v(kAlicePairB), gauge.r90_v}});
  LinearTransform split = pbs(kAlicePairA, kAlicePairB, kAliceKeep, kAliceDetect, gauge.pbs);
  LinearTransform r45_a = half_wave_plate(mode_h(kAliceDetect), mode_v(kAliceDetect), WavePlate::Deg45);
  LinearTransform r45_b = half_wave_plate(mode_h(kBobPairB), mode_v(kBobPairB), WavePlate::Deg45);
  return compose(r45_b, compose(r45_a, compose(split, r90)));
}

std::map<Coincidence, double> calibrate_corrections(const OpticsGauge& gauge) {
  RunConfig probe = RunConfig::uniform(IdealSource{PairSpec::from_weight(0.5)},
                                       DetectorModel{DetectorKind::SinglePhoton, 1.0, 0.0});
  probe.gauge = gauge;
  MixedEnsemble out = apply(purification_circuit(gauge), prepare_source(probe));
  const OccupationVector hh{{mode_h(kAliceKeep), 1}, {mode_h(kBobPairA), 1}};
  const OccupationVector vv{{mode_v(kAliceKeep), 1}, {mode_v(kBobPairA), 1}};
  std::map<Coincidence, double> theta;
  for (const auto& c : kAllCoincidences) {
    Herald h = herald(out, probe, c);
    if (!h.state || h.state->size() != 1) throw std::logic_error("calibration: no pure herald");
    const PureState& s = h.state->components()[0].state;
    theta[c] = std::arg(s.amplitude(hh)) - std::arg(s.amplitude(vv));
  }
  return theta;
}

RunConfig RunConfig::uniform(Source source, DetectorModel model) {
  RunConfig c;
  c.source = std::move(source);
  for (const auto& name : kDetectorNames) c.detectors[name] = model;
  return c;
}

void RunConfig::validate() const {
  if (n_max < 0 || n_max > kMaxPhotons) {
    throw std::invalid_argument("n_max must lie in [0, " + std::to_string(kMaxPhotons) + "]");
  }
  if (coincidences.empty()) throw std::invalid_argument("no coincidences selected");
  std::set<Coincidence> seen(coincidences.begin(), coincidences.end());
  if (seen.size() != coincidences.size()) throw std::invalid_argument("duplicate coincidence");
  for (const auto& [name, model] : detectors) {
    detector_modes(name);
    model.validate();
  }
  for (const auto& c : coincidences) {
    model_of(*this, detector_name(kAliceDetect, c.alice));
    model_of(*this, detector_name(kBobPairB, c.bob));
    if (veto) {
      model_of(*this, detector_name(kAliceDetect, other(c.alice)));
      model_of(*this, detector_name(kBobPairB, other(c.bob)));
    }
  }
  if (postselect) {
    model_of(*this, "6");
    model_of(*this, "2");
  }
  if (const auto* e = std::get_if<EnsembleSource>(&source)) {
    if (e->state.registry() != ModeRegistry::of_spatial({1, 2, 3, 4})) {
      throw ModeError("ensemble source must live on spatial modes 1-4");
    }
  }
}

MixedEnsemble prepare_source(const RunConfig& config) {
  return std::visit(
      [&](const auto& src) -> MixedEnsemble {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, IdealSource>) {
          return MixedEnsemble::pure(ideal_two_pairs(src.pair));
        } else if constexpr (std::is_same_v<T, PdcSource>) {
          return src.phase_averaged ? phase_averaged_pdc(src.spec, config.n_max)
                                    : fixed_phase_pdc(src.spec, config.n_max);
        } else {
          return src.state;
        }
      },
      config.source);
}

RunStatistics run(const RunConfig& config) {
  config.validate();
  const auto theta = calibrate_corrections(config.gauge);
  MixedEnsemble after = apply(purification_circuit(config.gauge), prepare_source(config));
  const auto pair_modes = output_pair_modes();
  const PureState target = bell_state(Bell::PhiPlus, kAliceKeep, kBobPairA);

  RunStatistics st;
  st.dropped_weight = after.dropped_weight();
  MixedEnsemble output{ModeRegistry(pair_modes)};
  double fid_sum = 0.0;
  bool first = true;
  for (const auto& c : config.coincidences) {
    Herald h = herald(after, config, c);
    CoincidenceStats cs{c, h.probability, 0.0};
    double w0 = 0.0, w1 = 0.0;
    if (h.state) {
      MixedEnsemble corrected = apply(phase_shift(mode_v(kBobPairA), theta.at(c)), *h.state);
      cs.fidelity = corrected.expectation(target);
      w0 = corrected.photon_number_weight(pair_modes, 0);
      w1 = corrected.photon_number_weight(pair_modes, 1);
      output.add(h.probability, corrected);
    }
    if (first) {
      st.p = cs.probability;
      st.p_s = cs.probability * cs.fidelity;
      st.p_e = st.p - st.p_s;
      st.p_e0 = cs.probability * w0;
      st.p_e1 = cs.probability * w1;
      st.p_e_rest = st.p_e - st.p_e0 - st.p_e1;
      first = false;
    }
    st.p_total += cs.probability;
    fid_sum += cs.probability * cs.fidelity;
    st.per_coincidence.push_back(cs);
  }
  if (st.p_total > kZeroProbability) {
    st.fidelity = fid_sum / st.p_total;
    st.output = output.scaled(1.0 / st.p_total);
  } else {
    st.output = output;
  }
  return st;
}

RunStatistics postselect(RunConfig config) {
  config.postselect = true;
  return run(config);
}

RunStatistics run_mixture(std::span<const PairDraw> draws, RunConfig config) {
  if (draws.empty()) throw std::invalid_argument("empty mixture");
  MixedEnsemble e(ModeRegistry::of_spatial({1, 2, 3, 4}));
  bool nonidentical = false;
  double total = 0.0;
  for (const auto& d : draws) {
    if (!(d.weight >= 0.0)) throw std::invalid_argument("negative mixture weight");
    e.add(d.weight, tensor(ideal_pair(d.pair12, 1, 2), ideal_pair(d.pair34, 3, 4)));
    total += d.weight;
    if (std::abs(d.pair12.alpha - d.pair34.alpha) > 1e-12 ||
        std::abs(d.pair12.beta - d.pair34.beta) > 1e-12) {
      nonidentical = true;
    }
  }
  if (!(total > 0.0)) throw std::invalid_argument("mixture weights sum to zero");
  config.source = EnsembleSource{e.scaled(1.0 / total)};
  RunStatistics st = run(config);
  st.nonidentical_pairs = nonidentical;
  return st;
}

ShotCounts sample_shots(const RunStatistics& stats, std::size_t shots, std::mt19937_64& rng) {
  const std::array<double, 5> p{stats.p_s, stats.p_e0, stats.p_e1, std::max(0.0, stats.p_e_rest),
                                std::max(0.0, 1.0 - stats.p)};
  ShotCounts out;
  out.shots = shots;
  // Multinomial draw as a chain of conditional binomials.
  double left_p = 0.0;
  for (double x : p) left_p += x;
  std::size_t left_n = shots;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i + 1 == p.size() || left_p <= 0.0) {
      out.counts[i] = left_n;
      break;
    }
    double q = std::clamp(p[i] / left_p, 0.0, 1.0);
    std::binomial_distribution<std::size_t> draw(left_n, q);
    out.counts[i] = draw(rng);
    left_n -= out.counts[i];
    left_p -= p[i];
  }
  return out;
}

nlohmann::ordered_json RunStatistics::to_json(bool with_state) const {
  nlohmann::ordered_json j;
  j["p"] = p;
  j["p_total"] = p_total;
  j["p_s"] = p_s;
  j["p_e"] = p_e;
  j["p_e0"] = p_e0;
  j["p_e1"] = p_e1;
  j["p_e_rest"] = p_e_rest;
  j["fidelity"] = fidelity;
  j["dropped_weight"] = dropped_weight;
  j["nonidentical_pairs"] = nonidentical_pairs;
  auto& per = j["coincidences"] = nlohmann::ordered_json::array();
  for (const auto& c : per_coincidence) {
    per.push_back({{"coincidence", c.which.label()}, {"probability", c.probability},
                   {"fidelity", c.fidelity}});
  }
  if (with_state) j["output"] = output.to_json();
  return j;
}

// ---------------------------------------------------------------------------
// Dark counts

namespace {

struct CountSplit {
  double real = 0.0;       // counts present and at least one is real
  double dark_only = 0.0;  // counts present, all dark
};

CountSplit split_counts(DetectorKind kind, int m, double eta, double nu) {
  const double miss = std::pow(1.0 - eta, m);
  if (kind == DetectorKind::Conventional) {
    return {1.0 - miss, miss * -std::expm1(-nu)};
  }
  const double one_real = m >= 1 ? m * eta * std::pow(1.0 - eta, m - 1) : 0.0;
  return {one_real * std::exp(-nu), miss * nu * std::exp(-nu)};
}

std::array<double, 5> dark_contributions(double gamma_sq, double nu, const DarkBudgetOptions& o) {
  const PdcSpec spec = PdcSpec::from_pair(std::sqrt(gamma_sq), PairSpec::from_weight(o.alpha_sq));
  MixedEnsemble after = apply(purification_circuit(), phase_averaged_pdc(spec, o.n_max));
  const std::array<std::vector<ModeId>, 4> dets{detector_modes("5'H"), detector_modes("4'H"),
                                                detector_modes("6"), detector_modes("2")};
  std::array<double, 5> p{};
  for (const auto& c : after.components()) {
    for (const auto& [occ, a] : c.state.terms()) {
      std::array<CountSplit, 4> s;
      for (std::size_t d = 0; d < 4; ++d) {
        s[d] = split_counts(o.kind, occ.total_on(dets[d]), o.efficiency, nu);
      }
      const double w = c.weight * std::norm(a);
      for (unsigned mask = 0; mask < 16; ++mask) {
        double f = w;
        for (std::size_t d = 0; d < 4; ++d) f *= (mask >> d) & 1U ? s[d].dark_only : s[d].real;
        p[static_cast<std::size_t>(std::popcount(mask))] += f;
      }
    }
  }
  return p;
}

std::vector<double> log_grid(double hi, int points) {
  std::vector<double> x;
  for (int i = 0; i < points; ++i) x.push_back(hi * std::pow(10.0, -1.0 + double(i) / (points - 1)));
  return x;
}

}  // namespace

nlohmann::ordered_json DarkCountBudget::to_json() const {
  nlohmann::ordered_json j;
  j["gamma_sq"] = gamma_sq;
  j["nu"] = nu;
  j["contributions"] = contributions;
  j["worst_ratio"] = worst_ratio;
  j["negligible"] = negligible;
  return j;
}

DarkCountBudget dark_count_budget(double gamma_sq, double nu, const DarkBudgetOptions& opts) {
  if (!(gamma_sq > 0.0 && gamma_sq < 1.0)) throw std::invalid_argument("gamma_sq must lie in (0,1)");
  if (!(nu >= 0.0)) throw std::invalid_argument("dark count mean must be >= 0");
  if (!(opts.margin > 0.0)) throw std::invalid_argument("margin must be positive");
  DarkCountBudget b;
  b.gamma_sq = gamma_sq;
  b.nu = nu;
  b.contributions = dark_contributions(gamma_sq, nu, opts);
  for (std::size_t i = 1; i < 5; ++i) {
    if (b.contributions[0] > 0.0) {
      b.worst_ratio = std::max(b.worst_ratio, b.contributions[i] / b.contributions[0]);
    }
  }
  b.negligible = nu * opts.margin <= 1.0 && (nu * nu / gamma_sq) * opts.margin <= 1.0;
  return b;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("log-log fit needs positive data");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

DarkOrderFit fit_dark_count_orders(double gamma_sq, double nu, const DarkBudgetOptions& opts,
                                   int points) {
  if (points < 2) throw std::invalid_argument("need at least two fit points");
  if (!(nu > 0.0)) throw std::invalid_argument("fit needs nu > 0");
  DarkOrderFit fit;
  const auto gammas = log_grid(std::sqrt(gamma_sq), points);
  const auto nus = log_grid(nu, points);
  std::array<std::vector<double>, 5> by_gamma, by_nu;
  for (double g : gammas) {
    auto p = dark_contributions(g * g, nu, opts);
    for (std::size_t i = 0; i < 5; ++i) by_gamma[i].push_back(p[i]);
  }
  for (double v : nus) {
    auto p = dark_contributions(gamma_sq, v, opts);
    for (std::size_t i = 0; i < 5; ++i) by_nu[i].push_back(p[i]);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    fit.gamma_exponent[i] = log_log_slope(gammas, by_gamma[i]);
    fit.nu_exponent[i] = log_log_slope(nus, by_nu[i]);
  }
  return fit;
}

}  // namespace polpur
