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

#include "polpur/detection.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace polpur {

namespace {

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("efficiency outside [0,1]");
}

void check_nu(double nu) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::invalid_argument("dark count mean must be >= 0");
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

ModeRegistry measured_modes(const MixedEnsemble& e, std::span<const DetectorAssignment> detectors) {
  std::vector<ModeId> all;
  for (const auto& d : detectors) all.insert(all.end(), d.modes.begin(), d.modes.end());
  ModeRegistry reg(all);  // throws on duplicates
  if (!e.registry().includes(reg)) throw ModeError("measured mode not in ensemble registry");
  return reg;
}

double factor_for(const OccupationVector& occ, std::span<const DetectorAssignment> detectors) {
  double f = 1.0;
  for (const auto& d : detectors) f *= d.element(occ.total_on(d.modes));
  return f;
}

}  // namespace

std::string to_string(DetectorKind k) {
  return k == DetectorKind::Conventional ? "conventional" : "single_photon";
}

DetectorKind detector_kind_from_string(const std::string& s) {
  if (s == "conventional") return DetectorKind::Conventional;
  if (s == "single_photon") return DetectorKind::SinglePhoton;
  throw std::invalid_argument("unknown detector kind '" + s + "'");
}

void DetectorModel::validate() const {
  check_eta(efficiency);
  check_nu(dark_mean);
}

PovmElement::PovmElement(std::vector<double> diag) : diag_(std::move(diag)) {
  for (double d : diag_) {
    if (!(d >= 0.0 && d <= 1.0 + 1e-15)) throw std::invalid_argument("POVM diagonal outside [0,1]");
  }
}

PovmElement PovmElement::identity(int m_max) {
  return PovmElement(std::vector<double>(static_cast<std::size_t>(m_max) + 1, 1.0));
}

double PovmElement::operator()(int m) const {
  if (m < 0 || m > max_photons()) {
    throw std::out_of_range("photon number " + std::to_string(m) + " beyond POVM table");
  }
  return diag_[static_cast<std::size_t>(m)];
}

PovmElement PovmElement::operator+(const PovmElement& o) const {
  if (o.diag_.size() != diag_.size()) throw std::invalid_argument("POVM tables differ in size");
  std::vector<double> d(diag_.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = diag_[i] + o.diag_[i];
  return PovmElement(std::move(d));
}

PovmElement povm_n(double eta, int n, int m_max) {
  check_eta(eta);
  if (n < 0) throw std::invalid_argument("negative photocount");
  std::vector<double> d(static_cast<std::size_t>(m_max) + 1, 0.0);
  for (int m = n; m <= m_max; ++m) {
    d[static_cast<std::size_t>(m)] = binomial(m, n) * std::pow(eta, n) * std::pow(1.0 - eta, m - n);
  }
  return PovmElement(std::move(d));
}

PovmElement povm_conventional(double eta, bool clicked, int m_max) {
  check_eta(eta);
  std::vector<double> d(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) {
    double none = std::pow(1.0 - eta, m);
    d[static_cast<std::size_t>(m)] = clicked ? 1.0 - none : none;
  }
  return PovmElement(std::move(d));
}

PovmElement povm_single(double eta, SingleOutcome outcome, int m_max) {
  check_eta(eta);
  std::vector<double> d(static_cast<std::size_t>(m_max) + 1, 0.0);
  for (int m = 0; m <= m_max; ++m) {
    double v = 0.0;
    switch (outcome) {
      case SingleOutcome::None:
        v = std::pow(1.0 - eta, m);
        break;
      case SingleOutcome::One:
        v = m >= 1 ? m * eta * std::pow(1.0 - eta, m - 1) : 0.0;
        break;
      case SingleOutcome::Multi:
        v = m >= 2 ? 1.0 - (1.0 - eta + m * eta) * std::pow(1.0 - eta, m - 1) : 0.0;
        break;
    }
    d[static_cast<std::size_t>(m)] = v;
  }
  return PovmElement(std::move(d));
}

double photocount_probability(int k, int m, double eta, double nu) {
  if (k < 0 || m < 0) return 0.0;
  double p = 0.0;
  double pois = std::exp(-nu);  // Poisson(d; ν), starting at d = 0
  for (int d = 0; d <= k; ++d) {
    int real = k - d;
    if (real <= m) p += pois * binomial(m, real) * std::pow(eta, real) * std::pow(1.0 - eta, m - real);
    pois *= nu / (d + 1);
  }
  return p;
}

// ---------------------------------------------------------------------------
// OutcomeSet

OutcomeSet::OutcomeSet(double eta, double nu, int m_max,
                       std::vector<std::tuple<std::string, int, int>> bins)
    : eta_(eta), nu_(nu), m_max_(m_max) {
  check_eta(eta);
  check_nu(nu);
  if (bins.empty() || std::get<2>(bins.back()) != -1) {
    throw std::invalid_argument("outcome bins must end with an open bin");
  }
  const auto rows = static_cast<std::size_t>(m_max) + 1;
  std::vector<double> rest(rows, 0.0);
  for (std::size_t b = 0; b + 1 < bins.size(); ++b) {
    const auto& [label, lo, hi] = bins[b];
    std::vector<double> d(rows, 0.0);
    for (int m = 0; m <= m_max; ++m) {
      double v = 0.0;
      for (int k = lo; k <= hi; ++k) v += photocount_probability(k, m, eta, nu);
      d[static_cast<std::size_t>(m)] = v;
      rest[static_cast<std::size_t>(m)] += v;
    }
    outcomes_.push_back({label, lo, hi, PovmElement(std::move(d))});
  }
  std::vector<double> last(rows);
  for (std::size_t m = 0; m < rows; ++m) last[m] = std::max(0.0, 1.0 - rest[m]);
  const auto& [label, lo, hi] = bins.back();
  outcomes_.push_back({label, lo, hi, PovmElement(std::move(last))});
}

OutcomeSet OutcomeSet::conventional(double eta, double nu, int m_max) {
  return OutcomeSet(eta, nu, m_max, {{kNoClick, 0, 0}, {kClick, 1, -1}});
}

OutcomeSet OutcomeSet::single_photon(double eta, double nu, int m_max) {
  return OutcomeSet(eta, nu, m_max, {{kNoClick, 0, 0}, {kOneCount, 1, 1}, {kMultiCount, 2, -1}});
}

OutcomeSet OutcomeSet::for_model(const DetectorModel& model, int m_max) {
  model.validate();
  return model.kind == DetectorKind::Conventional
             ? conventional(model.efficiency, model.dark_mean, m_max)
             : single_photon(model.efficiency, model.dark_mean, m_max);
}

const PovmElement& OutcomeSet::element(const std::string& label) const {
  for (const auto& o : outcomes_) {
    if (o.label == label) return o.element;
  }
  throw std::invalid_argument("no outcome labelled '" + label + "'");
}

std::size_t OutcomeSet::bin_of(int count) const {
  for (std::size_t i = 0; i < outcomes_.size(); ++i) {
    const auto& o = outcomes_[i];
    if (count >= o.lo && (o.hi < 0 || count <= o.hi)) return i;
  }
  throw std::out_of_range("photocount outside every outcome bin");
}

OutcomeSet with_dark_counts(const OutcomeSet& base, double nu) {
  check_nu(nu);
  std::vector<std::tuple<std::string, int, int>> bins;
  for (const auto& o : base.outcomes_) bins.emplace_back(o.label, o.lo, o.hi);
  // Independent Poisson sources add their means.
  return OutcomeSet(base.eta_, base.nu_ + nu, base.m_max_, std::move(bins));
}

PovmElement fired_element(const DetectorModel& model, int m_max) {
  auto set = OutcomeSet::for_model(model, m_max);
  return set.element(model.kind == DetectorKind::Conventional ? kClick : kOneCount);
}

PovmElement silent_element(const DetectorModel& model, int m_max) {
  return OutcomeSet::for_model(model, m_max).element(kNoClick);
}

// ---------------------------------------------------------------------------
// Measurement

double outcome_probability(const MixedEnsemble& e, std::span<const DetectorAssignment> detectors) {
  measured_modes(e, detectors);
  double p = 0.0;
  for (const auto& c : e.components()) {
    double pc = 0.0;
    for (const auto& [occ, a] : c.state.terms()) pc += std::norm(a) * factor_for(occ, detectors);
    p += c.weight * pc;
  }
  return p;
}

MeasurementResult measure(const MixedEnsemble& e, std::span<const DetectorAssignment> detectors) {
  ModeRegistry measured = measured_modes(e, detectors);
  ModeRegistry kept = e.registry().without(measured);
  MixedEnsemble cond(kept);
  double p = 0.0;
  for (const auto& c : e.components()) {
    std::map<OccupationVector, PureState> groups;
    for (const auto& [occ, a] : c.state.terms()) {
      auto [it, _] = groups.try_emplace(occ.restricted(measured), kept);
      it->second.add(occ.without(measured), a);
    }
    for (const auto& [key, s] : groups) {
      double f = factor_for(key, detectors);
      if (f == 0.0) continue;
      double w = c.weight * f;
      p += w * s.norm2();
      cond.add_unnormalized(w, s);
    }
  }
  MeasurementResult r;
  r.probability = p;
  if (p > kZeroProbability) r.conditional = cond.scaled(1.0 / p);
  return r;
}

MeasurementResult measure(const MixedEnsemble& e, const std::map<ModeId, PovmElement>& assignment) {
  std::vector<DetectorAssignment> d;
  for (const auto& [m, el] : assignment) d.push_back({{m}, el});
  return measure(e, d);
}

MeasurementResult filter(const MixedEnsemble& e, std::span<const DetectorAssignment> detectors) {
  measured_modes(e, detectors);
  MixedEnsemble out(e.registry());
  double p = 0.0;
  for (const auto& c : e.components()) {
    PureState s(e.registry());
    for (const auto& [occ, a] : c.state.terms()) {
      double f = factor_for(occ, detectors);
      if (f > 0.0) s.add(occ, a * std::sqrt(f));
    }
    p += c.weight * s.norm2();
    out.add_unnormalized(c.weight, s);
  }
  MeasurementResult r;
  r.probability = p;
  if (p > kZeroProbability) r.conditional = out.scaled(1.0 / p);
  return r;
}

int sample_photocount(int m, double eta, double nu, std::mt19937_64& rng) {
  check_eta(eta);
  check_nu(nu);
  std::binomial_distribution<int> real(m, eta);
  int k = real(rng);
  if (nu > 0.0) k += std::poisson_distribution<int>(nu)(rng);
  return k;
}

}  // namespace polpur
