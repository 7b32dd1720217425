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

#include "polpur/fockspace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace polpur {

std::string ModeId::label() const {
  return std::to_string(spatial) + (pol == Pol::H ? "H" : "V");
}

ModeId ModeId::parse(std::string_view label) {
  if (label.size() < 2) throw ModeError("bad mode label '" + std::string(label) + "'");
  char p = label.back();
  if (p != 'H' && p != 'V') throw ModeError("bad mode label '" + std::string(label) + "'");
  int spatial = 0;
  auto digits = label.substr(0, label.size() - 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), spatial);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw ModeError("bad mode label '" + std::string(label) + "'");
  }
  return {spatial, p == 'H' ? Pol::H : Pol::V};
}

// ---------------------------------------------------------------------------
// ModeRegistry

ModeRegistry::ModeRegistry(std::initializer_list<ModeId> modes)
    : ModeRegistry(std::vector<ModeId>(modes)) {}

ModeRegistry::ModeRegistry(std::vector<ModeId> modes) : modes_(std::move(modes)) {
  std::sort(modes_.begin(), modes_.end());
  if (std::adjacent_find(modes_.begin(), modes_.end()) != modes_.end()) {
    throw ModeError("duplicate mode in registry");
  }
}

ModeRegistry ModeRegistry::of_spatial(std::initializer_list<int> spatial) {
  std::vector<ModeId> m;
  for (int k : spatial) {
    m.push_back(mode_h(k));
    m.push_back(mode_v(k));
  }
  return ModeRegistry(std::move(m));
}

bool ModeRegistry::contains(ModeId m) const {
  return std::binary_search(modes_.begin(), modes_.end(), m);
}

bool ModeRegistry::disjoint(const ModeRegistry& other) const {
  return std::none_of(other.modes_.begin(), other.modes_.end(),
                      [this](ModeId m) { return contains(m); });
}

bool ModeRegistry::includes(const ModeRegistry& other) const {
  return std::includes(modes_.begin(), modes_.end(), other.modes_.begin(), other.modes_.end());
}

ModeRegistry ModeRegistry::united(const ModeRegistry& other) const {
  std::vector<ModeId> out;
  std::set_union(modes_.begin(), modes_.end(), other.modes_.begin(), other.modes_.end(),
                 std::back_inserter(out));
  ModeRegistry r;
  r.modes_ = std::move(out);
  return r;
}

ModeRegistry ModeRegistry::without(const ModeRegistry& other) const {
  std::vector<ModeId> out;
  std::set_difference(modes_.begin(), modes_.end(), other.modes_.begin(), other.modes_.end(),
                      std::back_inserter(out));
  ModeRegistry r;
  r.modes_ = std::move(out);
  return r;
}

// ---------------------------------------------------------------------------
// OccupationVector

OccupationVector::OccupationVector(std::initializer_list<std::pair<ModeId, int>> counts) {
  for (const auto& [m, n] : counts) *this = added(m, n);
}

int OccupationVector::count(ModeId m) const {
  auto it = std::lower_bound(counts_.begin(), counts_.end(), m,
                             [](const auto& e, ModeId k) { return e.first < k; });
  return (it != counts_.end() && it->first == m) ? it->second : 0;
}

OccupationVector OccupationVector::with(ModeId m, int n) const {
  if (n < 0) throw std::invalid_argument("negative photon count");
  OccupationVector out = *this;
  auto it = std::lower_bound(out.counts_.begin(), out.counts_.end(), m,
                             [](const auto& e, ModeId k) { return e.first < k; });
  if (it != out.counts_.end() && it->first == m) {
    out.total_ -= it->second;
    if (n == 0) {
      out.counts_.erase(it);
    } else {
      it->second = n;
    }
  } else if (n > 0) {
    out.counts_.insert(it, {m, n});
  }
  out.total_ += n;
  return out;
}

OccupationVector OccupationVector::added(ModeId m, int n) const { return with(m, count(m) + n); }

OccupationVector OccupationVector::restricted(const ModeRegistry& keep) const {
  OccupationVector out;
  for (const auto& e : counts_) {
    if (keep.contains(e.first)) {
      out.counts_.push_back(e);
      out.total_ += e.second;
    }
  }
  return out;
}

OccupationVector OccupationVector::without(const ModeRegistry& drop) const {
  OccupationVector out;
  for (const auto& e : counts_) {
    if (!drop.contains(e.first)) {
      out.counts_.push_back(e);
      out.total_ += e.second;
    }
  }
  return out;
}

int OccupationVector::total_on(std::span<const ModeId> modes) const {
  int n = 0;
  for (ModeId m : modes) n += count(m);
  return n;
}

OccupationVector merge(const OccupationVector& a, const OccupationVector& b) {
  OccupationVector out;
  out.counts_.reserve(a.counts_.size() + b.counts_.size());
  std::merge(a.counts_.begin(), a.counts_.end(), b.counts_.begin(), b.counts_.end(),
             std::back_inserter(out.counts_),
             [](const auto& x, const auto& y) { return x.first < y.first; });
  if (std::adjacent_find(out.counts_.begin(), out.counts_.end(), [](const auto& x, const auto& y) {
        return x.first == y.first;
      }) != out.counts_.end()) {
    throw ModeError("merging occupations on overlapping modes");
  }
  out.total_ = a.total_ + b.total_;
  return out;
}

// ---------------------------------------------------------------------------
// PureState

PureState PureState::vacuum(ModeRegistry registry) {
  return basis(std::move(registry), OccupationVector{});
}

PureState PureState::basis(ModeRegistry registry, const OccupationVector& occ, Complex amp) {
  PureState s(std::move(registry));
  s.add(occ, amp);
  return s;
}

void PureState::add(const OccupationVector& occ, Complex amp) {
  for (const auto& [m, n] : occ.entries()) {
    if (!registry_.contains(m)) throw ModeError("mode " + m.label() + " not in registry");
  }
  auto [it, inserted] = terms_.try_emplace(occ, amp);
  if (!inserted) it->second += amp;
}

Complex PureState::amplitude(const OccupationVector& occ) const {
  auto it = terms_.find(occ);
  return it == terms_.end() ? Complex{} : it->second;
}

double PureState::norm2() const {
  double s = 0.0;
  for (const auto& [occ, a] : terms_) s += std::norm(a);
  return s;
}

double PureState::norm() const { return std::sqrt(norm2()); }

PureState PureState::normalized() const {
  double n = norm();
  if (n == 0.0) throw std::domain_error("cannot normalize a zero state");
  return scaled(1.0 / n);
}

PureState PureState::scaled(Complex factor) const {
  PureState out = *this;
  for (auto& [occ, a] : out.terms_) a *= factor;
  return out;
}

PureState& PureState::apply_options(const FockOptions& opts) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (opts.n_max >= 0 && it->first.total() > opts.n_max) {
      truncated_weight_ += std::norm(it->second);
      it = terms_.erase(it);
    } else if (std::abs(it->second) < opts.prune_tol || it->second == Complex{}) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

PureState PureState::with_modes(const ModeRegistry& extra) const {
  if (!registry_.disjoint(extra)) throw ModeError("added modes already registered");
  PureState out = *this;
  out.registry_ = registry_.united(extra);
  return out;
}

PureState PureState::photon_sector(std::span<const ModeId> modes, int n) const {
  PureState out(registry_);
  for (const auto& [occ, a] : terms_) {
    if (occ.total_on(modes) == n) out.terms_.emplace(occ, a);
  }
  return out;
}

nlohmann::ordered_json PureState::to_json() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [occ, a] : terms_) {
    nlohmann::ordered_json o;
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (const auto& [m, n] : occ.entries()) counts[m.label()] = n;
    o["occupation"] = counts;
    o["re"] = a.real();
    o["im"] = a.imag();
    arr.push_back(std::move(o));
  }
  return arr;
}

PureState PureState::from_json(const nlohmann::json& j, ModeRegistry registry) {
  PureState s(std::move(registry));
  for (const auto& t : j) {
    OccupationVector occ;
    for (const auto& [label, n] : t.at("occupation").items()) {
      occ = occ.added(ModeId::parse(label), n.get<int>());
    }
    s.add(occ, {t.at("re").get<double>(), t.at("im").get<double>()});
  }
  return s;
}

PureState operator+(const PureState& a, const PureState& b) {
  if (a.registry() != b.registry()) throw ModeError("adding states on different registries");
  PureState out = a;
  for (const auto& [occ, amp] : b.terms()) out.add(occ, amp);
  return out;
}

PureState tensor(const PureState& a, const PureState& b) {
  if (!a.registry().disjoint(b.registry())) throw ModeError("tensor of states sharing modes");
  PureState out(a.registry().united(b.registry()));
  for (const auto& [oa, xa] : a.terms()) {
    for (const auto& [ob, xb] : b.terms()) out.add(merge(oa, ob), xa * xb);
  }
  out.set_truncated_weight(a.truncated_weight() + b.truncated_weight());
  return out;
}

Complex overlap(const PureState& a, const PureState& b) {
  if (a.registry() != b.registry()) throw ModeError("overlap of states on different registries");
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  Complex s{};
  for (const auto& [occ, x] : small.terms()) {
    auto it = large.terms().find(occ);
    if (it == large.terms().end()) continue;
    s += (&small == &a) ? std::conj(x) * it->second : std::conj(it->second) * x;
  }
  return s;
}

// ---------------------------------------------------------------------------
// MixedEnsemble

MixedEnsemble MixedEnsemble::pure(const PureState& s) {
  MixedEnsemble e(s.registry());
  e.add(1.0, s);
  return e;
}

void MixedEnsemble::add(double w, const PureState& s) {
  if (s.registry() != registry_) throw ModeError("ensemble component on different registry");
  if (w < 0.0) throw std::invalid_argument("negative mixture weight");
  double n2 = s.norm2();
  if (w == 0.0 || n2 == 0.0) return;
  PureState unit = s.scaled(1.0 / std::sqrt(n2));
  unit.set_truncated_weight(0.0);
  components_.push_back({w, std::move(unit)});
}

void MixedEnsemble::add_unnormalized(double w, const PureState& s) {
  double n2 = s.norm2();
  if (n2 == 0.0) return;
  add(w * n2, s);
}

void MixedEnsemble::add(double w, const MixedEnsemble& e) {
  for (const auto& c : e.components()) add(w * c.weight, c.state);
}

double MixedEnsemble::trace() const {
  double t = 0.0;
  for (const auto& c : components_) t += c.weight;
  return t;
}

MixedEnsemble MixedEnsemble::normalized() const {
  double t = trace();
  if (t == 0.0) throw std::domain_error("cannot normalize an empty ensemble");
  return scaled(1.0 / t);
}

MixedEnsemble MixedEnsemble::scaled(double factor) const {
  MixedEnsemble out = *this;
  for (auto& c : out.components_) c.weight *= factor;
  return out;
}

MixedEnsemble MixedEnsemble::consolidated(double tol) const {
  MixedEnsemble out(registry_);
  out.dropped_weight_ = dropped_weight_;
  for (const auto& c : components_) {
    bool merged = false;
    for (auto& o : out.components_) {
      if (o.state.size() == c.state.size() &&
          std::abs(std::abs(overlap(o.state, c.state)) - 1.0) < tol) {
        o.weight += c.weight;
        merged = true;
        break;
      }
    }
    if (!merged) out.components_.push_back(c);
  }
  return out;
}

double MixedEnsemble::expectation(const PureState& phi) const {
  double s = 0.0;
  for (const auto& c : components_) s += c.weight * std::norm(overlap(phi, c.state));
  return s;
}

double MixedEnsemble::photon_number_weight(std::span<const ModeId> modes, int n) const {
  double s = 0.0;
  for (const auto& c : components_) s += c.weight * c.state.photon_sector(modes, n).norm2();
  return s;
}

nlohmann::ordered_json MixedEnsemble::to_json() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : components_) {
    nlohmann::ordered_json o;
    o["weight"] = c.weight;
    o["state"] = c.state.to_json();
    arr.push_back(std::move(o));
  }
  return arr;
}

MixedEnsemble trace_out(const MixedEnsemble& e, const ModeRegistry& modes) {
  if (!e.registry().includes(modes)) throw ModeError("tracing out an unregistered mode");
  ModeRegistry kept = e.registry().without(modes);
  MixedEnsemble out(kept);
  out.set_dropped_weight(e.dropped_weight());
  for (const auto& c : e.components()) {
    std::map<OccupationVector, PureState> groups;
    for (const auto& [occ, a] : c.state.terms()) {
      auto [it, _] = groups.try_emplace(occ.restricted(modes), kept);
      it->second.add(occ.without(modes), a);
    }
    for (const auto& [key, s] : groups) out.add_unnormalized(c.weight, s);
  }
  return out;
}

PureState bell_state(Bell which, int pair_a, int pair_b) {
  const double r = 1.0 / std::sqrt(2.0);
  PureState s(ModeRegistry::of_spatial({pair_a, pair_b}));
  s.add({{mode_h(pair_a), 1}, {mode_h(pair_b), 1}}, r);
  s.add({{mode_v(pair_a), 1}, {mode_v(pair_b), 1}}, which == Bell::PhiPlus ? r : -r);
  return s;
}

double fidelity_to_bell(const MixedEnsemble& e, Bell which, int pair_a, int pair_b) {
  PureState phi = bell_state(which, pair_a, pair_b);
  if (e.registry() != phi.registry()) {
    throw ModeError("fidelity_to_bell needs an ensemble on exactly the two named pairs");
  }
  return e.expectation(phi);
}

}  // namespace polpur
