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

#include "polpur/optics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace polpur {

namespace {

void require_distinct(const std::vector<ModeId>& modes, const char* what) {
  std::set<ModeId> seen(modes.begin(), modes.end());
  if (seen.size() != modes.size()) throw ModeError(std::string("duplicate mode in ") + what);
}

std::ptrdiff_t index_of(const std::vector<ModeId>& modes, ModeId m) {
  auto it = std::find(modes.begin(), modes.end(), m);
  return it == modes.end() ? -1 : it - modes.begin();
}

double sqrt_factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return std::sqrt(f);
}

}  // namespace

LinearTransform::LinearTransform(std::vector<ModeId> inputs, std::vector<ModeId> outputs,
                                 Eigen::MatrixXcd matrix)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), matrix_(std::move(matrix)) {
  require_distinct(inputs_, "transform inputs");
  require_distinct(outputs_, "transform outputs");
  if (matrix_.rows() != static_cast<Eigen::Index>(outputs_.size()) ||
      matrix_.cols() != static_cast<Eigen::Index>(inputs_.size())) {
    throw std::invalid_argument("transform matrix shape does not match its modes");
  }
}

LinearTransform::LinearTransform(std::vector<ModeId> modes, Eigen::MatrixXcd matrix)
    : LinearTransform(modes, modes, std::move(matrix)) {}

LinearTransform LinearTransform::identity(std::vector<ModeId> modes) {
  auto n = static_cast<Eigen::Index>(modes.size());
  return LinearTransform(std::move(modes), Eigen::MatrixXcd::Identity(n, n));
}

bool LinearTransform::is_unitary(double tol) const {
  if (matrix_.rows() != matrix_.cols()) return false;
  return (matrix_.adjoint() * matrix_ - Eigen::MatrixXcd::Identity(matrix_.rows(), matrix_.cols()))
             .cwiseAbs()
             .maxCoeff() <= tol;
}

LinearTransform LinearTransform::with_output_factors(
    const std::vector<std::pair<ModeId, Complex>>& f) const {
  LinearTransform out = *this;
  for (const auto& [m, factor] : f) {
    auto i = index_of(outputs_, m);
    if (i < 0) throw ModeError("mode " + m.label() + " is not an output of the transform");
    out.matrix_.row(i) *= factor;
  }
  return out;
}

LinearTransform compose(const LinearTransform& second, const LinearTransform& first) {
  // Modes in flight between the two stages.
  std::vector<ModeId> inputs = first.inputs();
  for (ModeId m : second.inputs()) {
    if (index_of(first.outputs(), m) < 0) {
      if (index_of(inputs, m) >= 0) throw ModeError("compose: ambiguous input " + m.label());
      inputs.push_back(m);
    }
  }
  std::vector<ModeId> outputs = second.outputs();
  for (ModeId m : first.outputs()) {
    if (index_of(second.inputs(), m) < 0) {
      if (index_of(outputs, m) >= 0) throw ModeError("compose: colliding output " + m.label());
      outputs.push_back(m);
    }
  }

  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(outputs.size()),
                                              static_cast<Eigen::Index>(inputs.size()));
  auto route = [&](Eigen::Index col, ModeId mid, Complex amp) {
    auto k = index_of(second.inputs(), mid);
    if (k < 0) {
      u(index_of(outputs, mid), col) += amp;
      return;
    }
    for (std::size_t i = 0; i < second.outputs().size(); ++i) {
      u(index_of(outputs, second.outputs()[i]), col) +=
          amp * second.matrix()(static_cast<Eigen::Index>(i), k);
    }
  };
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    auto col = static_cast<Eigen::Index>(j);
    auto fj = index_of(first.inputs(), inputs[j]);
    if (fj >= 0) {
      for (std::size_t k = 0; k < first.outputs().size(); ++k) {
        Complex a = first.matrix()(static_cast<Eigen::Index>(k), fj);
        if (a != Complex{}) route(col, first.outputs()[k], a);
      }
    } else {
      route(col, inputs[j], 1.0);
    }
  }
  return LinearTransform(std::move(inputs), std::move(outputs), std::move(u));
}

LinearTransform half_wave_plate(ModeId h_mode, ModeId v_mode, WavePlate angle) {
  if (h_mode.spatial != v_mode.spatial) {
    throw ModeError("wave plate modes must share a spatial label");
  }
  if (h_mode.pol != Pol::H || v_mode.pol != Pol::V) {
    throw ModeError("wave plate expects an (H, V) mode pair");
  }
  Eigen::Matrix2cd m;
  if (angle == WavePlate::Deg45) {
    const double r = 1.0 / std::sqrt(2.0);
    m << r, r, r, -r;
  } else {
    m << 0.0, 1.0, 1.0, 0.0;
  }
  return LinearTransform({h_mode, v_mode}, m);
}

LinearTransform pbs(int in1, int in2, int out_t, int out_r, PbsPhases phases) {
  if (in1 == in2 || out_t == out_r) throw ModeError("pbs needs distinct ports");
  std::vector<ModeId> inputs{mode_h(in1), mode_v(in1), mode_h(in2), mode_v(in2)};
  std::vector<ModeId> outputs{mode_h(out_t), mode_v(out_r), mode_h(out_r), mode_v(out_t)};
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (int k = 0; k < 4; ++k) m(k, k) = phases[static_cast<std::size_t>(k)];
  return LinearTransform(std::move(inputs), std::move(outputs), m);
}

LinearTransform lossy_channel(ModeId mode, Complex mu, ModeId ancilla) {
  if (std::abs(mu) > 1.0 + 1e-15) throw std::invalid_argument("channel transmission |mu| > 1");
  if (mode == ancilla) throw ModeError("loss ancilla must differ from the channel mode");
  const double s = std::sqrt(std::max(0.0, 1.0 - std::norm(mu)));
  Eigen::Matrix2cd m;
  m << mu, -s, s, std::conj(mu);
  return LinearTransform({mode, ancilla}, m);
}

LinearTransform phase_shift(ModeId mode, double phase) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = std::polar(1.0, phase);
  return LinearTransform({mode}, m);
}

LinearTransform mode_swap(ModeId a, ModeId b) {
  Eigen::Matrix2cd m;
  m << 0.0, 1.0, 1.0, 0.0;
  return LinearTransform({a, b}, m);
}

PureState apply(const LinearTransform& t, const PureState& s, const FockOptions& opts) {
  ModeRegistry in_reg(t.inputs());
  ModeRegistry out_reg(t.outputs());
  if (!s.registry().includes(in_reg)) throw ModeError("transform input not in state registry");
  ModeRegistry rest = s.registry().without(in_reg);
  if (!rest.disjoint(out_reg)) throw ModeError("transform output collides with an untouched mode");

  const auto n_out = t.outputs().size();
  const auto& u = t.matrix();
  PureState out(rest.united(out_reg));
  out.set_truncated_weight(s.truncated_weight());

  using Poly = std::map<std::vector<int>, Complex>;
  for (const auto& [occ, amp] : s.terms()) {
    Poly poly;
    Complex c = amp;
    for (ModeId m : t.inputs()) c /= sqrt_factorial(occ.count(m));
    poly.emplace(std::vector<int>(n_out, 0), c);

    for (std::size_t j = 0; j < t.inputs().size(); ++j) {
      const int n = occ.count(t.inputs()[j]);
      const auto col = static_cast<Eigen::Index>(j);
      for (int rep = 0; rep < n; ++rep) {
        Poly next;
        for (const auto& [exps, coeff] : poly) {
          for (std::size_t i = 0; i < n_out; ++i) {
            Complex uij = u(static_cast<Eigen::Index>(i), col);
            if (uij == Complex{}) continue;
            auto e = exps;
            ++e[i];
            next[e] += coeff * uij;
          }
        }
        poly = std::move(next);
      }
    }

    OccupationVector base = occ.without(in_reg);
    for (const auto& [exps, coeff] : poly) {
      OccupationVector o = base;
      double f = 1.0;
      for (std::size_t i = 0; i < n_out; ++i) {
        if (exps[i] == 0) continue;
        o = o.with(t.outputs()[i], exps[i]);
        f *= sqrt_factorial(exps[i]);
      }
      out.add(o, coeff * f);
    }
  }
  out.apply_options(opts);
  return out;
}

MixedEnsemble apply(const LinearTransform& t, const MixedEnsemble& e, const FockOptions& opts) {
  ModeRegistry reg = e.registry().without(ModeRegistry(t.inputs())).united(ModeRegistry(t.outputs()));
  MixedEnsemble out(reg);
  out.set_dropped_weight(e.dropped_weight());
  for (const auto& c : e.components()) {
    PureState s = apply(t, c.state, opts);
    out.set_dropped_weight(out.dropped_weight() + c.weight * s.truncated_weight());
    out.add_unnormalized(c.weight, s);
  }
  return out;
}

}  // namespace polpur
