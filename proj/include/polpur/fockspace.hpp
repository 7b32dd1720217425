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

#ifndef POLPUR_FOCKSPACE_HPP_
#define POLPUR_FOCKSPACE_HPP_

#include <complex>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace polpur {

using Complex = std::complex<double>;

/// Thrown when two states or transforms disagree about the modes they act on.
class ModeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Pol : std::uint8_t { H = 0, V = 1 };

/// One field mode: a spatial path and a polarization. Ordered by (spatial, pol).
struct ModeId {
  int spatial = 0;
  Pol pol = Pol::H;

  auto operator<=>(const ModeId&) const = default;

  /// "5H", "12V", ...
  std::string label() const;
  static ModeId parse(std::string_view label);
};

inline ModeId mode_h(int spatial) { return {spatial, Pol::H}; }
inline ModeId mode_v(int spatial) { return {spatial, Pol::V}; }

/// Sorted set of distinct modes a state is defined on.
class ModeRegistry {
 public:
  ModeRegistry() = default;
  ModeRegistry(std::initializer_list<ModeId> modes);
  explicit ModeRegistry(std::vector<ModeId> modes);

  /// Both polarizations of each spatial label.
  static ModeRegistry of_spatial(std::initializer_list<int> spatial);

  bool contains(ModeId m) const;
  bool disjoint(const ModeRegistry& other) const;
  bool includes(const ModeRegistry& other) const;
  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }
  std::span<const ModeId> modes() const { return modes_; }

  ModeRegistry united(const ModeRegistry& other) const;
  ModeRegistry without(const ModeRegistry& other) const;

  bool operator==(const ModeRegistry&) const = default;

 private:
  std::vector<ModeId> modes_;
};

/// Photon counts per mode. Only non-zero counts are stored, in mode order,
/// so equal occupations compare equal structurally.
class OccupationVector {
 public:
  OccupationVector() = default;
  OccupationVector(std::initializer_list<std::pair<ModeId, int>> counts);

  int count(ModeId m) const;
  int total() const { return total_; }
  bool is_vacuum() const { return counts_.empty(); }
  std::span<const std::pair<ModeId, int>> entries() const { return counts_; }

  /// Copy with the count of `m` replaced.
  OccupationVector with(ModeId m, int n) const;
  /// Copy with `n` extra photons in `m`.
  OccupationVector added(ModeId m, int n) const;
  /// Counts restricted to modes in `keep`.
  OccupationVector restricted(const ModeRegistry& keep) const;
  /// Counts on modes not in `drop`.
  OccupationVector without(const ModeRegistry& drop) const;
  /// Sum of counts on the given modes.
  int total_on(std::span<const ModeId> modes) const;

  /// Union of two occupations on disjoint modes.
  friend OccupationVector merge(const OccupationVector& a, const OccupationVector& b);

  auto operator<=>(const OccupationVector& o) const { return counts_ <=> o.counts_; }
  bool operator==(const OccupationVector& o) const { return counts_ == o.counts_; }

 private:
  std::vector<std::pair<ModeId, int>> counts_;
  int total_ = 0;
};

/// Truncation and pruning applied when states are built or transformed.
struct FockOptions {
  /// Maximum total photon number kept; negative means unbounded.
  int n_max = -1;
  /// Amplitudes with modulus below this are dropped.
  double prune_tol = 1e-15;
};

/// Sparse superposition over occupation-number basis states.
class PureState {
 public:
  using Terms = std::map<OccupationVector, Complex>;

  PureState() = default;
  explicit PureState(ModeRegistry registry) : registry_(std::move(registry)) {}

  static PureState vacuum(ModeRegistry registry);
  static PureState basis(ModeRegistry registry, const OccupationVector& occ, Complex amp = 1.0);

  const ModeRegistry& registry() const { return registry_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Accumulates `amp` onto the term for `occ`. Modes of `occ` must be registered.
  void add(const OccupationVector& occ, Complex amp);
  Complex amplitude(const OccupationVector& occ) const;

  double norm2() const;
  double norm() const;
  PureState normalized() const;
  PureState scaled(Complex factor) const;

  /// Drops small amplitudes and terms above `opts.n_max`; the squared norm of
  /// everything above the cutoff is accumulated into truncated_weight().
  PureState& apply_options(const FockOptions& opts);

  /// Weight discarded by photon-number truncation so far.
  double truncated_weight() const { return truncated_weight_; }
  void set_truncated_weight(double w) { truncated_weight_ = w; }

  /// Adds vacuum modes to the registry.
  PureState with_modes(const ModeRegistry& extra) const;

  /// Terms whose total photon number on `modes` is `n`.
  PureState photon_sector(std::span<const ModeId> modes, int n) const;

  nlohmann::ordered_json to_json() const;
  static PureState from_json(const nlohmann::json& j, ModeRegistry registry);

 private:
  ModeRegistry registry_;
  Terms terms_;
  double truncated_weight_ = 0.0;
};

PureState operator+(const PureState& a, const PureState& b);

/// a ⊗ b on disjoint registries.
PureState tensor(const PureState& a, const PureState& b);

/// ⟨a|b⟩. Registries must match.
Complex overlap(const PureState& a, const PureState& b);

/// Classical mixture of normalized pure states. Weights sum to the trace,
/// which is below one when photon-number truncation removed weight upstream.
class MixedEnsemble {
 public:
  struct Component {
    double weight = 0.0;
    PureState state;
  };

  MixedEnsemble() = default;
  explicit MixedEnsemble(ModeRegistry registry) : registry_(std::move(registry)) {}
  static MixedEnsemble pure(const PureState& s);

  const ModeRegistry& registry() const { return registry_; }
  std::span<const Component> components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  bool empty() const { return components_.empty(); }

  /// Adds `w · |s⟩⟨s| / ⟨s|s⟩`. Zero-norm states are ignored.
  void add(double w, const PureState& s);
  /// Adds `w · |s⟩⟨s|` for an unnormalized `s`, i.e. weight w·⟨s|s⟩.
  void add_unnormalized(double w, const PureState& s);
  /// Adds another ensemble's components scaled by `w`.
  void add(double w, const MixedEnsemble& e);

  double trace() const;
  MixedEnsemble normalized() const;
  MixedEnsemble scaled(double factor) const;

  /// Merges components whose states coincide up to a global phase.
  MixedEnsemble consolidated(double tol = 1e-12) const;

  double dropped_weight() const { return dropped_weight_; }
  void set_dropped_weight(double w) { dropped_weight_ = w; }

  /// Σᵢ wᵢ ⟨ψᵢ|φ⟩⟨φ|ψᵢ⟩.
  double expectation(const PureState& phi) const;

  /// Weight carried by components' total photon number on `modes` equal to `n`.
  double photon_number_weight(std::span<const ModeId> modes, int n) const;

  nlohmann::ordered_json to_json() const;

 private:
  ModeRegistry registry_;
  std::vector<Component> components_;
  double dropped_weight_ = 0.0;
};

/// Reduces onto the complement of `modes`. Components split by the occupation
/// of the discarded modes, which is exact for the number-diagonal operators
/// the protocol traces against.
MixedEnsemble trace_out(const MixedEnsemble& e, const ModeRegistry& modes);

enum class Bell { PhiPlus, PhiMinus };

/// (|1⟩_aH|1⟩_bH ± |1⟩_aV|1⟩_bV)/√2.
PureState bell_state(Bell which, int pair_a, int pair_b);

double fidelity_to_bell(const MixedEnsemble& e, Bell which, int pair_a, int pair_b);

}  // namespace polpur

#endif  // POLPUR_FOCKSPACE_HPP_
