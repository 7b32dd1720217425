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

#ifndef POLPUR_DETECTION_HPP_
#define POLPUR_DETECTION_HPP_

#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "polpur/fockspace.hpp"

namespace polpur {

/// Largest photon number a POVM diagonal is tabulated for.
inline constexpr int kMaxPhotons = 16;

enum class DetectorKind { Conventional, SinglePhoton };

std::string to_string(DetectorKind k);
DetectorKind detector_kind_from_string(const std::string& s);

struct DetectorModel {
  DetectorKind kind = DetectorKind::Conventional;
  /// Quantum efficiency η in [0, 1].
  double efficiency = 1.0;
  /// Mean number of dark counts per run, ν ≥ 0.
  double dark_mean = 0.0;

  void validate() const;
  bool operator==(const DetectorModel&) const = default;
};

/// Photon-number-diagonal POVM element: diag(m) for m = 0..max_photons().
class PovmElement {
 public:
  PovmElement() = default;
  explicit PovmElement(std::vector<double> diag);

  static PovmElement identity(int m_max = kMaxPhotons);

  double operator()(int m) const;
  int max_photons() const { return static_cast<int>(diag_.size()) - 1; }
  std::span<const double> diag() const { return diag_; }

  PovmElement operator+(const PovmElement& o) const;

 private:
  std::vector<double> diag_;
};

/// Π_n: n photocounts from an ideal number-resolving detector of efficiency η.
PovmElement povm_n(double eta, int n, int m_max = kMaxPhotons);

/// Π_c0 (no click) or Π_c1 (click).
PovmElement povm_conventional(double eta, bool clicked, int m_max = kMaxPhotons);

enum class SingleOutcome { None = 0, One = 1, Multi = 2 };

/// Π_s0, Π_s1 or Π_s2 of a detector resolving 0, 1 and ≥2 photocounts.
PovmElement povm_single(double eta, SingleOutcome outcome, int m_max = kMaxPhotons);

/// Probability of k reported counts given m incident photons: binomial
/// detection convolved with independent Poisson(ν) dark counts.
double photocount_probability(int k, int m, double eta, double nu);

/// The complete outcome table of one detector. Each outcome is a bin of the
/// reported photocount [lo, hi]; the last bin is open-ended and is filled so
/// that every row sums to one.
class OutcomeSet {
 public:
  struct Outcome {
    std::string label;
    int lo = 0;
    int hi = 0;  // inclusive; -1 for unbounded
    PovmElement element;
  };

  static OutcomeSet conventional(double eta, double nu = 0.0, int m_max = kMaxPhotons);
  static OutcomeSet single_photon(double eta, double nu = 0.0, int m_max = kMaxPhotons);
  static OutcomeSet for_model(const DetectorModel& model, int m_max = kMaxPhotons);

  double efficiency() const { return eta_; }
  double dark_mean() const { return nu_; }
  std::span<const Outcome> outcomes() const { return outcomes_; }
  std::size_t size() const { return outcomes_.size(); }
  const PovmElement& element(std::size_t i) const { return outcomes_.at(i).element; }
  const PovmElement& element(const std::string& label) const;

  /// Maps a reported photocount to its outcome index.
  std::size_t bin_of(int count) const;

 private:
  OutcomeSet(double eta, double nu, int m_max,
             std::vector<std::tuple<std::string, int, int>> bins);
  friend OutcomeSet with_dark_counts(const OutcomeSet& base, double nu);

  double eta_ = 1.0;
  double nu_ = 0.0;
  int m_max_ = kMaxPhotons;
  std::vector<Outcome> outcomes_;
};

/// Adds Poisson(ν) dark counts that are indistinguishable from real counts.
OutcomeSet with_dark_counts(const OutcomeSet& base, double nu);

/// Outcome labels.
inline constexpr const char* kNoClick = "none";
inline constexpr const char* kClick = "click";
inline constexpr const char* kOneCount = "one";
inline constexpr const char* kMultiCount = "multi";

/// The element a detector model reports for "fired" in a coincidence: a click
/// for conventional detectors, exactly one count for single-photon detectors.
PovmElement fired_element(const DetectorModel& model, int m_max = kMaxPhotons);
/// The element for "no counts".
PovmElement silent_element(const DetectorModel& model, int m_max = kMaxPhotons);

/// A detector watching one or more modes; the element applies to the total
/// photon number on them.
struct DetectorAssignment {
  std::vector<ModeId> modes;
  PovmElement element;
};

struct MeasurementResult {
  double probability = 0.0;
  /// Normalized state of the unmeasured modes; empty for zero-probability outcomes.
  std::optional<MixedEnsemble> conditional;
};

/// Probability floor below which an outcome is reported as impossible.
inline constexpr double kZeroProbability = 1e-300;

/// Tr[(⊗Π) ρ].
double outcome_probability(const MixedEnsemble& e, std::span<const DetectorAssignment> detectors);

/// Probability and conditional state of the unmeasured modes.
MeasurementResult measure(const MixedEnsemble& e, std::span<const DetectorAssignment> detectors);
MeasurementResult measure(const MixedEnsemble& e, const std::map<ModeId, PovmElement>& assignment);

/// Conditions on an outcome without discarding the measured modes: every
/// component ψ becomes √Π ψ.
MeasurementResult filter(const MixedEnsemble& e, std::span<const DetectorAssignment> detectors);

/// Draws a reported photocount for m incident photons.
int sample_photocount(int m, double eta, double nu, std::mt19937_64& rng);

}  // namespace polpur

#endif  // POLPUR_DETECTION_HPP_
