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

#ifndef POLPUR_RUNNER_HPP_
#define POLPUR_RUNNER_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "polpur/config.hpp"

namespace polpur {

/// One executed configuration.
struct PointResult {
  ExperimentKind kind = ExperimentKind::Pair;
  /// CSV columns, in a fixed order per experiment kind.
  std::vector<std::pair<std::string, std::string>> columns;
  /// A few columns for the console table.
  std::vector<std::pair<std::string, std::string>> headline;
  nlohmann::ordered_json result;
  /// Oracle comparison; only filled when verification was requested.
  bool verify_requested = false;
  bool verify_applicable = false;
  std::vector<std::string> failures;

  bool verified() const { return failures.empty(); }
};

/// Runs a non-sweep configuration. `index` selects an independent RNG stream
/// derived from the configured seed.
PointResult execute_point(const ExperimentConfig& config, bool verify, std::uint64_t index = 0);

struct SweepResult {
  std::vector<SweepAxis> axes;
  std::vector<ExperimentConfig> configs;
  std::vector<PointResult> points;
};

/// Expands and runs a sweep on `threads` workers. Output order is the sweep
/// index regardless of scheduling.
SweepResult execute_sweep(const ExperimentConfig& config, bool verify, unsigned threads = 0);

/// One header line plus one row per point; floats at 17 significant digits.
std::string to_csv(const std::vector<PointResult>& points,
                   const std::vector<std::vector<std::pair<std::string, std::string>>>& leading = {});
std::string to_csv(const SweepResult& sweep);

nlohmann::ordered_json to_json(const ExperimentConfig& config, const PointResult& point);
nlohmann::ordered_json to_json(const ExperimentConfig& config, const SweepResult& sweep);

/// Fixed-width console table of the headline columns.
std::string headline_table(const std::vector<PointResult>& points);

}  // namespace polpur

#endif  // POLPUR_RUNNER_HPP_
