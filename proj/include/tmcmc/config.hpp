/*
   Copyright 2026 The tmcmc Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tmcmc/samplers.hpp"

namespace tmcmc {

enum class ExperimentKind { sample, bench_table, ks_experiment, scaling_curves, drift_check, moments_check };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view text);

/// A config problem, addressable by line and field ("target.d").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string field, const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

struct TargetConfig {
  std::string component = "gaussian";
  double variance = 1.0;
  std::int64_t d = 1;
  friend bool operator==(const TargetConfig&, const TargetConfig&) = default;
};

struct KernelConfig {
  KernelKind kind = KernelKind::atmcmc;
  double l = 2.4;
  std::vector<double> c;
  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

struct RunConfig {
  std::uint64_t n_iter = 100000;
  std::uint64_t thin = 1;
  /// One value is broadcast to every coordinate.
  std::vector<double> x0{0.0};
  /// Leading coordinates written to the trace; 0 means all.
  std::int64_t record_coords = 0;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct GridCell {
  std::int64_t d;
  double l;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct GridConfig {
  std::vector<GridCell> cells;
  std::vector<KernelKind> kernels{KernelKind::rwmh, KernelKind::atmcmc};
  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct KsConfig {
  std::vector<KernelKind> kernels{KernelKind::atmcmc, KernelKind::rwmh};
  double l = 2.4;
  std::uint64_t chains = 500;
  std::uint64_t horizon = 5000;
  std::vector<double> x0{3.0};
  /// One-based coordinate indices; KS is averaged over them.
  std::vector<std::int64_t> coords{1};
  friend bool operator==(const KsConfig&, const KsConfig&) = default;
};

struct ScalingConfig {
  double fisher_info = 1.0;
  std::int64_t points = 200;
  double l_min = 0.1;
  double l_max = 10.0;
  double abs_tol = 1e-8;
  friend bool operator==(const ScalingConfig&, const ScalingConfig&) = default;
};

struct DriftConfig {
  double s = 0.5;
  /// Values of the first coordinate to probe; other coordinates are 0.
  std::vector<double> probes{0.0, 6.0, 8.0, 10.0};
  std::uint64_t samples = 100000;
  friend bool operator==(const DriftConfig&, const DriftConfig&) = default;
};

struct MomentsConfig {
  std::uint64_t samples = 1000000;
  friend bool operator==(const MomentsConfig&, const MomentsConfig&) = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::sample;
  std::uint64_t seed = 0;
  std::string out;
  unsigned threads = 0;
  TargetConfig target;
  KernelConfig kernel;
  RunConfig run;
  GridConfig grid;
  KsConfig ks;
  ScalingConfig scaling;
  DriftConfig drift;
  MomentsConfig moments;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// The acceptance-rate grid that bench-table uses when no [grid] cells are given.
std::vector<GridCell> default_bench_cells();

/// Parses the INI-style experiment format documented in README.md.
/// Unknown sections and keys, duplicate keys and domain violations throw
/// `ConfigError`.
ExperimentConfig parse_config(std::string_view text);

/// Canonical text for `config`; `parse_config(to_config_text(c)) == c`.
std::string to_config_text(const ExperimentConfig& config);

/// Re-checks every invariant (used after command-line overrides).
void validate(const ExperimentConfig& config);

/// Expands a one-value x0 to dimension d.
Eigen::VectorXd expand_start(const std::vector<double>& x0, std::int64_t d, const char* field);

}  // namespace tmcmc
