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

#include <filesystem>
#include <string>
#include <vector>

#include "tmcmc/config.hpp"

namespace tmcmc {

struct ExperimentOutput {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> files;
};

/// Runs the experiment described by `config` and writes its CSV/JSON
/// outputs plus `metadata.json` into `config.out`. Deterministic CSV and
/// metadata for a given config; wall-clock timings go to `timing.json`.
///
/// Throws `ConfigError` or `InvalidParameter` for invalid input and
/// `std::runtime_error` for I/O failures.
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Reads either a config file or a `metadata.json` sidecar (its
/// `config_text` entry) and parses it.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Formats `v` with 17 significant digits.
std::string format_real(double v);

}  // namespace tmcmc
