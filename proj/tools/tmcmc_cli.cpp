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

// tmcmc: runs the sampler experiments and writes CSV/JSON outputs.
//
// Exit status: 0 success, 1 invalid arguments or config, 2 runtime failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tmcmc/config.hpp"
#include "tmcmc/errors.hpp"
#include "tmcmc/experiments.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Additive TMCMC and random-walk Metropolis experiments"};
  app.set_version_flag("--version", std::string(TMCMC_VERSION));
  app.require_subcommand(1);

  Options opts;
  for (const char* name : {"sample", "bench-table", "ks-experiment", "scaling-curves",
                           "drift-check", "moments-check"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", opts.config, "experiment config file or metadata.json sidecar")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory (overrides experiment.out)");
    sub->add_option("--seed", opts.seed, "root seed (overrides experiment.seed)");
    sub->add_option("--threads", opts.threads, "worker threads; 0 uses all cores");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  try {
    tmcmc::ExperimentConfig config = tmcmc::load_config(opts.config);
    if (tmcmc::to_string(config.kind) != subcommand) {
      throw tmcmc::ConfigError(0, "experiment.kind",
                               "config describes '" + std::string(tmcmc::to_string(config.kind)) +
                                   "' but subcommand is '" + subcommand + "'");
    }
    if (!opts.out.empty()) config.out = opts.out;
    if (opts.seed) config.seed = *opts.seed;
    if (opts.threads) config.threads = *opts.threads;
    tmcmc::validate(config);

    const tmcmc::ExperimentOutput output = tmcmc::run_experiment(config);
    for (const auto& file : output.files) std::cout << file.string() << '\n';
    return 0;
  } catch (const tmcmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const tmcmc::InvalidParameter& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
