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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tmcmc/errors.hpp"
#include "tmcmc/rng.hpp"
#include "tmcmc/samplers.hpp"
#include "tmcmc/targets.hpp"

namespace tmcmc {

/// Runs `body(i)` for i in [0, count) on up to `threads` workers (0 means
/// hardware concurrency). Each index is visited exactly once; results must be
/// written to per-index slots so the outcome is independent of scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

template <typename Scalar>
double acceptance_rate(const ChainRun<Scalar>& run) {
  if (run.n_iter < 1) throw InvalidParameter("acceptance_rate: run has no iterations");
  return static_cast<double>(run.accept_count) / static_cast<double>(run.n_iter);
}

/// Two-sided sup |F_n(x) - F(x)| over the sorted sample.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// KS distance of an ensemble of chains to the target marginal, per iteration.
struct KsSeries {
  KernelKind kind = KernelKind::atmcmc;
  std::vector<std::uint64_t> times;
  std::vector<double> ks_values;
  std::size_t chains = 0;
  /// Zero-based coordinates examined; KS is averaged across them.
  std::vector<Eigen::Index> coords{0};
  std::string reference;
};

struct KsExperimentOptions {
  std::size_t chains = 500;
  std::uint64_t horizon = 5000;
  std::vector<Eigen::Index> coords{0};
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// 0, 1, ..., 200, then every 10th iteration up to `horizon`.
std::vector<std::uint64_t> ks_recording_times(std::uint64_t horizon);

/// Runs `options.chains` chains of one kernel from `x0`; `make_source(i)`
/// supplies the draws of chain i.
template <typename Scalar, typename SourceFactory>
KsSeries ensemble_ks_series(const TargetModel<Scalar>& model, const ProposalSpec<Scalar>& spec,
                            const StateVector<Scalar>& x0, const KsExperimentOptions& options,
                            SourceFactory&& make_source) {
  if (options.chains < 2) throw InvalidParameter("ks_experiment: L must be >= 2");
  if (options.coords.empty()) throw InvalidParameter("ks_experiment: no coordinates selected");
  for (Eigen::Index c : options.coords) {
    if (c < 0 || c >= model.dim()) throw InvalidParameter("ks_experiment: coordinate out of range");
  }
  detail::check_kernel(model, spec, spec.kind);
  const Scalar lp0 = log_pi(model, x0);

  KsSeries series;
  series.kind = spec.kind;
  series.times = ks_recording_times(options.horizon);
  series.chains = options.chains;
  series.coords = options.coords;
  series.reference = model.component().name() + " marginal cdf";

  const std::size_t n_times = series.times.size();
  const std::size_t n_coords = options.coords.size();
  // values[(t * n_coords + k) * chains + chain]
  std::vector<double> values(n_times * n_coords * options.chains);

  parallel_for(options.chains, options.threads, [&](std::size_t chain) {
    auto src = make_source(chain);
    StateVector<Scalar> x = x0;
    Scalar lp = lp0;
    std::size_t next = 0;
    for (std::uint64_t t = 0; next < n_times; ++t) {
      if (t > 0) {
        StepOutcome<Scalar> step = detail::transition(model, spec, x, lp, src);
        if (step.accepted) x = std::move(step.next);
      }
      if (series.times[next] == t) {
        for (std::size_t k = 0; k < n_coords; ++k) {
          values[(next * n_coords + k) * options.chains + chain] =
              static_cast<double>(x[options.coords[k]]);
        }
        ++next;
      }
    }
  });

  const auto cdf = [&model](double v) {
    return static_cast<double>(model.marginal_cdf(static_cast<Scalar>(v)));
  };
  series.ks_values.resize(n_times);
  for (std::size_t t = 0; t < n_times; ++t) {
    double total = 0.0;
    for (std::size_t k = 0; k < n_coords; ++k) {
      std::span<const double> slice(values.data() + (t * n_coords + k) * options.chains,
                                    options.chains);
      total += ks_statistic(slice, cdf);
    }
    series.ks_values[t] = total / static_cast<double>(n_coords);
  }
  return series;
}

/// Paired ensemble KS study; chain i of kernel a (b) draws from stream
/// derive_stream_id(1 (2), i) under `options.seed`.
std::pair<KsSeries, KsSeries> ks_experiment(const TargetModel<double>& model,
                                            const ProposalSpec<double>& spec_a,
                                            const ProposalSpec<double>& spec_b,
                                            const StateVector<double>& x0,
                                            const KsExperimentOptions& options);

/// Least-squares slope of the last `fraction` of (times, values).
double tail_slope(std::span<const std::uint64_t> times, std::span<const double> values,
                  double fraction = 0.2);

/// Drift function V_s(x) = exp(s |x_1|), s in (0, 1].
struct DriftFunction {
  double s = 0.5;
  double log_value(const Eigen::Ref<const Eigen::VectorXd>& x) const { return s * std::abs(x[0]); }
};

struct DriftEstimate {
  Eigen::VectorXd x_probe;
  DriftFunction drift;
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

/// Monte Carlo estimate of PV(x)/V(x) over M one-step transitions from x.
DriftEstimate drift_ratio(const TargetModel<double>& model, const ProposalSpec<double>& spec,
                          const DriftFunction& drift, const Eigen::VectorXd& x_probe,
                          std::uint64_t samples, RngStream& stream);

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  /// Estimates over the first M/4, M/2 and M draws.
  std::array<double, 3> nested{};
  /// Heuristic: the estimate grew by more than 20% at both doublings.
  bool divergence_suspected = false;
};

/// Monte Carlo estimates of E[(f'/f)^8] (M1) and E[(f''/f)^4] (M2) under f.
struct RegularityMoments {
  MomentEstimate m1;
  MomentEstimate m2;
  std::uint64_t samples = 0;
};

RegularityMoments regularity_moments(const TargetModel<double>& model, std::uint64_t samples,
                                     RngStream& stream);

struct DrawCountReport {
  KernelKind kind_a = KernelKind::atmcmc;
  KernelKind kind_b = KernelKind::rwmh;
  Eigen::Index d = 0;
  DrawCounters draws_a;
  DrawCounters draws_b;
  std::uint64_t n_iter_a = 0;
  std::uint64_t n_iter_b = 0;
  /// Continuous draws per iteration, b over a.
  double continuous_ratio = 0.0;
  double seconds_a = 0.0;
  double seconds_b = 0.0;
};

template <typename Scalar>
DrawCountReport draw_count_report(const ChainRun<Scalar>& run_a, const ChainRun<Scalar>& run_b) {
  DrawCountReport report;
  report.kind_a = run_a.kind;
  report.kind_b = run_b.kind;
  report.d = run_a.d;
  report.draws_a = run_a.draws;
  report.draws_b = run_b.draws;
  report.n_iter_a = run_a.n_iter;
  report.n_iter_b = run_b.n_iter;
  const double per_a = static_cast<double>(run_a.draws.continuous) / static_cast<double>(run_a.n_iter);
  const double per_b = static_cast<double>(run_b.draws.continuous) / static_cast<double>(run_b.n_iter);
  report.continuous_ratio = per_b / per_a;
  report.seconds_a = run_a.elapsed_seconds;
  report.seconds_b = run_b.elapsed_seconds;
  return report;
}

}  // namespace tmcmc
