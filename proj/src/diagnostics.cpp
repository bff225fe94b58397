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

#include "tmcmc/diagnostics.hpp"

#include <cmath>
#include <string>

namespace tmcmc {

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += workers) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidParameter("ks_statistic: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw InvalidParameter("ks_statistic: non-finite sample");
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    sup = std::max({sup, above, below});
  }
  return std::clamp(sup, 0.0, 1.0);
}

std::vector<std::uint64_t> ks_recording_times(std::uint64_t horizon) {
  std::vector<std::uint64_t> times;
  for (std::uint64_t t = 0; t <= std::min<std::uint64_t>(horizon, 200); ++t) times.push_back(t);
  for (std::uint64_t t = 210; t <= horizon; t += 10) times.push_back(t);
  return times;
}

std::pair<KsSeries, KsSeries> ks_experiment(const TargetModel<double>& model,
                                            const ProposalSpec<double>& spec_a,
                                            const ProposalSpec<double>& spec_b,
                                            const StateVector<double>& x0,
                                            const KsExperimentOptions& options) {
  if (spec_a.d != model.dim() || spec_b.d != model.dim()) {
    throw InvalidParameter("ks_experiment: both kernels must share the target dimension");
  }
  auto series_for = [&](const ProposalSpec<double>& spec, std::uint32_t tag) {
    return ensemble_ks_series(model, spec, x0, options, [&](std::size_t chain) {
      return RngStream(options.seed, derive_stream_id(tag, chain));
    });
  };
  return {series_for(spec_a, 1), series_for(spec_b, 2)};
}

double tail_slope(std::span<const std::uint64_t> times, std::span<const double> values,
                  double fraction) {
  if (times.size() != values.size()) throw InvalidParameter("tail_slope: length mismatch");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidParameter("tail_slope: bad fraction");
  const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(times.size())));
  if (n < 2) throw InvalidParameter("tail_slope: need at least two points");
  const std::size_t first = times.size() - n;
  double mean_t = 0.0;
  double mean_v = 0.0;
  for (std::size_t i = first; i < times.size(); ++i) {
    mean_t += static_cast<double>(times[i]);
    mean_v += values[i];
  }
  mean_t /= static_cast<double>(n);
  mean_v /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = first; i < times.size(); ++i) {
    const double dt = static_cast<double>(times[i]) - mean_t;
    sxy += dt * (values[i] - mean_v);
    sxx += dt * dt;
  }
  return sxy / sxx;
}

DriftEstimate drift_ratio(const TargetModel<double>& model, const ProposalSpec<double>& spec,
                          const DriftFunction& drift, const Eigen::VectorXd& x_probe,
                          std::uint64_t samples, RngStream& stream) {
  if (samples < 1000) throw InvalidParameter("drift_ratio: M must be >= 1000");
  if (!(drift.s > 0.0 && drift.s <= 1.0)) throw InvalidParameter("drift_ratio: s must lie in (0, 1]");
  detail::check_kernel(model, spec, spec.kind);
  const double lp_probe = log_pi(model, x_probe);
  const double log_v0 = drift.log_value(x_probe);

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t m = 0; m < samples; ++m) {
    double lp = lp_probe;
    const StepOutcome<double> step = detail::transition(model, spec, x_probe, lp, stream);
    const double ratio = std::exp(drift.log_value(step.next) - log_v0);
    sum += ratio;
    sum_sq += ratio * ratio;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {x_probe, drift, mean, std::sqrt(var / n), samples};
}

namespace {

MomentEstimate summarize(const std::vector<double>& draws) {
  MomentEstimate est;
  const std::size_t n = draws.size();
  const std::array<std::size_t, 3> cuts = {n / 4, n / 2, n};
  double sum = 0.0;
  std::size_t next_cut = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += draws[i];
    while (next_cut < cuts.size() && i + 1 == cuts[next_cut]) {
      est.nested[next_cut] = sum / static_cast<double>(cuts[next_cut]);
      ++next_cut;
    }
  }
  est.value = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : draws) ss += (v - est.value) * (v - est.value);
  est.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  est.divergence_suspected = est.nested[1] > 1.2 * est.nested[0] && est.nested[2] > 1.2 * est.nested[1];
  return est;
}

}  // namespace

RegularityMoments regularity_moments(const TargetModel<double>& model, std::uint64_t samples,
                                     RngStream& stream) {
  if (samples < 8) throw InvalidParameter("regularity_moments: M must be >= 8");
  const auto& component = model.component();
  std::vector<double> c1(samples);
  std::vector<double> c2(samples);
  for (std::uint64_t m = 0; m < samples; ++m) {
    const auto x = component.from_standard_normal(stream.standard_normal());
    if (!x) {
      throw Unsupported("regularity_moments: component '" + component.name() +
                        "' cannot be sampled exactly");
    }
    const double score = component.score(*x);
    // f''/f = (log f)'' + ((log f)')^2
    const double curvature = component.second_score(*x) + score * score;
    c1[m] = std::pow(score, 8);
    c2[m] = std::pow(curvature, 4);
  }
  return {summarize(c1), summarize(c2), samples};
}

}  // namespace tmcmc
