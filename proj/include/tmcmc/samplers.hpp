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
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tmcmc/errors.hpp"
#include "tmcmc/rng.hpp"
#include "tmcmc/targets.hpp"

namespace tmcmc {

enum class KernelKind { atmcmc, rwmh, atmcmc_scaled };

inline std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::atmcmc: return "atmcmc";
    case KernelKind::rwmh: return "rwmh";
    case KernelKind::atmcmc_scaled: return "atmcmc_scaled";
  }
  return "unknown";
}

inline std::optional<KernelKind> parse_kernel_kind(std::string_view text) {
  if (text == "atmcmc") return KernelKind::atmcmc;
  if (text == "rwmh") return KernelKind::rwmh;
  if (text == "atmcmc_scaled") return KernelKind::atmcmc_scaled;
  return std::nullopt;
}

/// Anything that can feed the kernels: `RngStream` in production, scripted
/// draws in tests.
template <typename S>
concept DrawSource = requires(S& s, double sigma, Eigen::Index d) {
  { s.draw_half_normal(sigma) } -> std::convertible_to<double>;
  { s.draw_signs(d) } -> std::convertible_to<Eigen::VectorXd>;
  { s.draw_std_normal_vec(d, sigma) } -> std::convertible_to<Eigen::VectorXd>;
  { s.log_uniform() } -> std::convertible_to<double>;
  { s.counters() } -> std::convertible_to<DrawCounters>;
};

/// Proposal family and scale. Every kernel moves each coordinate with
/// standard deviation l / sqrt(d); atmcmc_scaled additionally multiplies
/// coordinate i by c_i.
template <typename Scalar>
struct ProposalSpec {
  KernelKind kind = KernelKind::atmcmc;
  Scalar l = Scalar(2.4);
  Eigen::Index d = 1;
  StateVector<Scalar> c;

  static ProposalSpec atmcmc(Scalar l, Eigen::Index d) { return {KernelKind::atmcmc, l, d, {}}; }
  static ProposalSpec rwmh(Scalar l, Eigen::Index d) { return {KernelKind::rwmh, l, d, {}}; }
  static ProposalSpec atmcmc_scaled(Scalar l, StateVector<Scalar> c) {
    const Eigen::Index d = c.size();
    return {KernelKind::atmcmc_scaled, l, d, std::move(c)};
  }

  Scalar coordinate_sd() const {
    using std::sqrt;
    return l / sqrt(static_cast<Scalar>(d));
  }

  void validate() const {
    using std::isfinite;
    if (!(l > Scalar(0)) || !isfinite(l)) throw InvalidParameter("proposal: l must be positive");
    if (d < 1) throw InvalidParameter("proposal: d must be >= 1");
    if (kind != KernelKind::atmcmc_scaled) return;
    if (c.size() != d) throw InvalidParameter("proposal: c must have length d");
    if (!c.allFinite() || (c.array() <= Scalar(0)).any()) {
      throw InvalidParameter("proposal: every c_i must be positive and finite");
    }
    if (c.minCoeff() == c.maxCoeff()) {
      throw InvalidParameter("proposal: c must not be all equal (use atmcmc instead)");
    }
  }
};

template <typename Scalar>
struct StepOutcome {
  StateVector<Scalar> next;
  bool accepted = false;
  Scalar log_alpha = Scalar(0);
  DrawCounters draws_consumed;
};

/// log of min(1, pi(y)/pi(x)). Move types are equiprobable and the eps
/// density does not depend on the signs, so no Hastings correction applies.
template <typename Scalar, typename DerivedX, typename DerivedY>
Scalar accept_prob(const TargetModel<Scalar>& model, const Eigen::MatrixBase<DerivedX>& x,
                   const Eigen::MatrixBase<DerivedY>& y) {
  const Scalar diff = log_pi(model, y) - log_pi(model, x);
  using std::isnan;
  if (isnan(diff)) throw NumericalError("accept_prob: log-density difference is NaN");
  return std::min(Scalar(0), diff);
}

namespace detail {

template <typename Scalar, DrawSource Source>
StateVector<Scalar> propose(const ProposalSpec<Scalar>& spec, const StateVector<Scalar>& x,
                            Source& src) {
  const Scalar sd = spec.coordinate_sd();
  switch (spec.kind) {
    case KernelKind::atmcmc: {
      const Scalar eps = static_cast<Scalar>(src.draw_half_normal(static_cast<double>(sd)));
      const Eigen::VectorXd signs = src.draw_signs(spec.d);
      return x + eps * signs.cast<Scalar>();
    }
    case KernelKind::atmcmc_scaled: {
      const Scalar eps = static_cast<Scalar>(src.draw_half_normal(static_cast<double>(sd)));
      const Eigen::VectorXd signs = src.draw_signs(spec.d);
      return x + eps * signs.cast<Scalar>().cwiseProduct(spec.c);
    }
    case KernelKind::rwmh: {
      const Eigen::VectorXd step = src.draw_std_normal_vec(spec.d, static_cast<double>(sd));
      return x + step.cast<Scalar>();
    }
  }
  throw InvalidParameter("proposal: unknown kernel kind");
}

/// One transition from `x`, whose log density is `log_pi_x`. On return
/// `log_pi_x` holds the log density of the new state.
template <typename Scalar, DrawSource Source>
StepOutcome<Scalar> transition(const TargetModel<Scalar>& model, const ProposalSpec<Scalar>& spec,
                               const StateVector<Scalar>& x, Scalar& log_pi_x, Source& src) {
  const DrawCounters before = src.counters();
  StateVector<Scalar> y = propose(spec, x, src);
  if (!y.allFinite()) throw NumericalError("proposal produced a non-finite coordinate");
  const Scalar log_pi_y = model.component().log_density_sum(y);
  using std::isnan;
  if (isnan(log_pi_y)) throw NumericalError("log density of the proposal is NaN");
  const Scalar log_alpha = std::min(Scalar(0), log_pi_y - log_pi_x);

  StepOutcome<Scalar> out;
  out.log_alpha = log_alpha;
  out.accepted = static_cast<Scalar>(src.log_uniform()) < log_alpha;
  if (out.accepted) {
    out.next = std::move(y);
    log_pi_x = log_pi_y;
  } else {
    out.next = x;
  }
  out.draws_consumed = src.counters() - before;
  return out;
}

template <typename Scalar>
void check_kernel(const TargetModel<Scalar>& model, const ProposalSpec<Scalar>& spec,
                  KernelKind expected) {
  if (spec.kind != expected) {
    throw InvalidParameter("proposal kind " + std::string(to_string(spec.kind)) +
                           " passed to the " + std::string(to_string(expected)) + " kernel");
  }
  spec.validate();
  if (spec.d != model.dim()) {
    throw InvalidParameter("proposal dimension does not match target dimension");
  }
}

template <typename Scalar, typename Derived, DrawSource Source>
StepOutcome<Scalar> checked_step(const TargetModel<Scalar>& model,
                                 const ProposalSpec<Scalar>& spec,
                                 const Eigen::MatrixBase<Derived>& x, Source& src,
                                 KernelKind expected) {
  check_kernel(model, spec, expected);
  const StateVector<Scalar> state = x;
  Scalar lp = log_pi(model, state);
  return transition(model, spec, state, lp, src);
}

}  // namespace detail

/// Additive TMCMC: one eps ~ |N(0, l^2/d)|, signs b_i, y_i = x_i + b_i eps.
/// Consumes 1 half-normal, d sign bits and 1 uniform.
template <typename Scalar, typename Derived, DrawSource Source>
StepOutcome<Scalar> atmcmc_step(const TargetModel<Scalar>& model, const ProposalSpec<Scalar>& spec,
                                const Eigen::MatrixBase<Derived>& x, Source& src) {
  return detail::checked_step(model, spec, x, src, KernelKind::atmcmc);
}

/// Random-walk Metropolis: y = x + N(0, l^2/d I). Consumes d normals and 1 uniform.
template <typename Scalar, typename Derived, DrawSource Source>
StepOutcome<Scalar> rwmh_step(const TargetModel<Scalar>& model, const ProposalSpec<Scalar>& spec,
                              const Eigen::MatrixBase<Derived>& x, Source& src) {
  return detail::checked_step(model, spec, x, src, KernelKind::rwmh);
}

/// Additive TMCMC with per-coordinate multipliers: y_i = x_i + b_i c_i eps,
/// one eps shared by all coordinates.
template <typename Scalar, typename Derived, DrawSource Source>
StepOutcome<Scalar> atmcmc_scaled_step(const TargetModel<Scalar>& model,
                                       const ProposalSpec<Scalar>& spec,
                                       const Eigen::MatrixBase<Derived>& x, Source& src) {
  return detail::checked_step(model, spec, x, src, KernelKind::atmcmc_scaled);
}

struct RunOptions {
  std::uint64_t thin = 1;
  /// Number of leading coordinates kept in the trace; -1 keeps all.
  Eigen::Index recorded_coords = -1;
};

/// A completed chain. Row k of `trace` is the state after iteration
/// `trace_iter[k] = (k + 1) * thin`; burn-in is not discarded here.
template <typename Scalar>
struct ChainRun {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  KernelKind kind = KernelKind::atmcmc;
  Scalar l = Scalar(0);
  Eigen::Index d = 0;
  std::uint64_t n_iter = 0;
  std::uint64_t thin = 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> trace;
  std::vector<std::uint64_t> trace_iter;
  std::vector<std::uint64_t> accepted_cum;
  std::uint64_t accept_count = 0;
  DrawCounters draws;
  StateVector<Scalar> final_state;
  double elapsed_seconds = 0.0;
};

template <typename Scalar, typename Derived, DrawSource Source>
ChainRun<Scalar> run_chain(const TargetModel<Scalar>& model, const ProposalSpec<Scalar>& spec,
                           const Eigen::MatrixBase<Derived>& x0, std::uint64_t n_iter, Source& src,
                           RunOptions options = {}) {
  if (n_iter < 1) throw InvalidParameter("run_chain: N must be >= 1");
  if (options.thin < 1) throw InvalidParameter("run_chain: thin must be >= 1");
  detail::check_kernel(model, spec, spec.kind);
  Scalar lp = log_pi(model, x0);

  const Eigen::Index kept =
      options.recorded_coords < 0 ? model.dim() : std::min(options.recorded_coords, model.dim());
  const auto rows = static_cast<Eigen::Index>(n_iter / options.thin);

  ChainRun<Scalar> run;
  if constexpr (requires { src.seed(); src.stream_id(); }) {
    run.seed = src.seed();
    run.stream_id = src.stream_id();
  }
  run.kind = spec.kind;
  run.l = spec.l;
  run.d = spec.d;
  run.n_iter = n_iter;
  run.thin = options.thin;
  run.trace.resize(rows, kept);
  run.trace_iter.reserve(static_cast<std::size_t>(rows));
  run.accepted_cum.reserve(static_cast<std::size_t>(rows));

  const DrawCounters start = src.counters();
  const auto clock_start = std::chrono::steady_clock::now();
  StateVector<Scalar> x = x0;
  Eigen::Index row = 0;
  for (std::uint64_t n = 1; n <= n_iter; ++n) {
    StepOutcome<Scalar> step = detail::transition(model, spec, x, lp, src);
    if (step.accepted) {
      ++run.accept_count;
      x = std::move(step.next);
    }
    if (n % options.thin == 0 && row < rows) {
      run.trace.row(row) = x.head(kept).transpose();
      run.trace_iter.push_back(n);
      run.accepted_cum.push_back(run.accept_count);
      ++row;
    }
  }
  run.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  run.draws = src.counters() - start;
  run.final_state = std::move(x);
  return run;
}

}  // namespace tmcmc
