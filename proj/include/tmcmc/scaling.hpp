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

#include <functional>
#include <vector>

#include "tmcmc/samplers.hpp"

namespace tmcmc {

/// Standard normal CDF and density.
double normal_cdf(double x);
double normal_pdf(double x);

/// Adaptive Gauss-Kronrod (7/15) on the truncated domain [0, upper].
struct QuadratureSpec {
  double upper = 8.0;
  double abs_tol = 1e-8;
  int max_subdivisions = 200;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subintervals = 0;
};

/// Integrates `f` over [a, b]. Throws `NumericalError` reporting the achieved
/// error estimate when `spec.max_subdivisions` is exhausted.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec);

/// E[min(1, e^X)] for X ~ N(mu, sigma^2), in closed form.
double expected_min_exp(double mu, double sigma);

/// 2 l^2 Phi(-l sqrt(I) / 2).
double diffusion_speed_rwmh(double l, double fisher);

/// 4 l^2 int_0^inf z^2 Phi(-z l sqrt(I) / 2) phi(z) dz.
double diffusion_speed_atmcmc(double l, double fisher, const QuadratureSpec& quad = {});

/// 2 Phi(-l sqrt(I) / 2).
double asymptotic_acceptance_rwmh(double l, double fisher);

/// 4 int_0^inf Phi(-u l sqrt(I) / 2) phi(u) du.
double asymptotic_acceptance_atmcmc(double l, double fisher, const QuadratureSpec& quad = {});

double diffusion_speed(KernelKind kind, double l, double fisher, const QuadratureSpec& quad = {});
double asymptotic_acceptance(KernelKind kind, double l, double fisher,
                             const QuadratureSpec& quad = {});

struct ScalingResult {
  KernelKind kind = KernelKind::atmcmc;
  double l_opt = 0.0;
  double h_at_opt = 0.0;
  double alpha_opt = 0.0;
};

/// Golden-section search for the maximizer of `f` on [lo, hi].
double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tol);

/// Maximizes the diffusion speed over l in [0.1, 10] to |dl| < 1e-4.
/// `atmcmc_scaled` is treated as `atmcmc`.
ScalingResult optimize_scaling(KernelKind kind, double fisher, const QuadratureSpec& quad = {});

struct ScalingCurvePoint {
  double l;
  double h_rwmh;
  double h_atmcmc;
  double alpha_rwmh;
  double alpha_atmcmc;
};

/// Uniform grid of `points` values of l over [l_min, l_max].
std::vector<ScalingCurvePoint> scaling_curve(double fisher, int points = 200, double l_min = 0.1,
                                             double l_max = 10.0, const QuadratureSpec& quad = {});

}  // namespace tmcmc
