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

#include "tmcmc/scaling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <string>

#include "tmcmc/errors.hpp"

namespace tmcmc {
namespace {

// Kronrod 15-point abscissae on [-1, 1] (positive half, descending) and weights.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Embedded 7-point Gauss weights, at Kronrod nodes 1, 3, 5, 7.
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel kronrod_panel(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

void require_positive(double value, const char* op, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << op << ": " << name << " must be positive and finite, got " << value;
    throw InvalidParameter(msg.str());
  }
}

void require_quadrature(const QuadratureSpec& quad) {
  require_positive(quad.upper, "quadrature", "upper bound");
  if (!(quad.abs_tol > 0.0) || quad.abs_tol > 1e-8) {
    throw InvalidParameter("quadrature: abs_tol must lie in (0, 1e-8]");
  }
  if (quad.max_subdivisions < 1) throw InvalidParameter("quadrature: max_subdivisions >= 1");
}

double log_normal_cdf(double x) { return std::log(normal_cdf(x)); }

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec) {
  std::priority_queue<Panel> panels;
  Panel first = kronrod_panel(f, a, b);
  double total = first.value;
  double error = first.error;
  panels.push(first);
  int count = 1;
  while (error > spec.abs_tol) {
    if (count >= spec.max_subdivisions) {
      std::ostringstream msg;
      msg << "quadrature did not converge: achieved error " << error << " > tolerance "
          << spec.abs_tol << " after " << count << " subintervals";
      throw NumericalError(msg.str());
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = kronrod_panel(f, worst.a, mid);
    const Panel right = kronrod_panel(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++count;
  }
  // Re-sum from the panels to drop the cancellation drift of the running total.
  total = 0.0;
  error = 0.0;
  while (!panels.empty()) {
    total += panels.top().value;
    error += panels.top().error;
    panels.pop();
  }
  return {total, error, count};
}

double expected_min_exp(double mu, double sigma) {
  require_positive(sigma, "expected_min_exp", "sigma");
  if (!std::isfinite(mu)) throw InvalidParameter("expected_min_exp: mu must be finite");
  const double ratio = mu / sigma;
  // e^{mu + sigma^2/2} Phi(-sigma - mu/sigma), combined in log space.
  const double tail = std::exp(mu + 0.5 * sigma * sigma + log_normal_cdf(-sigma - ratio));
  const double value = normal_cdf(ratio) + tail;
  return std::clamp(value, std::numeric_limits<double>::min(), 1.0);
}

double diffusion_speed_rwmh(double l, double fisher) {
  return l * l * asymptotic_acceptance_rwmh(l, fisher);
}

double asymptotic_acceptance_rwmh(double l, double fisher) {
  require_positive(l, "asymptotic_acceptance_rwmh", "l");
  require_positive(fisher, "asymptotic_acceptance_rwmh", "I");
  return 2.0 * normal_cdf(-0.5 * l * std::sqrt(fisher));
}

double diffusion_speed_atmcmc(double l, double fisher, const QuadratureSpec& quad) {
  require_positive(l, "diffusion_speed_atmcmc", "l");
  require_positive(fisher, "diffusion_speed_atmcmc", "I");
  require_quadrature(quad);
  const double a = 0.5 * l * std::sqrt(fisher);
  const auto integrand = [a](double z) { return z * z * normal_cdf(-z * a) * normal_pdf(z); };
  return 4.0 * l * l * integrate(integrand, 0.0, quad.upper, quad).value;
}

double asymptotic_acceptance_atmcmc(double l, double fisher, const QuadratureSpec& quad) {
  require_positive(l, "asymptotic_acceptance_atmcmc", "l");
  require_positive(fisher, "asymptotic_acceptance_atmcmc", "I");
  require_quadrature(quad);
  const double a = 0.5 * l * std::sqrt(fisher);
  const auto integrand = [a](double u) { return normal_cdf(-u * a) * normal_pdf(u); };
  return 4.0 * integrate(integrand, 0.0, quad.upper, quad).value;
}

double diffusion_speed(KernelKind kind, double l, double fisher, const QuadratureSpec& quad) {
  return kind == KernelKind::rwmh ? diffusion_speed_rwmh(l, fisher)
                                  : diffusion_speed_atmcmc(l, fisher, quad);
}

double asymptotic_acceptance(KernelKind kind, double l, double fisher,
                             const QuadratureSpec& quad) {
  return kind == KernelKind::rwmh ? asymptotic_acceptance_rwmh(l, fisher)
                                  : asymptotic_acceptance_atmcmc(l, fisher, quad);
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
  if (!(lo < hi)) throw InvalidParameter("golden_section_max: need lo < hi");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  const double fa = f(a);
  const double fb = f(b);
  if (fa == fb && fb == fc && fc == fd) {
    throw NumericalError("golden_section_max: objective is flat on the search interval");
  }
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

ScalingResult optimize_scaling(KernelKind kind, double fisher, const QuadratureSpec& quad) {
  require_positive(fisher, "optimize_scaling", "I");
  if (kind == KernelKind::atmcmc_scaled) kind = KernelKind::atmcmc;
  const auto speed = [&](double l) { return diffusion_speed(kind, l, fisher, quad); };
  ScalingResult result;
  result.kind = kind;
  result.l_opt = golden_section_max(speed, 0.1, 10.0, 1e-5);
  result.h_at_opt = speed(result.l_opt);
  result.alpha_opt = asymptotic_acceptance(kind, result.l_opt, fisher, quad);
  return result;
}

std::vector<ScalingCurvePoint> scaling_curve(double fisher, int points, double l_min,
                                             double l_max, const QuadratureSpec& quad) {
  if (points < 2) throw InvalidParameter("scaling_curve: need at least 2 points");
  require_positive(l_min, "scaling_curve", "l_min");
  if (!(l_max > l_min)) throw InvalidParameter("scaling_curve: need l_max > l_min");
  std::vector<ScalingCurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double l = l_min + (l_max - l_min) * k / (points - 1);
    curve.push_back({l, diffusion_speed_rwmh(l, fisher), diffusion_speed_atmcmc(l, fisher, quad),
                     asymptotic_acceptance_rwmh(l, fisher),
                     asymptotic_acceptance_atmcmc(l, fisher, quad)});
  }
  return curve;
}

}  // namespace tmcmc
