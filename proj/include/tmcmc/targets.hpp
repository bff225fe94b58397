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

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "tmcmc/errors.hpp"

namespace tmcmc {

template <typename Scalar>
using StateVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One-dimensional component density f of a product target pi = prod_i f(x_i).
///
/// Densities need not be normalized for sampling; `cdf` and
/// `fisher_information` refer to the normalized f.
template <typename Scalar>
class ComponentDensity {
 public:
  virtual ~ComponentDensity() = default;

  virtual std::string name() const = 0;
  virtual Scalar log_density(Scalar x) const = 0;
  /// (log f)'(x)
  virtual Scalar score(Scalar x) const = 0;
  /// (log f)''(x)
  virtual Scalar second_score(Scalar x) const = 0;
  virtual Scalar cdf(Scalar x) const = 0;
  /// E[((log f)'(X))^2] when known in closed form.
  virtual std::optional<Scalar> fisher_information() const { return std::nullopt; }
  /// Draws one variate given a standard normal z; used by moment estimators.
  /// Components without an exact transform return nullopt.
  virtual std::optional<Scalar> from_standard_normal(Scalar) const { return std::nullopt; }

  /// Sum of log f over the coordinates. Components may override with a
  /// vectorized form.
  virtual Scalar log_density_sum(const Eigen::Ref<const StateVector<Scalar>>& x) const {
    Scalar total(0);
    for (Eigen::Index i = 0; i < x.size(); ++i) total += log_density(x[i]);
    return total;
  }
};

/// N(0, variance).
template <typename Scalar>
class GaussianComponent final : public ComponentDensity<Scalar> {
 public:
  explicit GaussianComponent(Scalar variance) : variance_(variance) {
    using std::isfinite;
    if (!(variance > Scalar(0)) || !isfinite(variance)) {
      throw InvalidParameter("gaussian component: variance must be positive and finite");
    }
    using std::log;
    log_norm_ = -Scalar(0.5) * log(Scalar(2) * std::numbers::pi_v<Scalar> * variance_);
  }

  Scalar variance() const { return variance_; }

  std::string name() const override { return "gaussian"; }
  Scalar log_density(Scalar x) const override {
    return log_norm_ - Scalar(0.5) * x * x / variance_;
  }
  Scalar score(Scalar x) const override { return -x / variance_; }
  Scalar second_score(Scalar) const override { return -Scalar(1) / variance_; }
  Scalar cdf(Scalar x) const override {
    using std::erfc;
    using std::sqrt;
    return Scalar(0.5) * erfc(-x / sqrt(Scalar(2) * variance_));
  }
  std::optional<Scalar> fisher_information() const override { return Scalar(1) / variance_; }
  std::optional<Scalar> from_standard_normal(Scalar z) const override {
    using std::sqrt;
    return sqrt(variance_) * z;
  }
  Scalar log_density_sum(const Eigen::Ref<const StateVector<Scalar>>& x) const override {
    return static_cast<Scalar>(x.size()) * log_norm_ - Scalar(0.5) * x.squaredNorm() / variance_;
  }

 private:
  Scalar variance_;
  Scalar log_norm_;
};

/// Product target pi(x) = prod_{i=1}^d f(x_i). Immutable and shareable.
template <typename Scalar>
class TargetModel {
 public:
  TargetModel(Eigen::Index dim, std::shared_ptr<const ComponentDensity<Scalar>> component)
      : dim_(dim), component_(std::move(component)) {
    if (dim_ < 1) throw InvalidParameter("target: d must be >= 1");
    if (!component_) throw InvalidParameter("target: component density is required");
  }

  static TargetModel gaussian(Eigen::Index dim, Scalar variance) {
    return TargetModel(dim, std::make_shared<const GaussianComponent<Scalar>>(variance));
  }

  Eigen::Index dim() const { return dim_; }
  const ComponentDensity<Scalar>& component() const { return *component_; }

  Scalar log_component(Scalar x) const { return component_->log_density(x); }
  Scalar score(Scalar x) const { return component_->score(x); }
  Scalar second_score(Scalar x) const { return component_->second_score(x); }
  Scalar marginal_cdf(Scalar x) const { return component_->cdf(x); }

 private:
  Eigen::Index dim_;
  std::shared_ptr<const ComponentDensity<Scalar>> component_;
};

/// Throws unless `x` has the model's dimension and only finite entries.
template <typename Scalar, typename Derived>
void check_state(const TargetModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != model.dim()) {
    throw InvalidParameter("state dimension " + std::to_string(x.size()) +
                           " does not match target dimension " + std::to_string(model.dim()));
  }
  if (!x.allFinite()) throw InvalidParameter("state has a non-finite coordinate");
}

/// log pi(x) = sum_i log f(x_i).
template <typename Scalar, typename Derived>
Scalar log_pi(const TargetModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  check_state(model, x);
  return model.component().log_density_sum(x);
}

/// Analytic Fisher information of the component; throws `Unsupported`
/// when the component has no closed form.
template <typename Scalar>
Scalar fisher_info(const TargetModel<Scalar>& model) {
  if (auto info = model.component().fisher_information()) return *info;
  throw Unsupported("fisher_info: component '" + model.component().name() +
                    "' has no analytic Fisher information");
}

}  // namespace tmcmc
