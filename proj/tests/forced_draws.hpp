#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "tmcmc/rng.hpp"

// Scripted draw source for deterministic kernel tests. Counts draws the same
// way RngStream does.
struct ForcedDraws {
  double eps = 0.0;
  Eigen::VectorXd signs;
  Eigen::VectorXd normals;
  // -inf always accepts; 0 always rejects (log_alpha <= 0).
  double log_u = -std::numeric_limits<double>::infinity();
  tmcmc::DrawCounters count;

  double draw_half_normal(double) {
    ++count.continuous;
    return eps;
  }
  Eigen::VectorXd draw_signs(Eigen::Index d) {
    count.sign_bits += static_cast<std::uint64_t>(d);
    return signs.size() == d ? signs : Eigen::VectorXd::Ones(d);
  }
  Eigen::VectorXd draw_std_normal_vec(Eigen::Index d, double) {
    count.continuous += static_cast<std::uint64_t>(d);
    return normals.size() == d ? normals : Eigen::VectorXd::Zero(d);
  }
  double log_uniform() {
    ++count.continuous;
    return log_u;
  }
  const tmcmc::DrawCounters& counters() const { return count; }
};
