#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "forced_draws.hpp"
#include "tmcmc/diagnostics.hpp"

using tmcmc::KernelKind;
using tmcmc::ProposalSpec;
using tmcmc::TargetModel;
using Vec = Eigen::VectorXd;

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double std_normal_quantile(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std_normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("acceptance_rate") {
  const auto model = TargetModel<double>::gaussian(2, 1.0);
  ForcedDraws always;
  always.eps = 0.0;
  const auto run = tmcmc::run_chain(model, ProposalSpec<double>::atmcmc(1.0, 2), Vec::Zero(2), 50, always);
  CHECK(tmcmc::acceptance_rate(run) == 1.0);

  // Two Table 1 cells, d = 10, l = 6.
  const auto m10 = TargetModel<double>::gaussian(10, 1.0);
  tmcmc::RngStream a(61, 1);
  tmcmc::RngStream b(61, 2);
  const auto rw = tmcmc::run_chain(m10, ProposalSpec<double>::rwmh(6.0, 10), Vec::Zero(10), 100'000, a, {200'000, 0});
  const auto at = tmcmc::run_chain(m10, ProposalSpec<double>::atmcmc(6.0, 10), Vec::Zero(10), 100'000, b, {200'000, 0});
  CHECK(std::abs(tmcmc::acceptance_rate(rw) - 0.0137) < 0.015);
  CHECK(std::abs(tmcmc::acceptance_rate(at) - 0.2034) < 0.015);
}

TEST_CASE("ks_statistic exact cases") {
  const std::vector<double> median{0.0};
  CHECK(tmcmc::ks_statistic(median, std_normal_cdf) == doctest::Approx(0.5));

  std::vector<double> quantiles;
  for (int i = 1; i <= 100; ++i) quantiles.push_back(std_normal_quantile((i - 0.5) / 100));
  CHECK(tmcmc::ks_statistic(quantiles, std_normal_cdf) == doctest::Approx(0.005).epsilon(1e-9));

  std::vector<double> shuffled = quantiles;
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 37, shuffled.end());
  CHECK(tmcmc::ks_statistic(shuffled, std_normal_cdf) == tmcmc::ks_statistic(quantiles, std_normal_cdf));

  const std::vector<double> empty;
  CHECK_THROWS_AS(tmcmc::ks_statistic(empty, std_normal_cdf), tmcmc::InvalidParameter);
  const std::vector<double> bad{0.0, NAN};
  CHECK_THROWS_AS(tmcmc::ks_statistic(bad, std_normal_cdf), tmcmc::InvalidParameter);
}

TEST_CASE("ks_statistic of iid normal draws respects the Kolmogorov bound") {
  tmcmc::RngStream s(71, 0);
  const Vec draws = s.draw_std_normal_vec(100'000, 1.0);
  const double ks = tmcmc::ks_statistic(std::span<const double>(draws.data(), draws.size()), std_normal_cdf);
  CHECK(ks > 0.0);
  // P(sqrt(n) D_n > 1.9495) ~= 0.001
  CHECK(ks < 1.9495 / std::sqrt(100'000.0));
}

TEST_CASE("ks_statistic is permutation invariant (random samples)") {
  tmcmc::RngStream s(72, 0);
  for (int rep = 0; rep < 20; ++rep) {
    Vec v = s.draw_std_normal_vec(1 + rep * 7, 2.0);
    std::vector<double> xs(v.data(), v.data() + v.size());
    const double base = tmcmc::ks_statistic(xs, std_normal_cdf);
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::swap(xs[i - 1], xs[s.next_u64() % i]);
    }
    CHECK(tmcmc::ks_statistic(xs, std_normal_cdf) == base);
    CHECK(base > 0.0);
  }
}

TEST_CASE("recording times") {
  const auto times = tmcmc::ks_recording_times(5000);
  CHECK(times.front() == 0);
  CHECK(times[200] == 200);
  CHECK(times[201] == 210);
  CHECK(times.back() == 5000);
  CHECK(times.size() == 201 + 480);
  CHECK(tmcmc::ks_recording_times(50).size() == 51);
}

TEST_CASE("ks series of frozen chains is constant") {
  const auto model = TargetModel<double>::gaussian(4, 1.0);
  const Vec x0 = Vec::Constant(4, 3.0);
  tmcmc::KsExperimentOptions opt;
  opt.chains = 20;
  opt.horizon = 300;
  for (auto spec : {ProposalSpec<double>::atmcmc(2.4, 4), ProposalSpec<double>::rwmh(2.4, 4)}) {
    const auto series = tmcmc::ensemble_ks_series(model, spec, x0, opt, [](std::size_t) {
      ForcedDraws src;
      src.eps = 0.0;
      return src;
    });
    REQUIRE(series.ks_values.size() == series.times.size());
    for (double v : series.ks_values) CHECK(v == doctest::Approx(std_normal_cdf(3.0)).epsilon(1e-14));
  }
}

TEST_CASE("ks_experiment is reproducible and independent of thread count") {
  const auto model = TargetModel<double>::gaussian(5, 1.0);
  const auto a = ProposalSpec<double>::atmcmc(2.4, 5);
  const auto b = ProposalSpec<double>::rwmh(2.4, 5);
  tmcmc::KsExperimentOptions opt;
  opt.chains = 64;
  opt.horizon = 400;
  opt.seed = 9;
  opt.threads = 1;
  const auto serial = tmcmc::ks_experiment(model, a, b, Vec::Constant(5, 3.0), opt);
  opt.threads = 4;
  const auto threaded = tmcmc::ks_experiment(model, a, b, Vec::Constant(5, 3.0), opt);
  CHECK(serial.first.ks_values == threaded.first.ks_values);
  CHECK(serial.second.ks_values == threaded.second.ks_values);
  CHECK(serial.first.times == serial.second.times);
  for (double v : serial.first.ks_values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  opt.coords = {0, 2, 4};
  const auto averaged = tmcmc::ks_experiment(model, a, b, Vec::Constant(5, 3.0), opt);
  CHECK(averaged.first.coords.size() == 3);
  CHECK(averaged.first.ks_values.front() == doctest::Approx(std_normal_cdf(3.0)));

  opt.chains = 1;
  CHECK_THROWS_AS(tmcmc::ks_experiment(model, a, b, Vec::Constant(5, 3.0), opt), tmcmc::InvalidParameter);
}

TEST_CASE("tail_slope") {
  std::vector<std::uint64_t> t;
  std::vector<double> v;
  for (std::uint64_t i = 0; i < 100; ++i) {
    t.push_back(i * 10);
    v.push_back(i < 80 ? 1.0 : 0.5 + 2e-3 * static_cast<double>(i * 10));
  }
  CHECK(tmcmc::tail_slope(t, v, 0.2) == doctest::Approx(2e-3));
}

TEST_CASE("drift ratio") {
  const auto model = TargetModel<double>::gaussian(1, 1.0);
  const auto spec = ProposalSpec<double>::atmcmc(2.4, 1);
  const tmcmc::DriftFunction v{0.5};

  tmcmc::RngStream s0(81, 0);
  const auto at_zero = tmcmc::drift_ratio(model, spec, v, Vec::Zero(1), 100'000, s0);
  CHECK(at_zero.estimate >= 1.0);

  double prev_est = 1.0;
  double prev_se = 0.0;
  for (double probe : {6.0, 8.0, 10.0}) {
    tmcmc::RngStream s(82, static_cast<std::uint64_t>(probe));
    const auto est = tmcmc::drift_ratio(model, spec, v, Vec::Constant(1, probe), 100'000, s);
    CAPTURE(probe);
    CHECK(est.estimate + 3 * est.std_error < 1.0);
    CHECK(est.estimate <= prev_est + 3 * std::hypot(est.std_error, prev_se));
    prev_est = est.estimate;
    prev_se = est.std_error;
  }

  tmcmc::RngStream s1(83, 0);
  const auto tiny = tmcmc::drift_ratio(model, ProposalSpec<double>::atmcmc(1e-7, 1), v, Vec::Constant(1, 2.0), 10'000, s1);
  CHECK(tiny.estimate == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(tmcmc::drift_ratio(model, spec, v, Vec::Zero(1), 999, s1), tmcmc::InvalidParameter);
  CHECK_THROWS_AS(tmcmc::drift_ratio(model, spec, {0.0}, Vec::Zero(1), 5000, s1), tmcmc::InvalidParameter);
}

TEST_CASE("regularity moments of Gaussian components") {
  const auto model = TargetModel<double>::gaussian(1, 1.0);
  tmcmc::RngStream s(91, 0);
  const auto m = tmcmc::regularity_moments(model, 2'000'000, s);
  CHECK(std::abs(m.m1.value - 105.0) < 3 * m.m1.std_error);
  CHECK(std::abs(m.m2.value - 60.0) < 3 * m.m2.std_error);
  CHECK_FALSE(m.m1.divergence_suspected);
  CHECK_FALSE(m.m2.divergence_suspected);

  const auto wide = TargetModel<double>::gaussian(1, 4.0);
  tmcmc::RngStream s2(92, 0);
  const auto w = tmcmc::regularity_moments(wide, 200'000, s2);
  CHECK(std::isfinite(w.m1.value));
  CHECK_FALSE(w.m1.divergence_suspected);
  CHECK_FALSE(w.m2.divergence_suspected);
}

TEST_CASE("draw count report") {
  for (Eigen::Index d : {2, 50}) {
    const std::uint64_t n = d == 2 ? 10 : 100'000;
    const auto model = TargetModel<double>::gaussian(d, 1.0);
    tmcmc::RngStream a(1, 1);
    tmcmc::RngStream b(1, 2);
    const auto at = tmcmc::run_chain(model, ProposalSpec<double>::atmcmc(2.4, d), Vec::Zero(d), n, a, {n + 1, 0});
    const auto rw = tmcmc::run_chain(model, ProposalSpec<double>::rwmh(2.4, d), Vec::Zero(d), n, b, {n + 1, 0});
    const auto report = tmcmc::draw_count_report(at, rw);
    CHECK(report.draws_a.continuous == 2 * n);
    CHECK(report.draws_b.continuous == static_cast<std::uint64_t>(d + 1) * n);
    CHECK(report.continuous_ratio == static_cast<double>(d + 1) / 2.0);
  }
}

TEST_CASE("parallel_for visits every index once and propagates errors") {
  std::vector<int> hits(1000, 0);
  tmcmc::parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(tmcmc::parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw tmcmc::NumericalError("boom");
                  }),
                  tmcmc::NumericalError);
}
