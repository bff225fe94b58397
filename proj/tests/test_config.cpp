#include <filesystem>
#include <string>

#include "doctest.h"
#include "tmcmc/config.hpp"
#include "tmcmc/experiments.hpp"
#include "tmcmc/rng.hpp"

using tmcmc::ConfigError;
using tmcmc::ExperimentKind;
using tmcmc::KernelKind;

namespace {

const char* kMinimalSample = R"(
# minimal sample run
[experiment]
kind = sample
seed = 42

[target]
d = 10

[kernel]
kind = atmcmc
l = 2.4
)";

ConfigError parse_error(const std::string& text) {
  try {
    tmcmc::parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError");
  return ConfigError(0, "", "");
}

}  // namespace

TEST_CASE("minimal configs fill defaults") {
  const auto c = tmcmc::parse_config(kMinimalSample);
  CHECK(c.kind == ExperimentKind::sample);
  CHECK(c.seed == 42);
  CHECK(c.target.component == "gaussian");
  CHECK(c.target.variance == 1.0);
  CHECK(c.target.d == 10);
  CHECK(c.run.thin == 1);
  CHECK(c.run.n_iter == 100000);

  const auto ks = tmcmc::parse_config("[experiment]\nkind = ks-experiment\nseed = 1\n[target]\nd = 30\n");
  CHECK(ks.ks.chains == 500);
  CHECK(ks.ks.horizon == 5000);
  CHECK(ks.ks.x0 == std::vector<double>{3.0});
  CHECK(ks.ks.kernels == std::vector<KernelKind>{KernelKind::atmcmc, KernelKind::rwmh});

  const auto bench = tmcmc::parse_config("[experiment]\nkind = bench-table\nseed = 1\n");
  CHECK(bench.grid.cells == tmcmc::default_bench_cells());
  CHECK(bench.grid.cells.size() == 13);
}

TEST_CASE("duplicate keys are reported by name and line") {
  const auto e = parse_error("[experiment]\nkind = sample\nseed = 1\nseed = 2\n[target]\nd = 1\n");
  CHECK(e.line() == 4);
  CHECK(e.field() == "experiment.seed");
  CHECK(std::string(e.what()).find("duplicate key 'seed'") != std::string::npos);
}

TEST_CASE("domain violations name the field") {
  auto e = parse_error("[experiment]\nkind = sample\nseed = 1\n[target]\nd = 0\n");
  CHECK(e.field() == "target.d");
  CHECK(e.line() == 5);
  CHECK(std::string(e.what()).find("d >= 1") != std::string::npos);

  e = parse_error("[experiment]\nkind = sample\nseed = 1\n[target]\nd = 2\n[kernel]\nl = -1\n");
  CHECK(e.field() == "kernel.l");
  CHECK(e.line() == 7);

  e = parse_error("[experiment]\nkind = sample\nseed = 1\n[target]\nd = 2\n[kernel]\nkind = atmcmc_scaled\nc = 1, 1\n");
  CHECK(e.field() == "kernel.c");

  e = parse_error("[experiment]\nkind = sample\nseed = 1\n[target]\nd = 3\n[run]\nx0 = 1, 2\n");
  CHECK(e.field() == "run.x0");

  e = parse_error("[experiment]\nkind = ks-experiment\nseed = 1\n[target]\nd = 3\n[ks]\ncoords = 4\n");
  CHECK(e.field() == "ks.coords");

  e = parse_error("[experiment]\nkind = drift-check\nseed = 1\n[target]\nd = 1\n[drift]\nsamples = 10\n");
  CHECK(e.field() == "drift.samples");
}

TEST_CASE("typos and structural problems are rejected") {
  CHECK(parse_error("[experiment]\nkind = sample\nseed = 1\n[target]\nd = 1\ndimension = 3\n").field() ==
        "target.dimension");
  CHECK(parse_error("[experiment]\nkind = sample\nseed = 1\n[target]\nd = 1\n[ks]\nl = 2\n").field() == "ks");
  CHECK(parse_error("[experiment]\nkind = sampel\nseed = 1\n").field() == "experiment.kind");
  CHECK(parse_error("[experiment]\nkind = sample\n[target]\nd = 1\n").field() == "experiment.seed");
  CHECK(parse_error("[experiment]\nkind = sample\nseed = 1\n[target]\n").field() == "target.d");
  CHECK(parse_error("[experiment]\nkind = sample\nseed = x\n").field() == "experiment.seed");
  CHECK(parse_error("d = 3\n").line() == 1);
  CHECK(parse_error("[experiment\n").line() == 1);
  CHECK(parse_error("[experiment]\nkind sample\n").line() == 2);
  CHECK(parse_error("[target]\nd = 1\n").field() == "experiment");
  CHECK(parse_error("[experiment]\nkind = bench-table\nseed = 1\n[target]\nd = 4\n").field() == "target.d");
  CHECK(parse_error("[experiment]\nkind = bench-table\nseed = 1\n[grid]\ncells = 2-2.4\n").field() == "grid.cells");
}

TEST_CASE("validate requires an output directory") {
  auto c = tmcmc::parse_config(kMinimalSample);
  CHECK_THROWS_AS(tmcmc::validate(c), ConfigError);
  c.out = "results";
  CHECK_NOTHROW(tmcmc::validate(c));
  c.kernel.l = 0.0;
  CHECK_THROWS_WITH(tmcmc::validate(c), doctest::Contains("kernel.l"));
}

TEST_CASE("scaling-curves resolves I from the target") {
  const auto c = tmcmc::parse_config(
      "[experiment]\nkind = scaling-curves\nseed = 0\n[target]\nvariance = 4\n");
  CHECK(c.scaling.fisher_info == 0.25);
  CHECK(tmcmc::parse_config(tmcmc::to_config_text(c)) == c);
}

// Property: canonical text re-parses to the same config for random configs.
TEST_CASE("canonical text round-trips") {
  tmcmc::RngStream r(5, 0);
  const auto pick = [&](std::uint64_t n) { return r.next_u64() % n; };
  const auto real = [&](double lo, double hi) { return lo + (hi - lo) * r.uniform(); };
  for (int rep = 0; rep < 300; ++rep) {
    tmcmc::ExperimentConfig c;
    c.kind = static_cast<ExperimentKind>(pick(6));
    c.seed = r.next_u64();
    c.out = "out_" + std::to_string(rep);
    c.threads = static_cast<unsigned>(pick(8));
    c.target.variance = real(0.1, 10);
    c.target.d = 1 + static_cast<std::int64_t>(pick(20));
    c.kernel.l = real(0.01, 12);
    if (pick(2) == 0 && c.target.d > 1) {
      c.kernel.kind = KernelKind::atmcmc_scaled;
      for (std::int64_t i = 0; i < c.target.d; ++i) c.kernel.c.push_back(real(0.5, 3));
    } else {
      c.kernel.kind = pick(2) ? KernelKind::rwmh : KernelKind::atmcmc;
    }
    c.run.n_iter = 1 + pick(1'000'000);
    c.run.thin = 1 + pick(50);
    c.run.x0 = {real(-5, 5)};
    c.run.record_coords = static_cast<std::int64_t>(pick(static_cast<std::uint64_t>(c.target.d) + 1));
    c.grid.cells = {{1 + static_cast<std::int64_t>(pick(300)), real(0.5, 12)}, {2, 6.0}};
    c.ks.l = real(0.5, 8);
    c.ks.chains = 2 + pick(1000);
    c.ks.coords = {1, c.target.d};
    c.scaling.points = 2 + static_cast<std::int64_t>(pick(500));
    c.scaling.abs_tol = real(1e-12, 1e-8);
    c.drift.s = real(0.01, 1.0);
    c.drift.probes = {real(-10, 10), real(-10, 10)};
    c.moments.samples = 8 + pick(1'000'000);

    // Only the sections a kind reads survive the round trip; normalize the rest.
    tmcmc::ExperimentConfig expected = tmcmc::parse_config(tmcmc::to_config_text(c));
    CAPTURE(tmcmc::to_config_text(c));
    CHECK(tmcmc::parse_config(tmcmc::to_config_text(expected)) == expected);
    CHECK(tmcmc::to_config_text(expected) == tmcmc::to_config_text(c));
    CHECK(expected.seed == c.seed);
    CHECK(expected.kind == c.kind);
    if (c.kind == ExperimentKind::sample) {
      CHECK(expected.kernel == c.kernel);
      CHECK(expected.run == c.run);
      CHECK(expected.target == c.target);
    }
  }
}

TEST_CASE("shipped configs are valid") {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(TMCMC_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    const auto c = tmcmc::load_config(entry.path());
    CHECK_NOTHROW(tmcmc::validate(c));
    ++seen;
  }
  CHECK(seen >= 6);

  const auto bench = tmcmc::load_config(std::filesystem::path(TMCMC_CONFIG_DIR) / "bench_table.cfg");
  CHECK(bench.grid.cells == tmcmc::default_bench_cells());
}
