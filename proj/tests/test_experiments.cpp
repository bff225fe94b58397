#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "tmcmc/experiments.hpp"

namespace fs = std::filesystem;
using tmcmc::ExperimentConfig;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tmcmc_exp_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

ExperimentConfig parse_with_out(const std::string& text, const fs::path& out) {
  ExperimentConfig c = tmcmc::parse_config(text);
  c.out = out.string();
  return c;
}

// Runs twice into separate directories and checks the deterministic files agree.
void check_idempotent(const ExperimentConfig& c, const std::vector<std::string>& files) {
  ExperimentConfig again = c;
  again.out = c.out + "_again";
  fs::remove_all(again.out);
  tmcmc::run_experiment(again);
  for (const auto& f : files) {
    CAPTURE(f);
    CHECK(slurp(fs::path(c.out) / f) == slurp(fs::path(again.out) / f));
  }
  // A run regenerated from the metadata sidecar reproduces the outputs.
  ExperimentConfig regen = tmcmc::load_config(fs::path(c.out) / "metadata.json");
  CHECK(regen.out.empty());
  regen.out = c.out + "_regen";
  fs::remove_all(regen.out);
  tmcmc::run_experiment(regen);
  for (const auto& f : files) {
    CAPTURE(f);
    CHECK(slurp(fs::path(c.out) / f) == slurp(fs::path(regen.out) / f));
  }
}

}  // namespace

TEST_CASE("sample writes a trace and sidecar") {
  const auto dir = scratch("sample");
  const auto c = parse_with_out(
      "[experiment]\nkind = sample\nseed = 9\n[target]\nd = 5\n[kernel]\nkind = atmcmc\nl = 2.4\n"
      "[run]\nn_iter = 1000\nthin = 10\nrecord_coords = 3\n",
      dir);
  const auto out = tmcmc::run_experiment(c);
  CHECK(out.files.size() == 3);
  CHECK(first_line(dir / "trace.csv") == "iter,coord_1,coord_2,coord_3,accepted_cum");
  const std::string trace = slurp(dir / "trace.csv");
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 101);

  const auto meta = nlohmann::json::parse(slurp(dir / "metadata.json"));
  CHECK(meta["experiment"] == "sample");
  CHECK(meta["seed"] == 9);
  CHECK(meta["rng_algorithm"] == "philox4x32-10/box-muller");
  CHECK(meta.contains("version"));
  CHECK(meta.contains("config_text"));
  check_idempotent(c, {"trace.csv", "metadata.json"});
}

TEST_CASE("bench-table writes one row per cell and kernel") {
  const auto dir = scratch("bench");
  const auto c = parse_with_out(
      "[experiment]\nkind = bench-table\nseed = 3\nthreads = 2\n[grid]\ncells = 1:2.4, 5:1\n"
      "[run]\nn_iter = 2000\n",
      dir);
  tmcmc::run_experiment(c);
  CHECK(first_line(dir / "bench_table.csv") == "d,l,kernel,acceptance_rate,n_iter,seed");
  CHECK(first_line(dir / "draw_counts.csv") ==
        "d,l,kernel,n_iter,continuous_draws,sign_bits,continuous_per_iter");
  const std::string table = slurp(dir / "bench_table.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);
  CHECK(table.find("5,1,atmcmc,") != std::string::npos);
  CHECK(slurp(dir / "draw_counts.csv").find("5,1,rwmh,2000,12000,0,6\n") != std::string::npos);
  CHECK(slurp(dir / "draw_counts.csv").find("5,1,atmcmc,2000,4000,10000,2\n") != std::string::npos);

  ExperimentConfig single = c;
  single.threads = 1;
  single.out = (dir.string() + "_single");
  fs::remove_all(single.out);
  tmcmc::run_experiment(single);
  CHECK(slurp(dir / "bench_table.csv") == slurp(fs::path(single.out) / "bench_table.csv"));
  check_idempotent(c, {"bench_table.csv", "draw_counts.csv", "metadata.json"});
}

TEST_CASE("ks-experiment writes the paired series") {
  const auto dir = scratch("ks");
  const auto c = parse_with_out(
      "[experiment]\nkind = ks-experiment\nseed = 4\n[target]\nd = 4\n"
      "[ks]\nchains = 20\nhorizon = 300\n",
      dir);
  tmcmc::run_experiment(c);
  CHECK(first_line(dir / "ks_series.csv") == "t,ks_atmcmc,ks_rwmh");
  const std::string csv = slurp(dir / "ks_series.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 201 + 10);
  check_idempotent(c, {"ks_series.csv", "metadata.json"});
}

TEST_CASE("scaling-curves peaks near the optimum") {
  const auto dir = scratch("scaling");
  const auto c = parse_with_out("[experiment]\nkind = scaling-curves\nseed = 0\n", dir);
  tmcmc::run_experiment(c);
  CHECK(first_line(dir / "scaling_curves.csv") == "l,h_rwmh,h_atmcmc,alpha_rwmh,alpha_atmcmc");

  std::ifstream in(dir / "scaling_curves.csv");
  std::string line;
  std::getline(in, line);
  double best_l[2] = {0, 0}, best_h[2] = {-1, -1};
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    double v[5];
    std::istringstream s(line);
    for (double& x : v) {
      std::string cell;
      std::getline(s, cell, ',');
      x = std::stod(cell);
    }
    for (int k = 0; k < 2; ++k) {
      if (v[1 + k] > best_h[k]) best_h[k] = v[1 + k], best_l[k] = v[0];
    }
  }
  CHECK(rows == 200);
  CHECK(best_l[0] == doctest::Approx(2.38).epsilon(0.03));
  CHECK(best_l[1] == doctest::Approx(2.43).epsilon(0.03));

  const auto summary = nlohmann::json::parse(slurp(dir / "scaling_summary.json"));
  CHECK(summary["atmcmc"]["alpha_opt"].get<double>() == doctest::Approx(0.439).epsilon(0.005));
  CHECK(summary["rwmh"]["alpha_opt"].get<double>() == doctest::Approx(0.234).epsilon(0.005));
  check_idempotent(c, {"scaling_curves.csv", "scaling_summary.json", "metadata.json"});
}

TEST_CASE("drift-check and moments-check write reports") {
  const auto dir = scratch("drift");
  const auto c = parse_with_out(
      "[experiment]\nkind = drift-check\nseed = 2\n[target]\nd = 3\n[kernel]\nkind = atmcmc\n"
      "[drift]\nprobes = 0, 10\nsamples = 2000\n",
      dir);
  tmcmc::run_experiment(c);
  const auto report = nlohmann::json::parse(slurp(dir / "drift_report.json"));
  REQUIRE(report["probes"].size() == 2);
  CHECK(report["probes"][1]["estimate"].get<double>() < 1.0);
  check_idempotent(c, {"drift_report.json", "metadata.json"});

  const auto mdir = scratch("moments");
  const auto m = parse_with_out(
      "[experiment]\nkind = moments-check\nseed = 2\n[moments]\nsamples = 10000\n", mdir);
  tmcmc::run_experiment(m);
  const auto moments = nlohmann::json::parse(slurp(mdir / "moments.json"));
  CHECK(moments["M"] == 10000);
  CHECK(moments["M1_score_pow8"]["estimate"].get<double>() > 0.0);
  check_idempotent(m, {"moments.json", "metadata.json"});
}

TEST_CASE("bad inputs are rejected before work starts") {
  auto c = tmcmc::parse_config("[experiment]\nkind = scaling-curves\nseed = 0\n");
  CHECK_THROWS_AS(tmcmc::run_experiment(c), tmcmc::ConfigError);

  const auto blocker = scratch("blocker");
  { std::ofstream(blocker) << "x"; }
  c.out = (blocker / "sub").string();
  CHECK_THROWS_WITH(tmcmc::run_experiment(c), doctest::Contains("cannot create output directory"));

  CHECK_THROWS_AS(tmcmc::load_config(scratch("missing") / "none.cfg"), tmcmc::ConfigError);
  const auto bad = scratch("badmeta.json");
  { std::ofstream(bad) << "{\"seed\": 1}"; }
  CHECK_THROWS_WITH(tmcmc::load_config(bad), doctest::Contains("config_text"));
}

TEST_CASE("format_real keeps 17 significant digits") {
  CHECK(tmcmc::format_real(0.1) == "0.10000000000000001");
  CHECK(tmcmc::format_real(2.0) == "2");
  CHECK(std::stod(tmcmc::format_real(1.0 / 3.0)) == 1.0 / 3.0);
}
