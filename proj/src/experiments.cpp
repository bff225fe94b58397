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

#include "tmcmc/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "tmcmc/diagnostics.hpp"
#include "tmcmc/rng.hpp"
#include "tmcmc/samplers.hpp"
#include "tmcmc/scaling.hpp"
#include "tmcmc/targets.hpp"

namespace tmcmc {
namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

// Fixed stream-id tags so every experiment's streams are documented.
constexpr std::uint32_t kernel_tag(KernelKind kind) {
  switch (kind) {
    case KernelKind::atmcmc: return 1;
    case KernelKind::rwmh: return 2;
    case KernelKind::atmcmc_scaled: return 3;
  }
  return 0;
}
constexpr std::uint32_t kDriftTag = 16;
constexpr std::uint32_t kMomentsTag = 17;

class OutputDir {
 public:
  explicit OutputDir(const fs::path& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw std::runtime_error("cannot create output directory '" + dir_.string() + "'");
    }
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw std::runtime_error("failed to write '" + path.string() + "'");
    files_.push_back(path);
  }

  void write_json(const std::string& name, const ordered_json& j) { write(name, j.dump(2) + "\n"); }

  ExperimentOutput finish() const { return {dir_, files_}; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

ordered_json base_metadata(const ExperimentConfig& config) {
  ordered_json meta;
  meta["experiment"] = std::string(to_string(config.kind));
  meta["tool"] = "tmcmc";
  meta["version"] = TMCMC_VERSION;
  meta["rng_algorithm"] = kRngAlgorithm;
  meta["seed"] = config.seed;
  // The output location is supplied per invocation; leaving it out keeps the
  // sidecar identical wherever the run lands.
  ExperimentConfig portable = config;
  portable.out.clear();
  meta["config_text"] = to_config_text(portable);
  return meta;
}

TargetModel<double> make_target(const TargetConfig& t, std::int64_t d) {
  return TargetModel<double>::gaussian(d, t.variance);
}

ProposalSpec<double> make_spec(KernelKind kind, double l, std::int64_t d,
                               const std::vector<double>& c) {
  if (kind == KernelKind::atmcmc_scaled) {
    return ProposalSpec<double>::atmcmc_scaled(l, Eigen::Map<const Eigen::VectorXd>(c.data(), d));
  }
  return {kind, l, d, {}};
}

ExperimentOutput run_sample(const ExperimentConfig& config, OutputDir& out) {
  const auto d = config.target.d;
  const auto model = make_target(config.target, d);
  const auto spec = make_spec(config.kernel.kind, config.kernel.l, d, config.kernel.c);
  const Eigen::VectorXd x0 = expand_start(config.run.x0, d, "run.x0");
  const std::uint64_t stream_id = derive_stream_id(kernel_tag(spec.kind), 0);
  RngStream stream(config.seed, stream_id);
  RunOptions options;
  options.thin = config.run.thin;
  options.recorded_coords = config.run.record_coords == 0 ? -1 : config.run.record_coords;
  const ChainRun<double> run = run_chain(model, spec, x0, config.run.n_iter, stream, options);

  std::ostringstream csv;
  csv << "iter";
  for (Eigen::Index k = 0; k < run.trace.cols(); ++k) csv << ",coord_" << (k + 1);
  csv << ",accepted_cum\n";
  for (Eigen::Index r = 0; r < run.trace.rows(); ++r) {
    csv << run.trace_iter[static_cast<std::size_t>(r)];
    for (Eigen::Index k = 0; k < run.trace.cols(); ++k) csv << ',' << format_real(run.trace(r, k));
    csv << ',' << run.accepted_cum[static_cast<std::size_t>(r)] << '\n';
  }
  out.write("trace.csv", csv.str());

  ordered_json meta = base_metadata(config);
  meta["stream_id"] = stream_id;
  meta["kernel"] = std::string(to_string(spec.kind));
  meta["l"] = spec.l;
  meta["d"] = d;
  meta["n_iter"] = run.n_iter;
  meta["thin"] = run.thin;
  meta["accept_count"] = run.accept_count;
  meta["acceptance_rate"] = acceptance_rate(run);
  meta["continuous_draws"] = run.draws.continuous;
  meta["sign_bits"] = run.draws.sign_bits;
  out.write_json("metadata.json", meta);
  out.write_json("timing.json", ordered_json{{"chain_seconds", run.elapsed_seconds}});
  return out.finish();
}

ExperimentOutput run_bench_table(const ExperimentConfig& config, OutputDir& out) {
  struct Job {
    GridCell cell;
    KernelKind kind;
    std::uint64_t stream_id;
    ChainRun<double> run;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < config.grid.cells.size(); ++i) {
    for (KernelKind kind : config.grid.kernels) {
      jobs.push_back({config.grid.cells[i], kind, derive_stream_id(kernel_tag(kind), i), {}});
    }
  }
  parallel_for(jobs.size(), config.threads, [&](std::size_t j) {
    Job& job = jobs[j];
    const auto model = make_target(config.target, job.cell.d);
    const auto spec = make_spec(job.kind, job.cell.l, job.cell.d, {});
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(job.cell.d, config.run.x0.front());
    RngStream stream(config.seed, job.stream_id);
    job.run = run_chain(model, spec, x0, config.run.n_iter, stream, {config.run.n_iter + 1, 0});
  });

  std::ostringstream table;
  table << "d,l,kernel,acceptance_rate,n_iter,seed\n";
  std::ostringstream counts;
  counts << "d,l,kernel,n_iter,continuous_draws,sign_bits,continuous_per_iter\n";
  ordered_json streams = ordered_json::array();
  ordered_json timing = ordered_json::array();
  for (const Job& job : jobs) {
    table << job.cell.d << ',' << format_real(job.cell.l) << ',' << to_string(job.kind) << ','
          << format_real(acceptance_rate(job.run)) << ',' << job.run.n_iter << ',' << config.seed
          << '\n';
    counts << job.cell.d << ',' << format_real(job.cell.l) << ',' << to_string(job.kind) << ','
           << job.run.n_iter << ',' << job.run.draws.continuous << ',' << job.run.draws.sign_bits
           << ','
           << format_real(static_cast<double>(job.run.draws.continuous) /
                          static_cast<double>(job.run.n_iter))
           << '\n';
    streams.push_back({{"d", job.cell.d}, {"l", job.cell.l},
                       {"kernel", std::string(to_string(job.kind))}, {"stream_id", job.stream_id}});
    timing.push_back({{"d", job.cell.d}, {"l", job.cell.l},
                      {"kernel", std::string(to_string(job.kind))},
                      {"seconds", job.run.elapsed_seconds}});
  }
  out.write("bench_table.csv", table.str());
  out.write("draw_counts.csv", counts.str());

  ordered_json meta = base_metadata(config);
  meta["n_iter"] = config.run.n_iter;
  meta["streams"] = streams;
  out.write_json("metadata.json", meta);
  out.write_json("timing.json", ordered_json{{"runs", timing}});
  return out.finish();
}

ExperimentOutput run_ks(const ExperimentConfig& config, OutputDir& out) {
  const auto d = config.target.d;
  const auto model = make_target(config.target, d);
  const auto spec_a = make_spec(config.ks.kernels[0], config.ks.l, d, {});
  const auto spec_b = make_spec(config.ks.kernels[1], config.ks.l, d, {});
  const Eigen::VectorXd x0 = expand_start(config.ks.x0, d, "ks.x0");
  KsExperimentOptions options;
  options.chains = config.ks.chains;
  options.horizon = config.ks.horizon;
  options.seed = config.seed;
  options.threads = config.threads;
  options.coords.clear();
  for (auto k : config.ks.coords) options.coords.push_back(k - 1);
  const auto [a, b] = ks_experiment(model, spec_a, spec_b, x0, options);

  std::ostringstream csv;
  csv << "t,ks_" << to_string(a.kind) << ",ks_" << to_string(b.kind) << '\n';
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    csv << a.times[i] << ',' << format_real(a.ks_values[i]) << ',' << format_real(b.ks_values[i])
        << '\n';
  }
  out.write("ks_series.csv", csv.str());

  ordered_json meta = base_metadata(config);
  meta["d"] = d;
  meta["l"] = config.ks.l;
  meta["chains"] = config.ks.chains;
  meta["horizon"] = config.ks.horizon;
  meta["coords"] = config.ks.coords;
  meta["reference_cdf"] = a.reference;
  meta["streams"] = {
      {{"kernel", std::string(to_string(a.kind))}, {"stream_id_tag", 1}, {"chain_index", "0..L-1"}},
      {{"kernel", std::string(to_string(b.kind))}, {"stream_id_tag", 2}, {"chain_index", "0..L-1"}}};
  out.write_json("metadata.json", meta);
  return out.finish();
}

ExperimentOutput run_scaling(const ExperimentConfig& config, OutputDir& out) {
  QuadratureSpec quad;
  quad.abs_tol = config.scaling.abs_tol;
  const double fisher = config.scaling.fisher_info;
  const auto curve = scaling_curve(fisher, static_cast<int>(config.scaling.points),
                                   config.scaling.l_min, config.scaling.l_max, quad);
  std::ostringstream csv;
  csv << "l,h_rwmh,h_atmcmc,alpha_rwmh,alpha_atmcmc\n";
  for (const auto& p : curve) {
    csv << format_real(p.l) << ',' << format_real(p.h_rwmh) << ',' << format_real(p.h_atmcmc)
        << ',' << format_real(p.alpha_rwmh) << ',' << format_real(p.alpha_atmcmc) << '\n';
  }
  out.write("scaling_curves.csv", csv.str());

  ordered_json summary;
  summary["fisher_info"] = fisher;
  for (KernelKind kind : {KernelKind::rwmh, KernelKind::atmcmc}) {
    const ScalingResult r = optimize_scaling(kind, fisher, quad);
    summary[std::string(to_string(kind))] = {
        {"l_opt", r.l_opt}, {"h_at_opt", r.h_at_opt}, {"alpha_opt", r.alpha_opt}};
  }
  out.write_json("scaling_summary.json", summary);
  out.write_json("metadata.json", base_metadata(config));
  return out.finish();
}

ExperimentOutput run_drift(const ExperimentConfig& config, OutputDir& out) {
  const auto d = config.target.d;
  const auto model = make_target(config.target, d);
  const auto spec = make_spec(config.kernel.kind, config.kernel.l, d, config.kernel.c);
  ordered_json probes = ordered_json::array();
  for (std::size_t p = 0; p < config.drift.probes.size(); ++p) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    x[0] = config.drift.probes[p];
    const std::uint64_t stream_id = derive_stream_id(kDriftTag, p);
    RngStream stream(config.seed, stream_id);
    const DriftEstimate est = drift_ratio(model, spec, {config.drift.s}, x, config.drift.samples, stream);
    probes.push_back({{"probe_x1", config.drift.probes[p]},
                      {"v_family", "exp(s*|x_1|)"},
                      {"s", config.drift.s},
                      {"estimate", est.estimate},
                      {"stderr", est.std_error},
                      {"M", est.samples},
                      {"stream_id", stream_id}});
  }
  out.write_json("drift_report.json", ordered_json{{"kernel", std::string(to_string(spec.kind))},
                                                   {"l", spec.l},
                                                   {"d", d},
                                                   {"probes", probes}});
  out.write_json("metadata.json", base_metadata(config));
  return out.finish();
}

ExperimentOutput run_moments(const ExperimentConfig& config, OutputDir& out) {
  const auto model = make_target(config.target, config.target.d);
  const std::uint64_t stream_id = derive_stream_id(kMomentsTag, 0);
  RngStream stream(config.seed, stream_id);
  const RegularityMoments m = regularity_moments(model, config.moments.samples, stream);
  const auto describe = [](const MomentEstimate& e) {
    return ordered_json{{"estimate", e.value},
                        {"stderr", e.std_error},
                        {"nested_M_quarter_half_full", e.nested},
                        {"divergence_suspected_heuristic", e.divergence_suspected}};
  };
  ordered_json report;
  report["M"] = m.samples;
  report["stream_id"] = stream_id;
  report["M1_score_pow8"] = describe(m.m1);
  report["M2_curvature_pow4"] = describe(m.m2);
  out.write_json("moments.json", report);
  out.write_json("metadata.json", base_metadata(config));
  return out.finish();
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  validate(config);
  OutputDir out(config.out);
  switch (config.kind) {
    case ExperimentKind::sample: return run_sample(config, out);
    case ExperimentKind::bench_table: return run_bench_table(config, out);
    case ExperimentKind::ks_experiment: return run_ks(config, out);
    case ExperimentKind::scaling_curves: return run_scaling(config, out);
    case ExperimentKind::drift_check: return run_drift(config, out);
    case ExperimentKind::moments_check: return run_moments(config, out);
  }
  throw std::logic_error("unhandled experiment kind");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "--config", "cannot read '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (path.extension() == ".json") {
    ordered_json meta;
    try {
      meta = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(0, "--config", std::string("invalid metadata JSON: ") + e.what());
    }
    if (!meta.contains("config_text") || !meta["config_text"].is_string()) {
      throw ConfigError(0, "--config", "metadata has no config_text entry");
    }
    return parse_config(meta["config_text"].get<std::string>());
  }
  return parse_config(text);
}

}  // namespace tmcmc
