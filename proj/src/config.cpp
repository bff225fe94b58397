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

#include "tmcmc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace tmcmc {
namespace {

struct Entry {
  std::string value;
  int line;
};

struct Section {
  int line = 0;
  std::map<std::string, Entry> entries;
};

using Document = std::map<std::string, Section>;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream in(s);
  while (std::getline(in, current, sep)) parts.push_back(trim(current));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

Document lex(std::string_view text) {
  Document doc;
  std::string current;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      if (current.empty()) throw ConfigError(line_no, "", "empty section name");
      if (doc.contains(current)) {
        throw ConfigError(line_no, current, "duplicate section [" + current + "]");
      }
      doc[current].line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    if (current.empty()) throw ConfigError(line_no, "", "key outside of any [section]");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, current, "missing key name");
    auto& section = doc[current];
    if (section.entries.contains(key)) {
      throw ConfigError(line_no, current + "." + key,
                        "duplicate key '" + key + "' (first set on line " +
                            std::to_string(section.entries[key].line) + ")");
    }
    section.entries[key] = {value, line_no};
  }
  return doc;
}

double to_double(const std::string& text, int line, const std::string& field) {
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError(line, field, "expected a finite number, got '" + text + "'");
  }
  return value;
}

std::int64_t to_int(const std::string& text, int line, const std::string& field) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(line, field, "expected an integer, got '" + text + "'");
  }
  return value;
}

std::uint64_t to_uint(const std::string& text, int line, const std::string& field) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(line, field, "expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

KernelKind to_kernel(const std::string& text, int line, const std::string& field) {
  if (auto kind = parse_kernel_kind(text)) return *kind;
  throw ConfigError(line, field, "unknown kernel '" + text + "' (atmcmc, rwmh, atmcmc_scaled)");
}

// Typed access to one section, tracking which keys were consumed.
class SectionReader {
 public:
  SectionReader(const Section* section, std::string name)
      : section_(section), name_(std::move(name)) {}

  bool present() const { return section_ != nullptr; }
  int line() const { return section_ ? section_->line : 0; }

  const Entry* find(const std::string& key) {
    if (!section_) return nullptr;
    const auto it = section_->entries.find(key);
    if (it == section_->entries.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  std::string field(const std::string& key) const { return name_ + "." + key; }

  void get(const std::string& key, double& out) {
    if (const Entry* e = find(key)) out = to_double(e->value, e->line, field(key));
  }
  void get(const std::string& key, std::int64_t& out) {
    if (const Entry* e = find(key)) out = to_int(e->value, e->line, field(key));
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const Entry* e = find(key)) out = to_uint(e->value, e->line, field(key));
  }
  void get(const std::string& key, std::string& out) {
    if (const Entry* e = find(key)) out = e->value;
  }
  void get(const std::string& key, KernelKind& out) {
    if (const Entry* e = find(key)) out = to_kernel(e->value, e->line, field(key));
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (const Entry* e = find(key)) {
      out.clear();
      for (const auto& part : split(e->value, ',')) out.push_back(to_double(part, e->line, field(key)));
    }
  }
  void get(const std::string& key, std::vector<std::int64_t>& out) {
    if (const Entry* e = find(key)) {
      out.clear();
      for (const auto& part : split(e->value, ',')) out.push_back(to_int(part, e->line, field(key)));
    }
  }
  void get(const std::string& key, std::vector<KernelKind>& out) {
    if (const Entry* e = find(key)) {
      out.clear();
      for (const auto& part : split(e->value, ',')) out.push_back(to_kernel(part, e->line, field(key)));
    }
  }

  int line_of(const std::string& key) const {
    if (!section_) return 0;
    const auto it = section_->entries.find(key);
    return it == section_->entries.end() ? section_->line : it->second.line;
  }

  void reject_unknown() const {
    if (!section_) return;
    for (const auto& [key, entry] : section_->entries) {
      if (!used_.contains(key)) {
        throw ConfigError(entry.line, field(key),
                          "unknown key '" + key + "' in section [" + name_ + "]");
      }
    }
  }

 private:
  const Section* section_;
  std::string name_;
  std::set<std::string> used_;
};

std::vector<std::string> sections_for(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::sample: return {"experiment", "target", "kernel", "run"};
    case ExperimentKind::bench_table: return {"experiment", "target", "grid", "run"};
    case ExperimentKind::ks_experiment: return {"experiment", "target", "ks"};
    case ExperimentKind::scaling_curves: return {"experiment", "target", "scaling"};
    case ExperimentKind::drift_check: return {"experiment", "target", "kernel", "drift"};
    case ExperimentKind::moments_check: return {"experiment", "target", "moments"};
  }
  return {};
}

bool needs_target_dimension(ExperimentKind kind) {
  // Moments are per component, so the dimension plays no part there.
  return kind != ExperimentKind::bench_table && kind != ExperimentKind::scaling_curves &&
         kind != ExperimentKind::moments_check;
}

// Field-level checks shared by parse_config and validate; `line_of` maps a
// field name to its source line (0 when it came from the command line).
template <typename LineOf>
void check(const ExperimentConfig& c, LineOf&& line_of, bool require_out) {
  auto fail = [&](const std::string& field, const std::string& message) {
    throw ConfigError(line_of(field), field, message);
  };
  auto positive = [&](double v, const std::string& field) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(field, "must be positive and finite");
  };
  auto check_start = [&](const std::vector<double>& x0, std::int64_t d, const std::string& field) {
    if (x0.empty()) fail(field, "must not be empty");
    if (x0.size() != 1 && static_cast<std::int64_t>(x0.size()) != d) {
      fail(field, "must have 1 or d = " + std::to_string(d) + " values");
    }
  };

  if (require_out && c.out.empty()) fail("experiment.out", "output directory is required (config or --out)");
  if (c.target.component != "gaussian") {
    fail("target.component", "unknown component '" + c.target.component + "' (gaussian)");
  }
  positive(c.target.variance, "target.variance");
  if (needs_target_dimension(c.kind) && c.target.d < 1) {
    fail("target.d", "must satisfy d >= 1, got " + std::to_string(c.target.d));
  }

  const bool uses_kernel = c.kind == ExperimentKind::sample || c.kind == ExperimentKind::drift_check;
  if (uses_kernel) {
    positive(c.kernel.l, "kernel.l");
    if (c.kernel.kind == KernelKind::atmcmc_scaled) {
      if (static_cast<std::int64_t>(c.kernel.c.size()) != c.target.d) {
        fail("kernel.c", "atmcmc_scaled needs d = " + std::to_string(c.target.d) + " values");
      }
      for (double v : c.kernel.c) positive(v, "kernel.c");
      if (std::adjacent_find(c.kernel.c.begin(), c.kernel.c.end(), std::not_equal_to<>()) ==
          c.kernel.c.end()) {
        fail("kernel.c", "entries must not all be equal");
      }
    } else if (!c.kernel.c.empty()) {
      fail("kernel.c", "only valid for kind = atmcmc_scaled");
    }
  }

  switch (c.kind) {
    case ExperimentKind::sample:
      if (c.run.n_iter < 1) fail("run.n_iter", "must be >= 1");
      if (c.run.thin < 1) fail("run.thin", "must be >= 1");
      if (c.run.record_coords < 0 || c.run.record_coords > c.target.d) {
        fail("run.record_coords", "must lie in [0, d]");
      }
      check_start(c.run.x0, c.target.d, "run.x0");
      break;
    case ExperimentKind::bench_table:
      if (c.run.n_iter < 1) fail("run.n_iter", "must be >= 1");
      if (c.run.x0.size() != 1) fail("run.x0", "bench-table takes a single broadcast value");
      if (c.grid.cells.empty()) fail("grid.cells", "must not be empty");
      if (c.grid.kernels.empty()) fail("grid.kernels", "must not be empty");
      for (const auto& cell : c.grid.cells) {
        if (cell.d < 1) fail("grid.cells", "every d must satisfy d >= 1");
        positive(cell.l, "grid.cells");
      }
      for (auto k : c.grid.kernels) {
        if (k == KernelKind::atmcmc_scaled) fail("grid.kernels", "atmcmc_scaled is not a grid kernel");
      }
      break;
    case ExperimentKind::ks_experiment:
      if (c.ks.kernels.size() != 2) fail("ks.kernels", "exactly two kernels are compared");
      for (auto k : c.ks.kernels) {
        if (k == KernelKind::atmcmc_scaled) fail("ks.kernels", "atmcmc_scaled is not supported here");
      }
      positive(c.ks.l, "ks.l");
      if (c.ks.chains < 2) fail("ks.chains", "must be >= 2");
      if (c.ks.horizon < 1) fail("ks.horizon", "must be >= 1");
      check_start(c.ks.x0, c.target.d, "ks.x0");
      if (c.ks.coords.empty()) fail("ks.coords", "must not be empty");
      for (auto k : c.ks.coords) {
        if (k < 1 || k > c.target.d) fail("ks.coords", "coordinates are 1-based and must be <= d");
      }
      break;
    case ExperimentKind::scaling_curves:
      positive(c.scaling.fisher_info, "scaling.fisher_info");
      if (c.scaling.points < 2) fail("scaling.points", "must be >= 2");
      positive(c.scaling.l_min, "scaling.l_min");
      if (!(c.scaling.l_max > c.scaling.l_min)) fail("scaling.l_max", "must exceed l_min");
      if (!(c.scaling.abs_tol > 0.0) || c.scaling.abs_tol > 1e-8) {
        fail("scaling.abs_tol", "must lie in (0, 1e-8]");
      }
      break;
    case ExperimentKind::drift_check:
      if (!(c.drift.s > 0.0 && c.drift.s <= 1.0)) fail("drift.s", "must lie in (0, 1]");
      if (c.drift.probes.empty()) fail("drift.probes", "must not be empty");
      if (c.drift.samples < 1000) fail("drift.samples", "must be >= 1000");
      break;
    case ExperimentKind::moments_check:
      if (c.moments.samples < 8) fail("moments.samples", "must be >= 8");
      break;
  }
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& values, F&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format(values[i]);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(int line, std::string field, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (field.empty() ? std::string() : field + ": ") + message),
      line_(line),
      field_(std::move(field)) {}

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::sample: return "sample";
    case ExperimentKind::bench_table: return "bench-table";
    case ExperimentKind::ks_experiment: return "ks-experiment";
    case ExperimentKind::scaling_curves: return "scaling-curves";
    case ExperimentKind::drift_check: return "drift-check";
    case ExperimentKind::moments_check: return "moments-check";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view text) {
  for (auto kind : {ExperimentKind::sample, ExperimentKind::bench_table,
                    ExperimentKind::ks_experiment, ExperimentKind::scaling_curves,
                    ExperimentKind::drift_check, ExperimentKind::moments_check}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::vector<GridCell> default_bench_cells() {
  return {{2, 2.4},   {2, 6},   {2, 10},  {5, 2.4},   {5, 6},   {5, 10},  {10, 2.4},
          {10, 6},    {10, 10}, {100, 2.4}, {100, 6}, {200, 2.4}, {200, 6}};
}

ExperimentConfig parse_config(std::string_view text) {
  const Document doc = lex(text);
  const auto section = [&doc](const std::string& name) -> const Section* {
    const auto it = doc.find(name);
    return it == doc.end() ? nullptr : &it->second;
  };

  ExperimentConfig c;
  SectionReader experiment(section("experiment"), "experiment");
  if (!experiment.present()) throw ConfigError(0, "experiment", "missing [experiment] section");
  const Entry* kind = experiment.find("kind");
  if (!kind) throw ConfigError(experiment.line(), "experiment.kind", "missing required key");
  const auto parsed_kind = parse_experiment_kind(kind->value);
  if (!parsed_kind) {
    throw ConfigError(kind->line, "experiment.kind",
                      "unknown experiment '" + kind->value +
                          "' (sample, bench-table, ks-experiment, scaling-curves, drift-check, "
                          "moments-check)");
  }
  c.kind = *parsed_kind;
  const Entry* seed = experiment.find("seed");
  if (!seed) throw ConfigError(experiment.line(), "experiment.seed", "missing required key");
  c.seed = to_uint(seed->value, seed->line, "experiment.seed");
  experiment.get("out", c.out);
  std::uint64_t threads = 0;
  experiment.get("threads", threads);
  c.threads = static_cast<unsigned>(threads);

  const auto allowed = sections_for(c.kind);
  for (const auto& [name, sec] : doc) {
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
      throw ConfigError(sec.line, name,
                        "section [" + name + "] is not used by experiment '" +
                            std::string(to_string(c.kind)) + "'");
    }
  }

  SectionReader target(section("target"), "target");
  target.get("component", c.target.component);
  target.get("variance", c.target.variance);
  if (needs_target_dimension(c.kind)) {
    if (!target.find("d")) throw ConfigError(target.line(), "target.d", "missing required key");
    target.get("d", c.target.d);
  }

  SectionReader kernel(section("kernel"), "kernel");
  kernel.get("kind", c.kernel.kind);
  kernel.get("l", c.kernel.l);
  kernel.get("c", c.kernel.c);

  SectionReader run(section("run"), "run");
  run.get("n_iter", c.run.n_iter);
  run.get("x0", c.run.x0);
  if (c.kind == ExperimentKind::sample) {
    run.get("thin", c.run.thin);
    run.get("record_coords", c.run.record_coords);
  }

  SectionReader grid(section("grid"), "grid");
  c.grid.cells = default_bench_cells();
  if (const Entry* cells = grid.find("cells")) {
    c.grid.cells.clear();
    for (const auto& item : split(cells->value, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        throw ConfigError(cells->line, "grid.cells", "expected 'd:l' pairs, got '" + item + "'");
      }
      c.grid.cells.push_back({to_int(trim(item.substr(0, colon)), cells->line, "grid.cells"),
                              to_double(trim(item.substr(colon + 1)), cells->line, "grid.cells")});
    }
  }
  grid.get("kernels", c.grid.kernels);

  SectionReader ks(section("ks"), "ks");
  ks.get("kernels", c.ks.kernels);
  ks.get("l", c.ks.l);
  ks.get("chains", c.ks.chains);
  ks.get("horizon", c.ks.horizon);
  ks.get("x0", c.ks.x0);
  ks.get("coords", c.ks.coords);

  SectionReader scaling(section("scaling"), "scaling");
  const bool explicit_fisher = scaling.find("fisher_info") != nullptr;
  scaling.get("fisher_info", c.scaling.fisher_info);
  scaling.get("points", c.scaling.points);
  scaling.get("l_min", c.scaling.l_min);
  scaling.get("l_max", c.scaling.l_max);
  scaling.get("abs_tol", c.scaling.abs_tol);

  SectionReader drift(section("drift"), "drift");
  drift.get("s", c.drift.s);
  drift.get("probes", c.drift.probes);
  drift.get("samples", c.drift.samples);

  SectionReader moments(section("moments"), "moments");
  moments.get("samples", c.moments.samples);

  for (const auto* reader : {&experiment, &target, &kernel, &run, &grid, &ks, &scaling, &drift, &moments}) {
    reader->reject_unknown();
  }

  const auto line_of = [&](const std::string& field) {
    const auto dot = field.find('.');
    const std::string sec = field.substr(0, dot);
    const std::string key = dot == std::string::npos ? std::string() : field.substr(dot + 1);
    for (const auto* reader : {&experiment, &target, &kernel, &run, &grid, &ks, &scaling, &drift, &moments}) {
      if (reader->field("") == sec + ".") return reader->line_of(key);
    }
    return 0;
  };
  check(c, line_of, false);

  if (c.kind == ExperimentKind::scaling_curves) {
    if (!explicit_fisher && target.present()) c.scaling.fisher_info = 1.0 / c.target.variance;
    c.target = TargetConfig{};
  }
  return c;
}

void validate(const ExperimentConfig& config) {
  check(config, [](const std::string&) { return 0; }, true);
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream out;
  const auto kernels = [](const std::vector<KernelKind>& ks) {
    return join(ks, [](KernelKind k) { return std::string(to_string(k)); });
  };
  const auto doubles = [](const std::vector<double>& v) { return join(v, fmt_double); };

  out << "[experiment]\n"
      << "kind = " << to_string(c.kind) << "\n"
      << "seed = " << c.seed << "\n"
      << (c.out.empty() ? std::string() : "out = " + c.out + "\n")
      << "threads = " << c.threads << "\n";

  if (c.kind != ExperimentKind::scaling_curves) {
    out << "\n[target]\n"
        << "component = " << c.target.component << "\n"
        << "variance = " << fmt_double(c.target.variance) << "\n";
    if (needs_target_dimension(c.kind)) out << "d = " << c.target.d << "\n";
  }
  if (c.kind == ExperimentKind::sample || c.kind == ExperimentKind::drift_check) {
    out << "\n[kernel]\n"
        << "kind = " << to_string(c.kernel.kind) << "\n"
        << "l = " << fmt_double(c.kernel.l) << "\n";
    if (!c.kernel.c.empty()) out << "c = " << doubles(c.kernel.c) << "\n";
  }
  switch (c.kind) {
    case ExperimentKind::sample:
      out << "\n[run]\n"
          << "n_iter = " << c.run.n_iter << "\n"
          << "thin = " << c.run.thin << "\n"
          << "x0 = " << doubles(c.run.x0) << "\n"
          << "record_coords = " << c.run.record_coords << "\n";
      break;
    case ExperimentKind::bench_table:
      out << "\n[grid]\n"
          << "cells = "
          << join(c.grid.cells, [](const GridCell& g) { return std::to_string(g.d) + ":" + fmt_double(g.l); })
          << "\n"
          << "kernels = " << kernels(c.grid.kernels) << "\n"
          << "\n[run]\n"
          << "n_iter = " << c.run.n_iter << "\n"
          << "x0 = " << doubles(c.run.x0) << "\n";
      break;
    case ExperimentKind::ks_experiment:
      out << "\n[ks]\n"
          << "kernels = " << kernels(c.ks.kernels) << "\n"
          << "l = " << fmt_double(c.ks.l) << "\n"
          << "chains = " << c.ks.chains << "\n"
          << "horizon = " << c.ks.horizon << "\n"
          << "x0 = " << doubles(c.ks.x0) << "\n"
          << "coords = " << join(c.ks.coords, [](std::int64_t k) { return std::to_string(k); }) << "\n";
      break;
    case ExperimentKind::scaling_curves:
      out << "\n[scaling]\n"
          << "fisher_info = " << fmt_double(c.scaling.fisher_info) << "\n"
          << "points = " << c.scaling.points << "\n"
          << "l_min = " << fmt_double(c.scaling.l_min) << "\n"
          << "l_max = " << fmt_double(c.scaling.l_max) << "\n"
          << "abs_tol = " << fmt_double(c.scaling.abs_tol) << "\n";
      break;
    case ExperimentKind::drift_check:
      out << "\n[drift]\n"
          << "s = " << fmt_double(c.drift.s) << "\n"
          << "probes = " << doubles(c.drift.probes) << "\n"
          << "samples = " << c.drift.samples << "\n";
      break;
    case ExperimentKind::moments_check:
      out << "\n[moments]\n"
          << "samples = " << c.moments.samples << "\n";
      break;
  }
  return out.str();
}

Eigen::VectorXd expand_start(const std::vector<double>& x0, std::int64_t d, const char* field) {
  if (x0.size() == 1) return Eigen::VectorXd::Constant(d, x0.front());
  if (static_cast<std::int64_t>(x0.size()) != d) {
    throw ConfigError(0, field, "must have 1 or d values");
  }
  return Eigen::Map<const Eigen::VectorXd>(x0.data(), d);
}

}  // namespace tmcmc
