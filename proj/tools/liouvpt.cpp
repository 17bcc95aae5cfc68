// Copyright 2026 The liouvpt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// liouvpt: batch driver. Every command writes one JSON report carrying its
// configuration, results and acceptance bands; the exit code is 0 iff every
// band passes, 1 when a band fails and 2 on invalid input or library errors.

#include "liouvpt/dynamics.hpp"
#include "liouvpt/models.hpp"
#include "liouvpt/perturb.hpp"
#include "liouvpt/qbm.hpp"
#include "liouvpt/scans.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;
using namespace liouvpt;

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json to_json(const Operator& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const OrderScanResult& s) {
  return {{"grid", s.grid}, {"magnitudes", s.magnitudes}, {"slope", s.slope}, {"intercept", s.intercept},
          {"fit_residual", s.residual}};
}

json to_json(const PositivityReport& r) {
  return {{"min_eigenvalue", r.min_eigenvalue},
          {"worst_pair", {r.worst_i, r.worst_j}},
          {"worst_pair_residual", to_json(r.worst_residual)},
          {"trace_deviation", r.trace_deviation},
          {"hermiticity_residue", r.hermiticity_residue},
          {"positive", r.positive()}};
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Report {
 public:
  Report(std::string command, json config) : command_(std::move(command)), config_(std::move(config)) {}

  json& results() { return results_; }

  void band(const std::string& name, double value, double lo, double hi) {
    const bool pass = value >= lo && value <= hi;
    json b = {{"name", name}, {"value", value}};
    b["lo"] = std::isfinite(lo) ? json(lo) : json(nullptr);
    b["hi"] = std::isfinite(hi) ? json(hi) : json(nullptr);
    b["pass"] = pass;
    bands_.push_back(b);
    all_pass_ = all_pass_ && pass;
    std::cout << (pass ? "PASS " : "FAIL ") << name << " = " << value << '\n';
  }

  void check(const std::string& name, bool pass) {
    bands_.push_back({{"name", name}, {"pass", pass}});
    all_pass_ = all_pass_ && pass;
    std::cout << (pass ? "PASS " : "FAIL ") << name << '\n';
  }

  int write(const std::string& path) const {
    json out = {{"command", command_}, {"config", config_}, {"results", results_}, {"bands", bands_},
                {"pass", all_pass_}, {"timestamp", utc_timestamp()}};
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot write report " + path);
    f << out.dump(2) << '\n';
    return all_pass_ ? 0 : 1;
  }

 private:
  std::string command_;
  json config_;
  json results_ = json::object();
  json bands_ = json::array();
  bool all_pass_ = true;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

double model_coupling(const ModelSpec& m, std::optional<double> override_c) {
  if (override_c) return *override_c;
  if (!m.coupling) throw InvalidInput("model '" + m.name + "' has no coupling field and none was given");
  return *m.coupling;
}

json tolerance_config() {
  const auto tol = default_tolerances();
  return {{"hermiticity", tol.hermiticity}, {"trace", tol.trace}, {"eigen_residual", tol.eigen_residual}};
}

// ---------------------------------------------------------------------------

int cmd_spectrum(const std::string& model_path, int order, bool with_l4, const std::string& out) {
  const auto model = load_model(model_path);
  const double c = model_coupling(model, std::nullopt);
  Report rep("spectrum", {{"model", model_path}, {"order", order}, {"with_l4", with_l4}, {"coupling", c},
                          {"tolerances", tolerance_config()}});
  const auto p = model.perturbative(c);
  const auto spec = assemble_spectrum(p, order, with_l4);
  const SuperOperator full = p.generator(c, with_l4);
  const auto exact = spectral_decompose(full);
  const auto match = match_eigenvalues(spec.decomposition.eigenvalues, exact.eigenvalues);

  json branches = json::array();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < spec.decomposition.size(); ++k) {
    const cplx f = spec.decomposition.eigenvalues(k);
    const cplx fx = exact.eigenvalues(match[k]);
    const auto& o = spec.origin[k];
    worst = std::max(worst, std::abs(f - fx));
    json b = {{"eigenvalue", to_json(f)},
              {"sector", o.degenerate ? "diagonal" : "off_diagonal"},
              {"index", o.degenerate ? json({o.i}) : json({o.i, o.j})},
              {"exact_eigenvalue", to_json(fx)},
              {"eigenvalue_error", std::abs(f - fx)},
              {"eigen_operator_distance",
               branch_distance(spec.decomposition.right.col(k), exact.right.col(match[k]))}};
    branches.push_back(b);
  }
  rep.results()["branches"] = branches;
  rep.results()["max_eigenvalue_error"] = worst;
  rep.results()["used_l4"] = spec.used_l4;
  rep.results()["diagonal_sector_order0_only"] = spec.diagonal_sector_order0_only;
  rep.results()["flags"] = spec.flags;
  rep.results()["condition"] = spec.decomposition.condition;
  rep.band("decomposition_condition", spec.decomposition.condition, 1.0, default_tolerances().max_condition);
  return rep.write(out);
}

int cmd_theorem_scan(std::uint64_t seed, int dim, double c_min, double c_max, int points,
                     const std::optional<std::string>& model_path, const std::string& out) {
  if (points < 5) throw InvalidInput("theorem-scan: need at least 5 grid points, got " + std::to_string(points));
  const auto model = model_path ? load_model(*model_path) : synthetic_full_model(seed, dim);
  json config = {{"seed", seed}, {"dim", dim}, {"c_min", c_min}, {"c_max", c_max}, {"points", points}};
  config["model"] = model_path ? json(*model_path) : json(nullptr);
  config["tolerances"] = tolerance_config();
  Report rep("theorem-scan", config);
  const auto grid = geometric_grid(c_min, c_max, points);
  const auto scan = theorem_scan(model, grid);
  rep.results()["steady_state_2me"] = to_json(scan.steady_2me);
  rep.results()["steady_state_w4"] = to_json(scan.steady_w4);
  rep.results()["offdiag_eigenvalue"] = to_json(scan.offdiag_eigen);
  rep.results()["error_diagonal_part"] = to_json(scan.diagonal_part);
  rep.results()["error_offdiag_part"] = to_json(scan.offdiag_part);
  rep.band("slope_steady_state_2me", scan.steady_2me.slope, 1.8, 2.2);
  rep.band("slope_steady_state_w4", scan.steady_w4.slope, 3.8, kInf);
  rep.band("slope_offdiag_eigenvalue", scan.offdiag_eigen.slope, 3.8, kInf);
  return rep.write(out);
}

int cmd_qbm(const qbm::OhmicSpec& s, double cutoff_min, double cutoff_max, int points, const std::string& out) {
  if (!(cutoff_min >= 10.0 * s.omega)) {
    throw InvalidInput("qbm: cutoff-min " + qbm::format_double(cutoff_min) + " is below 10 omega = " +
                       qbm::format_double(10.0 * s.omega));
  }
  if (!(cutoff_max > cutoff_min)) throw InvalidInput("qbm: cutoff-max must exceed cutoff-min");
  if (points < 2) throw InvalidInput("qbm: need at least 2 grid points");
  const auto grid = geometric_grid(cutoff_min, cutoff_max, points);
  const auto rows = qbm::cutoff_scan(s, grid);
  {
    std::ofstream f(out);
    if (!f) throw InvalidInput("cannot write " + out);
    qbm::write_cutoff_csv(rows, f);
  }
  const auto sum = qbm::summarize(s, rows);
  Report rep("qbm", {{"gamma0", s.gamma0}, {"temperature", s.temperature}, {"cutoff_min", cutoff_min},
                     {"cutoff_max", cutoff_max}, {"points", points}, {"omega", s.omega}, {"mass", s.mass},
                     {"csv", out}});
  rep.results()["mixed_log_slope"] = sum.mixed_log_slope;
  rep.results()["expected_log_slope"] = sum.expected_log_slope;
  rep.results()["lambda_heisenberg"] = optional_number(sum.lambda_heisenberg);
  rep.results()["lambda_negative"] = optional_number(sum.lambda_negative);
  rep.results()["exact_max_decade_variation"] = sum.exact_max_decade_variation;
  rep.band("exact_sxx_variation_per_decade", sum.exact_max_decade_variation, 0.0, 0.01);
  rep.band("mixed_slope_relative_error",
           std::abs(sum.mixed_log_slope - sum.expected_log_slope) / std::abs(sum.expected_log_slope), 0.0, 0.05);
  rep.check("heisenberg_threshold_found", sum.lambda_heisenberg.has_value());
  return rep.write(out + ".json");
}

int cmd_positivity(const std::string& model_path, double c, const std::string& out) {
  const auto model = load_model(model_path);
  Report rep("positivity", {{"model", model_path}, {"c", c}, {"tolerances", tolerance_config()}});
  const auto p = model.perturbative(c);
  const auto naive = steady_state(p, 2, false);
  const auto corrected = steady_state(p, 2, true);
  const DensityMatrix exact = exact_steady_state(p.generator(c, true));
  const auto rn = positivity_audit(naive.rho);
  const auto rc = positivity_audit(corrected.rho);
  const auto rx = positivity_audit(exact);
  rep.results()["naive_order2"] = to_json(rn);
  rep.results()["naive_order2"]["diagonal_sector_order0_only"] = naive.diagonal_sector_order0_only;
  rep.results()["corrected_order2"] = to_json(rc);
  rep.results()["corrected_order2"]["diagonal_sector_order0_only"] = corrected.diagonal_sector_order0_only;
  rep.results()["exact"] = to_json(rx);
  rep.results()["naive_negative"] = rn.min_eigenvalue < 0.0;
  rep.band("exact_min_eigenvalue", rx.min_eigenvalue, -1e-10, kInf);
  return rep.write(out);
}

int cmd_indeterminacy(const std::string& model_path, double c, double c_min, int points, double t_end,
                      const std::string& out) {
  if (points < 5) throw InvalidInput("indeterminacy: need at least 5 grid points, got " + std::to_string(points));
  const auto model = load_model(model_path);
  Report rep("indeterminacy", {{"model", model_path}, {"c", c}, {"c_min", c_min}, {"points", points},
                               {"t_end", t_end}, {"tolerances", tolerance_config()}});
  const auto grid = geometric_grid(c_min, c, points);
  IndeterminacyOptions opt;
  opt.horizon = t_end;
  const auto r = indeterminacy_demo(model.perturbative(c), std::nullopt, grid, opt);
  rep.results()["delta_shape"] = to_json(r.delta_shape);
  rep.results()["default_shape"] = r.default_shape;
  json pts = json::array();
  for (const auto& pt : r.points) {
    pts.push_back({{"c", pt.c},
                   {"t_star", pt.t_star},
                   {"residual_base", pt.residual_base},
                   {"residual_shifted", pt.residual_shifted},
                   {"residual_difference", pt.residual_difference},
                   {"state_difference", pt.state_difference}});
  }
  rep.results()["points"] = pts;
  rep.results()["residual_difference_scan"] = to_json(r.residual_scan);
  rep.results()["state_difference_scan"] = to_json(r.state_scan);
  rep.band("slope_residual_difference", r.residual_scan.slope, 3.8, kInf);
  rep.band("slope_state_difference", r.state_scan.slope, 1.8, 2.2);
  return rep.write(out);
}

int cmd_make_model(const std::string& kind, std::uint64_t seed, int dim, const std::string& out) {
  ModelSpec m;
  if (kind == "synthetic") {
    m = synthetic_full_model(seed, dim);
  } else if (kind == "amplitude-damping") {
    m = amplitude_damping_model(1.0);
  } else if (kind == "demo-positivity") {
    m = demo_positivity_model();
  } else {
    throw InvalidInput("make-model: unknown kind '" + kind + "'");
  }
  save_model(m, out);
  std::cout << "wrote " << m.name << " to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbative analysis of open-system master equations"};
  app.require_subcommand(1);

  std::string model, out;
  int order = 2;
  bool with_l4 = false;
  auto* spectrum = app.add_subcommand("spectrum", "Perturbative spectrum against dense diagonalization");
  spectrum->add_option("--model", model, "Model file (JSON)")->required();
  spectrum->add_option("--order", order, "Perturbative order")->check(CLI::IsMember({0, 2}));
  spectrum->add_flag("--with-l4", with_l4, "Include the fourth-order block");
  spectrum->add_option("--out", out, "Report path")->required();

  std::uint64_t seed = 1;
  int dim = 3, points = 9;
  double c_min = 0.02, c_max = 0.2;
  std::optional<std::string> scan_model;
  auto* theorem = app.add_subcommand("theorem-scan", "Steady-state and eigenvalue error slopes in c");
  theorem->add_option("--seed", seed, "Synthetic model seed");
  theorem->add_option("--dim", dim, "Synthetic model dimension");
  theorem->add_option("--c-min", c_min, "Smallest coupling");
  theorem->add_option("--c-max", c_max, "Largest coupling");
  theorem->add_option("--points", points, "Geometric grid points (at least 5)");
  theorem->add_option("--model", scan_model, "Use a model file instead of the synthetic model");
  theorem->add_option("--out", out, "Report path")->required();

  qbm::OhmicSpec ohmic;
  double cutoff_min = 100.0, cutoff_max = 1e5;
  int cutoff_points = 31;
  auto* qbm_cmd = app.add_subcommand("qbm", "Cutoff scan of the Brownian-motion stationary covariance");
  qbm_cmd->add_option("--gamma0", ohmic.gamma0, "Damping rate");
  qbm_cmd->add_option("--temp", ohmic.temperature, "Bath temperature");
  qbm_cmd->add_option("--cutoff-min", cutoff_min, "Smallest cutoff (at least 10 omega)");
  qbm_cmd->add_option("--cutoff-max", cutoff_max, "Largest cutoff");
  qbm_cmd->add_option("--points", cutoff_points, "Geometric grid points");
  qbm_cmd->add_option("--omega", ohmic.omega, "Oscillator frequency");
  qbm_cmd->add_option("--mass", ohmic.mass, "Oscillator mass");
  qbm_cmd->add_option("--out", out, "CSV path; the summary goes to <out>.json")->required();

  double c = 0.1;
  auto* positivity = app.add_subcommand("positivity", "Positivity audit of perturbative steady states");
  positivity->add_option("--model", model, "Model file (JSON)")->required();
  positivity->add_option("--c", c, "Coupling");
  positivity->add_option("--out", out, "Report path")->required();

  double t_end = 10.0;
  std::optional<double> ind_c_min;
  int ind_points = 5;
  auto* indeterminacy = app.add_subcommand("indeterminacy", "Residual and state shift from a second-order ambiguity");
  indeterminacy->add_option("--model", model, "Model file (JSON)")->required();
  indeterminacy->add_option("--c", c, "Largest coupling of the scan");
  indeterminacy->add_option("--c-min", ind_c_min, "Smallest coupling (default c / 10)");
  indeterminacy->add_option("--points", ind_points, "Geometric grid points (at least 5)");
  indeterminacy->add_option("--t-end", t_end, "Horizon in units of 1 / (c^2 slowest rate)");
  indeterminacy->add_option("--out", out, "Report path")->required();

  std::string kind = "synthetic";
  auto* make = app.add_subcommand("make-model", "Write a built-in model to a file");
  make->add_option("--kind", kind, "synthetic, amplitude-damping or demo-positivity");
  make->add_option("--seed", seed, "Synthetic model seed");
  make->add_option("--dim", dim, "Synthetic model dimension");
  make->add_option("--out", out, "Model path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*spectrum) return cmd_spectrum(model, order, with_l4, out);
    if (*theorem) return cmd_theorem_scan(seed, dim, c_min, c_max, points, scan_model, out);
    if (*qbm_cmd) return cmd_qbm(ohmic, cutoff_min, cutoff_max, cutoff_points, out);
    if (*positivity) return cmd_positivity(model, c, out);
    if (*indeterminacy) return cmd_indeterminacy(model, c, ind_c_min.value_or(c / 10.0), ind_points, t_end, out);
    if (*make) return cmd_make_model(kind, seed, dim, out);
  } catch (const liouvpt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
