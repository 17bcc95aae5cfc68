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

#include "liouvpt/scans.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace liouvpt {

namespace {

double min_eigenvalue(const DensityMatrix& rho) {
  return Eigen::SelfAdjointEigenSolver<Operator>(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TheoremScan theorem_scan(const ModelSpec& model, const std::vector<double>& grid) {
  TheoremScan out;
  out.grid = grid;
  std::vector<double> e2, e4, eoff, ediag, eodd;
  const auto base = model.perturbative(grid.back());
  for (double c : grid) {
    const auto p = base.with_coupling(c);
    const SuperOperator full = p.generator(c, true);
    const DensityMatrix exact = exact_steady_state(full);
    const DensityMatrix me2 = exact_steady_state(p.generator(c, false));
    const DensityMatrix w4 = steady_state(p, 2, true).rho;

    const Operator err = me2 - exact;
    const Operator diag = err.diagonal().asDiagonal();
    e2.push_back(err.norm());
    e4.push_back((w4 - exact).norm());
    ediag.push_back(diag.norm());
    eodd.push_back((err - diag).norm());

    const auto spec = assemble_spectrum(p, 2, true);
    const auto ex = spectral_decompose(full);
    const auto match = match_eigenvalues(spec.decomposition.eigenvalues, ex.eigenvalues);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < spec.decomposition.size(); ++k) {
      if (spec.origin[k].degenerate) continue;
      worst = std::max(worst, std::abs(spec.decomposition.eigenvalues(k) - ex.eigenvalues(match[k])));
    }
    eoff.push_back(worst);
  }
  out.steady_2me = order_scan(grid, e2);
  out.steady_w4 = order_scan(grid, e4);
  out.offdiag_eigen = order_scan(grid, eoff);
  out.diagonal_part = order_scan(grid, ediag);
  out.offdiag_part = order_scan(grid, eodd);
  return out;
}

PositivityScan positivity_scan(const ModelSpec& model, const std::vector<double>& grid) {
  PositivityScan out;
  out.grid = grid;
  std::vector<double> naive_mag, corrected_mag;
  const auto base = model.perturbative(grid.back());
  for (double c : grid) {
    const auto p = base.with_coupling(c);
    out.naive_min.push_back(min_eigenvalue(steady_state(p, 2, false).rho));
    out.corrected_min.push_back(min_eigenvalue(steady_state(p, 2, true).rho));
    out.exact_min.push_back(min_eigenvalue(exact_steady_state(p.generator(c, true))));
    naive_mag.push_back(std::abs(out.naive_min.back()));
    corrected_mag.push_back(std::abs(out.corrected_min.back()));
  }
  out.naive_scan = order_scan(grid, naive_mag);
  out.corrected_scan = order_scan(grid, corrected_mag);
  return out;
}

TimeScan time_scan(const ModelSpec& model, const std::vector<double>& grid) {
  TimeScan out;
  out.grid = grid;
  const double c_max = *std::max_element(grid.begin(), grid.end());
  const auto base = model.perturbative(c_max);
  const double scale = slowest_relaxation_rate(base);
  out.t_short = 0.05 / (c_max * c_max * max_second_order_rate(base));

  const auto d = base.dim();
  DensityMatrix rho0 = DensityMatrix::Zero(d, d);
  rho0(d - 1, d - 1) = 1.0;
  IntegrateOptions tight;
  tight.abs_tol = 1e-15;
  tight.rel_tol = 1e-14;
  IntegrateOptions late;
  late.abs_tol = 1e-12;
  late.rel_tol = 1e-12;

  std::vector<double> short_err, late_err;
  for (double c : grid) {
    const auto p = base.with_coupling(c);
    const auto g = TimeDependentGenerator::from_perturbative(p, true);
    const auto series = neumann_propagate(g, rho0, out.t_short, 2);
    const auto direct = integrate(g, rho0, out.t_short, tight);
    short_err.push_back((series.rho - direct.back()).norm());

    const double t_late = 10.0 / (c * c * scale);
    const auto a = integrate(TimeDependentGenerator::constant(p.generator(c, false)), rho0, t_late, late);
    const auto b = integrate(TimeDependentGenerator::constant(p.generator(c, true)), rho0, t_late, late);
    late_err.push_back((a.back() - b.back()).norm());
  }
  out.short_time = order_scan(grid, short_err);
  out.late_time = order_scan(grid, late_err);
  return out;
}

}  // namespace liouvpt
