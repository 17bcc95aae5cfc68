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

#pragma once

#include "liouvpt/perturb.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace liouvpt {

/// t -> L(t), acting on column-stacked operators in a fixed basis.
struct TimeDependentGenerator {
  std::function<SuperOperator(double)> at;
  std::optional<SuperOperator> asymptote;
  /// Free Hamiltonian defining the interaction picture (same basis as L(t)).
  std::optional<Operator> free_hamiltonian;
  /// Largest second-order rate magnitude, already multiplied by c^2.
  double f2_max = 0.0;
  /// Set by constant(); lets propagators skip re-evaluating `at`.
  std::optional<SuperOperator> constant_value;

  static TimeDependentGenerator constant(const SuperOperator& l);
  /// Constant generator with the free part and rate hint taken from p, in the
  /// energy basis of p.
  static TimeDependentGenerator from_perturbative(const PerturbativeLiouvillian& p, bool include_l4 = true);

  SuperOperator operator()(double t) const { return constant_value ? *constant_value : at(t); }
};

// ---------------------------------------------------------------------------

struct NeumannOptions {
  int base_intervals = 16;  ///< coarsest trapezoid grid
  int max_levels = 8;       ///< Richardson table depth (grid doubles per level)
  double tol = 1e-13;       ///< stop when successive extrapolants agree to this
};

struct NeumannResult {
  DensityMatrix rho;
  double quadrature_error = 0.0;  ///< last Richardson correction
  int levels_used = 0;
  std::vector<std::string> warnings;
};

/// Interaction-picture Neumann series through `order` nested integrals
/// (0, 1 or 2), rotated back to the original picture. Requires a free
/// Hamiltonian on G. Attaches a warning when t * f2_max > 1.
NeumannResult neumann_propagate(const TimeDependentGenerator& g, const DensityMatrix& rho0, double t, int order,
                                const NeumannOptions& opt = {});

// ---------------------------------------------------------------------------

struct Trajectory {
  std::vector<double> t;
  std::vector<DensityMatrix> rho;
  double trace_drift = 0.0;  ///< max |tr rho - tr rho0| over samples
  std::size_t rhs_evaluations = 0;

  std::size_t size() const { return t.size(); }
  const DensityMatrix& back() const { return rho.back(); }
};

struct IntegrateOptions {
  enum class Method { Dopri5, Fehlberg78 };
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  Method method = Method::Fehlberg78;
  double initial_step = 1e-3;
  std::size_t max_steps = 5'000'000;  ///< between consecutive sample times
};

/// Adaptive explicit Runge-Kutta integration of d rho/dt = L(t) rho, sampled at
/// the ascending `times` (the first entry must be 0). Throws ConvergenceError
/// when the stepper stalls or exceeds max_steps.
Trajectory integrate(const TimeDependentGenerator& g, const DensityMatrix& rho0, const std::vector<double>& times,
                     const IntegrateOptions& opt = {});
/// Samples at t = 0 and t_end only.
Trajectory integrate(const TimeDependentGenerator& g, const DensityMatrix& rho0, double t_end,
                     const IntegrateOptions& opt = {});

/// Same stepper on a plain linear system dx/dt = A x of any size.
std::vector<CVector> integrate_linear(const SuperOperator& a, const CVector& x0, const std::vector<double>& times,
                                      const IntegrateOptions& opt = {});

/// CSV with header t,re_0_0,im_0_0,re_0_1,... (row-major entries).
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

// ---------------------------------------------------------------------------

/// rho(t) = sum_k exp(f_k t) o_k <o*_k, rho0>. Infinite t keeps only the zero
/// branch. rho0 must be in the basis the decomposition was built in.
DensityMatrix spectral_propagate(const SpectralDecomposition& s, const DensityMatrix& rho0, double t);

// ---------------------------------------------------------------------------

struct PositivityReport {
  double min_eigenvalue = 0.0;
  Eigen::Index worst_i = 0, worst_j = 0;
  cplx worst_residual = 0.0;  ///< rho_ii rho_jj - rho_ij rho_ji at the worst pair
  double trace_deviation = 0.0;
  double hermiticity_residue = 0.0;

  /// min eigenvalue and every pairwise residual above -tol.
  bool positive(double tol = 1e-10) const { return min_eigenvalue >= -tol && worst_residual.real() >= -tol; }
};

/// Audits rho, expressed in the energy basis. Throws InvalidInput when the
/// trace is farther than 1e-6 from one.
PositivityReport positivity_audit(const DensityMatrix& rho);

// ---------------------------------------------------------------------------

struct OrderScanResult {
  std::vector<double> grid;
  std::vector<double> magnitudes;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< RMS deviation of log magnitudes from the fit

  bool in_band(double lo, double hi) const { return slope >= lo && slope <= hi; }
};

/// n points from lo to hi, log-uniform, endpoints exact.
std::vector<double> geometric_grid(double lo, double hi, int n);

/// Least-squares slope of log magnitude against log c. Needs at least 5
/// strictly geometric grid points and strictly positive magnitudes.
OrderScanResult order_scan(const std::vector<double>& grid, const std::vector<double>& magnitudes);
OrderScanResult order_scan(const std::function<double(double)>& family, const std::vector<double>& grid);

// ---------------------------------------------------------------------------

struct IndeterminacyOptions {
  double kappa = 1.0;              ///< s(t) = 1 - exp(-kappa c^2 t)
  double horizon = 10.0;           ///< t* = horizon / (c^2 * slowest relaxation rate)
  std::vector<double> probe_fractions{0.1, 0.5, 1.0};  ///< residual probes at fraction * t*
  double stencil_step = 1e-2;      ///< finite-difference step, in units of 1/max Bohr frequency
  IntegrateOptions integrate;
};

struct IndeterminacyPoint {
  double c = 0.0;
  double t_star = 0.0;
  double residual_base = 0.0;     ///< max over probes of |d rho/dt - L rho|
  double residual_shifted = 0.0;  ///< same for rho + s c^2 delta
  double residual_difference = 0.0;  ///< max over probes of |R' - R|
  double state_difference = 0.0;  ///< |rho'(t*) - rho(t*)|
};

struct IndeterminacyReport {
  Operator delta_shape;  ///< energy basis
  bool default_shape = false;
  std::vector<IndeterminacyPoint> points;
  OrderScanResult residual_scan;  ///< expected slope >= 4
  OrderScanResult state_scan;     ///< expected slope near 2
};

/// |w_0><w_0| - |w_{d-1}><w_{d-1}| in the energy basis.
Operator default_delta_shape(Eigen::Index d);

/// For each c on the grid, integrates the second-order equation L0 + c^2 L2
/// of p from the maximally mixed state, perturbs the trajectory by
/// s(t) c^2 delta and measures both master-equation residuals with 5-point
/// central differences. delta (energy basis) must be traceless and diagonal;
/// pass std::nullopt for the default shape.
IndeterminacyReport indeterminacy_demo(const PerturbativeLiouvillian& p, std::optional<Operator> delta,
                                       const std::vector<double>& grid, const IndeterminacyOptions& opt = {});

}  // namespace liouvpt
