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

#include "liouvpt/dynamics.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace liouvpt {

namespace odeint = boost::numeric::odeint;

TimeDependentGenerator TimeDependentGenerator::constant(const SuperOperator& l) {
  hilbert_dim(l);
  TimeDependentGenerator g;
  g.constant_value = l;
  g.asymptote = l;
  g.at = [l](double) { return l; };
  return g;
}

TimeDependentGenerator TimeDependentGenerator::from_perturbative(const PerturbativeLiouvillian& p, bool include_l4) {
  auto g = constant(p.generator(p.coupling, include_l4));
  g.free_hamiltonian = Operator(p.basis.energies.cast<cplx>().asDiagonal());
  g.f2_max = p.coupling * p.coupling * max_second_order_rate(p);
  return g;
}

// ---------------------------------------------------------------------------
// Neumann series

namespace {

struct NeumannTerms {
  CVector v1, v2;
};

// Cumulative trapezoid of the nested interaction-picture integrals on n
// uniform intervals of [0, t]. a(s) is the interaction-picture perturbation.
NeumannTerms nested_trapezoid(const std::function<SuperOperator(double)>& a, const CVector& v0, double t, int n,
                              int order) {
  const double h = t / n;
  NeumannTerms out;
  out.v1 = CVector::Zero(v0.size());
  out.v2 = CVector::Zero(v0.size());
  if (order == 0 || t == 0.0) return out;
  SuperOperator a_prev = a(0.0);
  CVector f1_prev = a_prev * v0;
  CVector f2_prev = CVector::Zero(v0.size());  // a(0) v1(0) = 0
  for (int k = 1; k <= n; ++k) {
    const SuperOperator a_k = a(k * h);
    const CVector f1 = a_k * v0;
    const CVector v1_new = out.v1 + 0.5 * h * (f1_prev + f1);
    if (order >= 2) {
      const CVector f2 = a_k * v1_new;
      out.v2 += 0.5 * h * (f2_prev + f2);
      f2_prev = f2;
    }
    out.v1 = v1_new;
    f1_prev = f1;
  }
  return out;
}

}  // namespace

NeumannResult neumann_propagate(const TimeDependentGenerator& g, const DensityMatrix& rho0, double t, int order,
                                const NeumannOptions& opt) {
  if (!g.free_hamiltonian) throw InvalidInput("neumann_propagate: generator has no free Hamiltonian");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("neumann_propagate: t must be finite and nonnegative");
  if (order < 0 || order > 2) throw InvalidInput("neumann_propagate: order must be 0, 1 or 2");
  if (opt.base_intervals < 1 || opt.max_levels < 1) throw InvalidInput("neumann_propagate: bad quadrature options");

  const EnergyBasis basis = bohr_spectrum(*g.free_hamiltonian);
  const auto d = basis.dim();
  const auto n = d * d;
  if (rho0.rows() != d || rho0.cols() != d) throw InvalidInput("neumann_propagate: rho0 dimension mismatch");

  RVector w(n);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) w(vec_index(a, b, d)) = basis.omega(a, b);
  }
  const SuperOperator t_fwd = kron(basis.transform.transpose(), basis.transform.adjoint());
  const SuperOperator t_bwd = t_fwd.adjoint();
  const SuperOperator l0 = (-kI * w).asDiagonal();

  std::optional<SuperOperator> dl_const;
  if (g.constant_value) dl_const = t_fwd * *g.constant_value * t_bwd - l0;
  auto interaction = [&](double s) -> SuperOperator {
    const SuperOperator dl = dl_const ? *dl_const : SuperOperator(t_fwd * g(s) * t_bwd - l0);
    const CVector ph = (kI * w * s).array().exp().matrix();
    return ph.asDiagonal() * dl * ph.conjugate().asDiagonal();
  };

  const CVector v0 = vec(basis.to_energy(rho0));
  NeumannResult out;
  CVector v_int = v0;
  if (order > 0 && t > 0.0) {
    // Romberg table over the summed correction v1 + v2.
    std::vector<CVector> prev, cur;
    int intervals = opt.base_intervals;
    double err = std::numeric_limits<double>::infinity();
    CVector best;
    for (int level = 0; level < opt.max_levels; ++level, intervals *= 2) {
      const auto terms = nested_trapezoid(interaction, v0, t, intervals, order);
      cur.assign(1, terms.v1 + terms.v2);
      double factor = 4.0;
      for (std::size_t m = 0; m < prev.size(); ++m, factor *= 4.0) {
        cur.push_back(cur[m] + (cur[m] - prev[m]) / (factor - 1.0));
      }
      out.levels_used = level + 1;
      if (!prev.empty()) {
        err = (cur.back() - prev.back()).norm();
        best = cur.back();
        if (err <= opt.tol * std::max(1.0, best.norm())) break;
      } else {
        best = cur.back();
      }
      prev = cur;
    }
    out.quadrature_error = err;
    v_int += best;
  }
  const CVector back = (-kI * w * t).array().exp().matrix().asDiagonal() * v_int;
  out.rho = basis.from_energy(unvec(back));
  if (t * g.f2_max > 1.0) {
    std::ostringstream msg;
    msg << "t * f2_max = " << t * g.f2_max << " > 1: secular terms make the truncated series unreliable";
    out.warnings.push_back(msg.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time-ordered integration

namespace {

using State = std::vector<double>;

CVector unpack(const State& x) {
  return Eigen::Map<const CVector>(reinterpret_cast<const cplx*>(x.data()), static_cast<Eigen::Index>(x.size() / 2));
}

State pack(const CVector& v) {
  State x(static_cast<std::size_t>(2 * v.size()));
  Eigen::Map<CVector>(reinterpret_cast<cplx*>(x.data()), v.size()) = v;
  return x;
}

struct LinearRun {
  std::vector<double> t;
  std::vector<CVector> x;
  std::size_t evals = 0;
};

// Integrates dx/dt = A(t) x; `matrix` returns nullptr when A is constant and
// `constant` is used instead.
template <class Stepper>
LinearRun run(Stepper stepper, const SuperOperator* constant, const std::function<SuperOperator(double)>& matrix,
              const CVector& x0, const std::vector<double>& times, const IntegrateOptions& opt) {
  const auto n = x0.size();
  LinearRun out;
  auto rhs = [&](const State& x, State& dxdt, double t) {
    ++out.evals;
    const auto v = Eigen::Map<const CVector>(reinterpret_cast<const cplx*>(x.data()), n);
    auto res = Eigen::Map<CVector>(reinterpret_cast<cplx*>(dxdt.data()), n);
    if (constant) {
      res.noalias() = *constant * v;
    } else {
      const SuperOperator a = matrix(t);
      if (a.rows() != n || a.cols() != n) throw InvalidInput("integrate: generator dimension mismatch");
      res.noalias() = a * v;
    }
  };
  auto observer = [&](const State& x, double t) {
    out.t.push_back(t);
    out.x.push_back(unpack(x));
  };
  State x = pack(x0);
  try {
    odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), opt.initial_step, observer,
                            odeint::max_step_checker(static_cast<int>(std::min<std::size_t>(
                                opt.max_steps, static_cast<std::size_t>(std::numeric_limits<int>::max())))));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "integrate: stepper failed after " << out.evals << " right-hand-side evaluations, last sample t = "
        << (out.t.empty() ? 0.0 : out.t.back()) << ": " << e.what();
    throw ConvergenceError(msg.str());
  }
  return out;
}

LinearRun run_linear(const SuperOperator* constant, const std::function<SuperOperator(double)>& matrix,
                     const CVector& x0, const std::vector<double>& times, const IntegrateOptions& opt) {
  if (!(opt.abs_tol > 0.0) || !(opt.rel_tol > 0.0)) throw InvalidInput("integrate: tolerances must be positive");
  if (times.empty() || times.front() != 0.0) throw InvalidInput("integrate: sample times must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw InvalidInput("integrate: sample times must be strictly ascending");
  }
  if (opt.method == IntegrateOptions::Method::Dopri5) {
    return run(odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>()), constant,
               matrix, x0, times, opt);
  }
  return run(odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_fehlberg78<State>()), constant,
             matrix, x0, times, opt);
}

}  // namespace

Trajectory integrate(const TimeDependentGenerator& g, const DensityMatrix& rho0, const std::vector<double>& times,
                     const IntegrateOptions& opt) {
  if (rho0.rows() != rho0.cols()) throw InvalidInput("integrate: rho0 must be square");
  const SuperOperator* constant = g.constant_value ? &*g.constant_value : nullptr;
  if (constant && constant->rows() != rho0.size()) throw InvalidInput("integrate: generator dimension mismatch");
  if (!constant && !g.at) throw InvalidInput("integrate: generator has no callable");
  auto raw = run_linear(constant, g.at, vec(rho0), times, opt);
  Trajectory traj;
  traj.t = std::move(raw.t);
  traj.rhs_evaluations = raw.evals;
  const cplx tr0 = rho0.trace();
  for (const auto& x : raw.x) {
    traj.rho.push_back(unvec(x));
    traj.trace_drift = std::max(traj.trace_drift, std::abs(traj.rho.back().trace() - tr0));
  }
  return traj;
}

std::vector<CVector> integrate_linear(const SuperOperator& a, const CVector& x0, const std::vector<double>& times,
                                      const IntegrateOptions& opt) {
  if (a.rows() != x0.size() || a.cols() != x0.size()) throw InvalidInput("integrate_linear: dimension mismatch");
  return run_linear(&a, {}, x0, times, opt).x;
}

Trajectory integrate(const TimeDependentGenerator& g, const DensityMatrix& rho0, double t_end,
                     const IntegrateOptions& opt) {
  if (!(t_end > 0.0)) {
    Trajectory traj;
    traj.t = {0.0};
    traj.rho = {rho0};
    return traj;
  }
  return integrate(g, rho0, std::vector<double>{0.0, t_end}, opt);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const auto d = traj.rho.empty() ? Eigen::Index(0) : traj.rho.front().rows();
  out << "t";
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out << ",re_" << i << "_" << j << ",im_" << i << "_" << j;
  }
  out << '\n';
  const auto old = out.precision(17);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << traj.t[k];
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) out << ',' << traj.rho[k](i, j).real() << ',' << traj.rho[k](i, j).imag();
    }
    out << '\n';
  }
  out.precision(old);
}

// ---------------------------------------------------------------------------

DensityMatrix spectral_propagate(const SpectralDecomposition& s, const DensityMatrix& rho0, double t) {
  const auto n = s.eigenvalues.size();
  if (s.right.rows() != n || s.right.cols() != n || s.left.rows() != n || s.left.cols() != n || n == 0) {
    throw InvalidInput("spectral_propagate: incomplete decomposition");
  }
  if (rho0.size() != n) throw InvalidInput("spectral_propagate: rho0 dimension mismatch");
  if (!(t >= 0.0)) throw InvalidInput("spectral_propagate: t must be nonnegative");
  const CVector coeff = s.left * vec(rho0);
  if (std::isinf(t)) {
    const auto k = s.zero_branch();
    return unvec(CVector(s.right.col(k) * coeff(k)));
  }
  const CVector ev = (s.eigenvalues * t).array().exp().matrix();
  return unvec(CVector(s.right * ev.cwiseProduct(coeff)));
}

// ---------------------------------------------------------------------------

PositivityReport positivity_audit(const DensityMatrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw InvalidInput("positivity_audit: rho must be square");
  PositivityReport r;
  r.trace_deviation = std::abs(rho.trace() - 1.0);
  if (r.trace_deviation > 1e-6) {
    std::ostringstream msg;
    msg << "positivity_audit: trace deviates from 1 by " << r.trace_deviation;
    throw InvalidInput(msg.str());
  }
  r.hermiticity_residue = hermiticity_defect(rho);
  const Operator h = 0.5 * (rho + rho.adjoint());
  r.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Operator>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
  const auto d = rho.rows();
  bool first = true;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const cplx res = rho(i, i) * rho(j, j) - rho(i, j) * rho(j, i);
      if (first || res.real() < r.worst_residual.real()) {
        r.worst_residual = res;
        r.worst_i = i;
        r.worst_j = j;
        first = false;
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw InvalidInput("geometric_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double r = std::log(hi / lo) / (n - 1);
  for (int k = 0; k < n; ++k) g[k] = lo * std::exp(r * k);
  g.front() = lo;
  g.back() = hi;
  return g;
}

OrderScanResult order_scan(const std::vector<double>& grid, const std::vector<double>& magnitudes) {
  if (grid.size() < 5) throw InvalidInput("order_scan: need at least 5 grid points");
  if (magnitudes.size() != grid.size()) throw InvalidInput("order_scan: grid/magnitude length mismatch");
  for (double c : grid) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("order_scan: grid values must be positive");
  }
  const double ratio = std::log(grid[1] / grid[0]);
  if (!(ratio != 0.0)) throw InvalidInput("order_scan: grid is not strictly geometric");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (std::abs(std::log(grid[k] / grid[k - 1]) - ratio) > 1e-9 * std::abs(ratio)) {
      throw InvalidInput("order_scan: grid is not strictly geometric");
    }
  }
  for (std::size_t k = 0; k < magnitudes.size(); ++k) {
    if (!(magnitudes[k] > 0.0) || !std::isfinite(magnitudes[k])) {
      std::ostringstream msg;
      msg << "order_scan: nonpositive magnitude " << magnitudes[k] << " at c = " << grid[k];
      throw InvalidInput(msg.str());
    }
  }
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    a(k, 0) = std::log(grid[k]);
    a(k, 1) = 1.0;
    y(k) = std::log(magnitudes[k]);
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
  OrderScanResult r;
  r.grid = grid;
  r.magnitudes = magnitudes;
  r.slope = coef(0);
  r.intercept = coef(1);
  r.residual = std::sqrt((a * coef - y).squaredNorm() / static_cast<double>(n));
  return r;
}

OrderScanResult order_scan(const std::function<double(double)>& family, const std::vector<double>& grid) {
  std::vector<double> m;
  m.reserve(grid.size());
  for (double c : grid) m.push_back(family(c));
  return order_scan(grid, m);
}

// ---------------------------------------------------------------------------

Operator default_delta_shape(Eigen::Index d) {
  if (d < 2) throw InvalidInput("default_delta_shape: need d >= 2");
  Operator delta = Operator::Zero(d, d);
  delta(0, 0) = 1.0;
  delta(d - 1, d - 1) = -1.0;
  return delta;
}

IndeterminacyReport indeterminacy_demo(const PerturbativeLiouvillian& p, std::optional<Operator> delta,
                                       const std::vector<double>& grid, const IndeterminacyOptions& opt) {
  const auto d = p.dim();
  IndeterminacyReport report;
  report.default_shape = !delta.has_value();
  report.delta_shape = delta ? *delta : default_delta_shape(d);
  const Operator& shape = report.delta_shape;
  if (shape.rows() != d || shape.cols() != d) throw InvalidInput("indeterminacy_demo: delta has wrong dimension");
  const double scale = std::max(1.0, max_abs(shape));
  if (std::abs(shape.trace()) > 1e-12 * scale) throw InvalidInput("indeterminacy_demo: delta must be traceless");
  const Operator off = shape - Operator(shape.diagonal().asDiagonal());
  if (max_abs(off) > 1e-12 * scale) {
    throw InvalidInput("indeterminacy_demo: delta must be diagonal in the energy basis");
  }
  if (opt.probe_fractions.empty()) throw InvalidInput("indeterminacy_demo: no probe times");

  const double rate = slowest_relaxation_rate(p);
  const double wmax = std::max(1.0, p.basis.energies.maxCoeff() - p.basis.energies.minCoeff());
  const double h = opt.stencil_step / wmax;
  const DensityMatrix rho0 = Operator::Identity(d, d) / static_cast<double>(d);

  for (double c : grid) {
    IndeterminacyPoint pt;
    pt.c = c;
    const double c2 = c * c;
    pt.t_star = opt.horizon / (c2 * rate);
    const SuperOperator l = p.generator(c, false);
    const auto g = TimeDependentGenerator::constant(l);

    std::vector<double> probes;
    for (double f : opt.probe_fractions) probes.push_back(f * pt.t_star);
    std::sort(probes.begin(), probes.end());
    std::vector<double> times{0.0};
    for (double tp : probes) {
      if (tp - 2 * h <= times.back()) throw InvalidInput("indeterminacy_demo: probe stencils overlap");
      for (int k = -2; k <= 2; ++k) times.push_back(tp + k * h);
    }
    std::size_t star = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (times[k] == pt.t_star) star = k;
    }
    if (star == 0) {
      times.push_back(pt.t_star);
      std::sort(times.begin(), times.end());
      star = static_cast<std::size_t>(std::find(times.begin(), times.end(), pt.t_star) - times.begin());
    }
    const auto traj = integrate(g, rho0, times, opt.integrate);

    // The perturbed trajectory rho' = rho + s(t) c^2 delta on the same samples.
    auto s = [&](double t) { return 1.0 - std::exp(-opt.kappa * c2 * t); };
    std::vector<DensityMatrix> shifted(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) shifted[k] = traj.rho[k] + (s(traj.t[k]) * c2) * shape;

    auto residual = [&](const std::vector<DensityMatrix>& r, std::size_t centre) -> Operator {
      const Operator drho =
          (r[centre - 2] - 8.0 * r[centre - 1] + 8.0 * r[centre + 1] - r[centre + 2]) / (12.0 * h);
      return drho - apply_super(l, r[centre]);
    };
    for (double tp : probes) {
      const auto centre = static_cast<std::size_t>(
          std::min_element(traj.t.begin(), traj.t.end(),
                           [tp](double a, double b) { return std::abs(a - tp) < std::abs(b - tp); }) -
          traj.t.begin());
      const Operator r0 = residual(traj.rho, centre);
      const Operator r1 = residual(shifted, centre);
      pt.residual_base = std::max(pt.residual_base, r0.norm());
      pt.residual_shifted = std::max(pt.residual_shifted, r1.norm());
      pt.residual_difference = std::max(pt.residual_difference, Operator(r1 - r0).norm());
    }
    pt.state_difference = Operator(shifted[star] - traj.rho[star]).norm();
    report.points.push_back(pt);
  }

  std::vector<double> rd, sd;
  for (const auto& pt : report.points) {
    rd.push_back(pt.residual_difference);
    sd.push_back(pt.state_difference);
  }
  if (shape.isZero(0.0)) {
    // Nothing to fit: both differences vanish identically.
    report.residual_scan = {grid, rd, 0.0, 0.0, 0.0};
    report.state_scan = {grid, sd, 0.0, 0.0, 0.0};
    return report;
  }
  report.residual_scan = order_scan(grid, rd);
  report.state_scan = order_scan(grid, sd);
  return report;
}

}  // namespace liouvpt
