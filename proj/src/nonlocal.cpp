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

#include "liouvpt/nonlocal.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace liouvpt {

SuperOperator LaplaceKernel::operator()(cplx s) const {
  SuperOperator k = l0 + (coupling * coupling) * k2(s);
  if (k4) k += std::pow(coupling, 4) * k4(s);
  return k;
}

namespace {

LaplaceKernel base_kernel(const PerturbativeLiouvillian& p) {
  LaplaceKernel k;
  k.basis = p.basis;
  k.l0 = p.l0;
  k.coupling = p.coupling;
  if (p.l4) {
    const SuperOperator l4 = *p.l4;
    k.k4 = [l4](cplx) { return l4; };
  }
  return k;
}

std::function<SuperOperator(cplx)> memory_function(const ExponentialMemory& m, const SuperOperator& l0) {
  if (!m.rotating) {
    return [m](cplx s) -> SuperOperator { return (m.kappa / (s + m.kappa)) * m.b; };
  }
  // L0 is diagonal in the energy basis, so the resolvent is too.
  const CVector l0_diag = l0.diagonal();
  return [m, l0_diag](cplx s) -> SuperOperator {
    const CVector r = (s + m.kappa - l0_diag.array()).inverse().matrix();
    return m.kappa * (r.asDiagonal() * m.b);
  };
}

}  // namespace

LaplaceKernel constant_kernel(const PerturbativeLiouvillian& p) {
  auto k = base_kernel(p);
  const SuperOperator l2 = p.l2;
  k.k2 = [l2](cplx) { return l2; };
  k.s_independent = true;
  return k;
}

LaplaceKernel exponential_memory_kernel(const PerturbativeLiouvillian& p, double kappa, bool rotating) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidInput("exponential_memory_kernel: kappa must be positive");
  auto k = base_kernel(p);
  k.memory = ExponentialMemory{p.l2, kappa, rotating};
  k.k2 = memory_function(*k.memory, k.l0);
  k.abscissa = -kappa;
  return k;
}

LaplaceKernel dephasing_memory_kernel(double omega, double g, double kappa, double c) {
  if (!(omega >= 0.0)) throw InvalidInput("dephasing_memory_kernel: omega must be nonnegative");
  if (!(kappa > 0.0)) throw InvalidInput("dephasing_memory_kernel: kappa must be positive");
  Operator h = Operator::Zero(2, 2);
  h(1, 1) = omega;
  LaplaceKernel k;
  k.basis = bohr_spectrum(h);
  k.l0 = free_liouvillian(k.basis.to_energy(h));
  k.coupling = c;
  // kappa / (s + kappa) B = -g^2 / (s + kappa) on the coherences.
  SuperOperator b = SuperOperator::Zero(4, 4);
  b(vec_index(0, 1, 2), vec_index(0, 1, 2)) = -g * g / kappa;
  b(vec_index(1, 0, 2), vec_index(1, 0, 2)) = -g * g / kappa;
  k.memory = ExponentialMemory{b, kappa, false};
  k.k2 = memory_function(*k.memory, k.l0);
  k.abscissa = -kappa;
  return k;
}

// ---------------------------------------------------------------------------

namespace {

struct Nearest {
  cplx value;
  Eigen::Index index = 0;
};

Nearest nearest_eigenvalue(const CVector& ev, cplx s, const PoleSearchOptions& opt, const std::vector<cplx>& trace) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index k = 0; k < ev.size(); ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::abs(ev(a) - s) < std::abs(ev(b) - s); });
  if (idx.size() > 1) {
    const double scale = std::max(1.0, std::abs(s));
    const cplx a = ev(idx[0]), b = ev(idx[1]);
    const bool tied = std::abs(b - s) - std::abs(a - s) < opt.ambiguity * scale;
    const bool distinct = std::abs(a - b) > 1e-9 * scale;
    if (tied && distinct) {
      std::ostringstream msg;
      msg << "pole_search: ambiguous tracking at s = " << s << ": eigenvalues " << a << " and " << b
          << " are equally near after " << trace.size() << " iterates";
      throw ConvergenceError(msg.str());
    }
  }
  return {ev(idx[0]), idx[0]};
}

CVector kernel_eigenvalues(const LaplaceKernel& k, cplx s) {
  Eigen::ComplexEigenSolver<SuperOperator> es(k(s), false);
  if (es.info() != Eigen::Success) throw ConvergenceError("pole_search: eigensolver failed");
  return es.eigenvalues();
}

[[noreturn]] void fail(const std::string& why, const std::vector<cplx>& trace) {
  std::ostringstream msg;
  msg << "pole_search: " << why << "; iterates:";
  for (const auto& s : trace) msg << ' ' << s;
  throw ConvergenceError(msg.str());
}

}  // namespace

KernelPole pole_search(const LaplaceKernel& k, cplx s_start, const PoleSearchOptions& opt) {
  if (!k.k2) throw InvalidInput("pole_search: kernel has no second-order part");
  if (!(opt.tol > 0.0) || opt.max_iterations < 1) throw InvalidInput("pole_search: bad options");
  KernelPole out;
  out.iterates.push_back(s_start);

  auto residual_map = [&](cplx s) { return nearest_eigenvalue(kernel_eigenvalues(k, s), s, opt, out.iterates).value - s; };

  cplx s_prev = s_start;
  cplx f_prev = residual_map(s_prev);
  cplx s = s_prev + f_prev;  // fixed-point step
  out.iterates.push_back(s);
  cplx f = residual_map(s);
  bool converged = std::abs(s - s_prev) < opt.tol * std::max(1.0, std::abs(s));
  int it = 1;
  for (; !converged && it < opt.max_iterations; ++it) {
    cplx step = f;  // fixed-point fallback
    if (std::abs(f - f_prev) > 0.0) step = -f * (s - s_prev) / (f - f_prev);
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) fail("non-finite step", out.iterates);
    cplx s_next = s + step;
    cplx f_next = residual_map(s_next);
    for (int halve = 0; halve < 30 && std::abs(f_next) > std::abs(f); ++halve) {
      step *= 0.5;
      s_next = s + step;
      f_next = residual_map(s_next);
    }
    s_prev = s;
    f_prev = f;
    s = s_next;
    f = f_next;
    out.iterates.push_back(s);
    converged = std::abs(s - s_prev) < opt.tol * std::max(1.0, std::abs(s));
  }
  if (!converged) fail("no convergence after " + std::to_string(opt.max_iterations) + " iterations", out.iterates);
  if (s.real() <= k.abscissa) fail("pole lies outside the half-plane of analyticity", out.iterates);

  const SuperOperator ks = k(s);
  Eigen::ComplexEigenSolver<SuperOperator> es(ks);
  if (es.info() != Eigen::Success) fail("eigensolver failed at the pole", out.iterates);
  const auto near = nearest_eigenvalue(es.eigenvalues(), s, opt, out.iterates);
  // Settle on the eigenvalue itself so s and the eigen-operator agree.
  s = near.value;
  CVector v = es.eigenvectors().col(near.index);
  Eigen::Index big = 0;
  v.cwiseAbs().maxCoeff(&big);
  v *= std::conj(v(big)) / std::abs(v(big));
  v /= v.norm();
  out.s = s;
  out.eigen_operator = unvec(v);
  out.residual = (ks * v - s * v).norm();
  out.iterations = it;
  return out;
}

std::vector<KernelPole> pole_set(const LaplaceKernel& k, const PoleSearchOptions& opt) {
  const auto d = k.basis.dim();
  std::vector<KernelPole> poles;
  const double c2 = k.coupling * k.coupling;
  Eigen::ComplexEigenSolver<Operator> es(pauli_projection(k.k2(0.0), k.basis, 2).entries, false);
  for (Eigen::Index m = 0; m < d; ++m) poles.push_back(pole_search(k, c2 * es.eigenvalues()(m), opt));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i != j) poles.push_back(pole_search(k, cplx(0.0, -k.basis.omega(i, j)), opt));
    }
  }
  return poles;
}

PauliMatrix nonlocal_degenerate_sector(const LaplaceKernel& k) {
  if (!(k.abscissa < 0.0)) {
    std::ostringstream msg;
    msg << "nonlocal_degenerate_sector: s = 0 is not inside the half-plane of analyticity (abscissa " << k.abscissa
        << ")";
    throw InvalidInput(msg.str());
  }
  return pauli_projection(k.k2(0.0), k.basis, 2);
}

Trajectory simulate_memory(const LaplaceKernel& k, const DensityMatrix& rho0, const std::vector<double>& times,
                           const IntegrateOptions& opt) {
  if (!k.memory) throw InvalidInput("simulate_memory: kernel has no exponential-memory form");
  const auto n = k.l0.rows();
  if (rho0.size() != n) throw InvalidInput("simulate_memory: rho0 dimension mismatch");
  const auto& m = *k.memory;
  const double c2 = k.coupling * k.coupling;
  SuperOperator a = SuperOperator::Zero(2 * n, 2 * n);
  a.topLeftCorner(n, n) = k.l0;
  if (k.k4) a.topLeftCorner(n, n) += c2 * c2 * k.k4(0.0);
  a.topRightCorner(n, n) = c2 * SuperOperator::Identity(n, n);
  a.bottomLeftCorner(n, n) = m.kappa * m.b;
  a.bottomRightCorner(n, n) = -m.kappa * SuperOperator::Identity(n, n);
  if (m.rotating) a.bottomRightCorner(n, n) += k.l0;

  CVector x0 = CVector::Zero(2 * n);
  x0.head(n) = vec(rho0);
  const auto xs = integrate_linear(a, x0, times, opt);
  Trajectory traj;
  traj.t = times;
  const cplx tr0 = rho0.trace();
  for (const auto& x : xs) {
    traj.rho.push_back(unvec(CVector(x.head(n))));
    traj.trace_drift = std::max(traj.trace_drift, std::abs(traj.rho.back().trace() - tr0));
  }
  return traj;
}

}  // namespace liouvpt
