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

#include "liouvpt/superop.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>

namespace liouvpt {

Tolerances default_tolerances() {
  Tolerances tol;
  if (const char* env = std::getenv("LIOUVILLE_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) {
      tol.hermiticity = v;
      tol.trace = v;
    }
  }
  return tol;
}

Eigen::Index hilbert_dim(const SuperOperator& s) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(s.rows()))));
  if (d * d != s.rows() || s.rows() != s.cols()) {
    throw InvalidInput("superoperator of shape " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                       " does not act on a square operator space");
  }
  return d;
}

double trace_defect(const SuperOperator& s) {
  const auto d = hilbert_dim(s);
  const CVector id = vec(Operator::Identity(d, d));
  return max_abs(id.adjoint() * s);
}

// ---------------------------------------------------------------------------

SuperOperator EnergyBasis::super_to_energy(const SuperOperator& s) const {
  const SuperOperator t = kron(transform.transpose(), transform.adjoint());
  return t * s * t.adjoint();
}

SuperOperator EnergyBasis::super_from_energy(const SuperOperator& s) const {
  const SuperOperator t = kron(transform.transpose(), transform.adjoint());
  return t.adjoint() * s * t;
}

std::vector<double> EnergyBasis::distinct_frequencies(double tol) const {
  std::vector<double> all;
  all.reserve(bohr_frequencies.size());
  for (const auto& b : bohr_frequencies) all.push_back(b.omega);
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double w : all) {
    if (out.empty() || w - out.back() > tol) out.push_back(w);
  }
  return out;
}

namespace {

void fix_column_phases(Operator& u) {
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < u.rows(); ++i) {
      if (std::abs(u(i, k)) > std::abs(u(best, k)) * (1.0 + 1e-12)) best = i;
    }
    const cplx a = u(best, k);
    if (std::abs(a) > 0) u.col(k) *= std::conj(a) / std::abs(a);
  }
}

}  // namespace

EnergyBasis bohr_spectrum(const Operator& h, const Tolerances& tol) {
  if (h.rows() != h.cols() || h.rows() == 0) throw InvalidInput("bohr_spectrum: Hamiltonian must be square");
  const double defect = hermiticity_defect(h);
  if (defect > tol.hermiticity) {
    throw InvalidInput("bohr_spectrum: Hamiltonian is not Hermitian (max |H - H^dagger| = " + std::to_string(defect) +
                       ")");
  }
  const Operator hh = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(hh);
  if (es.info() != Eigen::Success) throw Error("bohr_spectrum: eigensolver failed");

  EnergyBasis basis;
  basis.energies = es.eigenvalues();
  basis.transform = es.eigenvectors();
  fix_column_phases(basis.transform);

  const auto d = basis.dim();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) basis.bohr_frequencies.push_back({i, j, basis.omega(i, j)});
  }

  const double scale = std::max(1.0, basis.energies.cwiseAbs().maxCoeff());
  const double thresh = tol.resonance * scale;
  std::ostringstream report;
  for (std::size_t a = 0; a < basis.bohr_frequencies.size(); ++a) {
    const auto& p = basis.bohr_frequencies[a];
    if (p.i == p.j) continue;
    if (std::abs(p.omega) <= thresh) {
      basis.resonant = true;
      report << "degenerate levels " << p.i << "," << p.j << " (omega_" << p.i << p.j << " = 0); ";
      continue;
    }
    for (std::size_t b = a + 1; b < basis.bohr_frequencies.size(); ++b) {
      const auto& q = basis.bohr_frequencies[b];
      if (q.i == q.j) continue;
      if (std::abs(p.omega - q.omega) <= thresh) {
        basis.resonant = true;
        report << "omega_" << p.i << p.j << " = omega_" << q.i << q.j << " = " << p.omega << "; ";
      }
    }
  }
  basis.resonance_report = report.str();
  return basis;
}

// ---------------------------------------------------------------------------

Eigen::Index SpectralDecomposition::dim() const {
  return static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(eigenvalues.size()))));
}

Eigen::Index SpectralDecomposition::zero_branch() const {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < eigenvalues.size(); ++k) {
    if (std::abs(eigenvalues(k)) < std::abs(eigenvalues(best))) best = k;
  }
  return best;
}

CVector normalize_branch(const CVector& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  // Row-major scan of the operator; near-ties resolve to the first entry.
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double a = std::abs(v(vec_index(i, j, d)));
      if (a > best_abs * (1.0 + 1e-12) && a > best_abs) {
        best_abs = a;
        best = vec_index(i, j, d);
      }
    }
  }
  const double n = v.norm();
  if (n == 0.0 || best_abs <= 0.0) throw InvalidInput("normalize_branch: zero vector");
  const cplx phase = std::conj(v(best)) / std::abs(v(best));
  return v * (phase / n);
}

SpectralDecomposition spectral_decompose(const SuperOperator& s, const Tolerances& tol) {
  const auto n = s.rows();
  hilbert_dim(s);
  if (!s.allFinite()) throw InvalidInput("spectral_decompose: non-finite entries");

  CVector evals;
  SuperOperator evecs;
  const double snorm = std::max(s.norm(), 1e-300);

  Eigen::ComplexSchur<SuperOperator> schur(s);
  if (schur.info() != Eigen::Success) throw IllConditioned("spectral_decompose: Schur decomposition failed");
  const SuperOperator& tri = schur.matrixT();
  const double offdiag = tri.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm();
  if (offdiag <= 1e-13 * snorm) {
    // Normal matrix: the Schur vectors are an orthonormal eigenbasis, which
    // also handles exactly degenerate eigenvalues cleanly.
    evals = tri.diagonal();
    evecs = schur.matrixU();
  } else {
    Eigen::ComplexEigenSolver<SuperOperator> ces(s);
    if (ces.info() != Eigen::Success) throw IllConditioned("spectral_decompose: eigensolver did not converge");
    evals = ces.eigenvalues();
    evecs = ces.eigenvectors();
    // Re-derive eigenvectors of repeated eigenvalues from the null space of
    // (S - f) so a diagonalizable degenerate block stays well conditioned.
    std::vector<bool> done(static_cast<std::size_t>(n), false);
    const double radius = tol.cluster * std::max(1.0, evals.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < n; ++k) {
      if (done[k]) continue;
      std::vector<Eigen::Index> members{k};
      for (Eigen::Index m = k + 1; m < n; ++m) {
        if (!done[m] && std::abs(evals(m) - evals(k)) <= radius) members.push_back(m);
      }
      for (auto m : members) done[m] = true;
      if (members.size() < 2) continue;
      cplx mean = 0;
      for (auto m : members) mean += evals(m);
      mean /= static_cast<double>(members.size());
      const SuperOperator shifted = s - mean * SuperOperator::Identity(n, n);
      Eigen::JacobiSVD<SuperOperator> svd(shifted, Eigen::ComputeFullV);
      const auto mult = static_cast<Eigen::Index>(members.size());
      for (Eigen::Index q = 0; q < mult; ++q) {
        evecs.col(members[q]) = svd.matrixV().col(n - 1 - q);
        evals(members[q]) = mean;
      }
    }
  }

  SpectralDecomposition out = make_decomposition(evals, evecs, tol);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double res = (s * out.right.col(k) - out.eigenvalues(k) * out.right.col(k)).norm() / snorm;
    if (res > tol.eigen_residual) {
      std::ostringstream msg;
      msg << "spectral_decompose: eigen-residual " << res << " on branch " << k << " (f = " << out.eigenvalues(k)
          << ")";
      throw IllConditioned(msg.str());
    }
  }
  return out;
}

SpectralDecomposition make_decomposition(const CVector& evals, const SuperOperator& evecs, const Tolerances& tol) {
  const auto n = evals.size();
  if (evecs.rows() != n || evecs.cols() != n) throw InvalidInput("make_decomposition: incomplete eigenbasis");

  // Deterministic order by (Re f, Im f, index).
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (evals(a).real() != evals(b).real()) return evals(a).real() < evals(b).real();
    if (evals(a).imag() != evals(b).imag()) return evals(a).imag() < evals(b).imag();
    return a < b;
  });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.right.resize(n, n);
  out.source = order;
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = evals(order[k]);
    out.right.col(k) = normalize_branch(evecs.col(order[k]));
  }

  Eigen::JacobiSVD<SuperOperator> svd(out.right);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  out.condition = smin > 0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(out.condition <= tol.max_condition)) {
    std::ostringstream msg;
    msg << "eigenvector matrix condition " << out.condition << " exceeds " << tol.max_condition
        << " (defective or ill-conditioned generator)";
    throw IllConditioned(msg.str());
  }
  out.left = out.right.partialPivLu().inverse();

  out.cluster.assign(static_cast<std::size_t>(n), -1);
  int next = 0;
  const double radius = tol.cluster * std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < n; ++k) {
    if (out.cluster[k] >= 0) continue;
    out.cluster[k] = next;
    for (Eigen::Index m = k + 1; m < n; ++m) {
      if (out.cluster[m] < 0 && std::abs(out.eigenvalues(m) - out.eigenvalues(k)) <= radius) {
        out.cluster[m] = next;
        out.has_degenerate_cluster = true;
      }
    }
    ++next;
  }
  return out;
}

DensityMatrix exact_steady_state(const SuperOperator& s, const Tolerances& tol) {
  const auto d = hilbert_dim(s);
  const auto n = s.rows();

  Eigen::JacobiSVD<SuperOperator> kernel(s);
  const auto& sv = kernel.singularValues();
  const double scale = std::max(1.0, sv(0));
  if (n >= 2 && sv(n - 2) <= tol.cluster * scale) {
    std::ostringstream msg;
    msg << "exact_steady_state: kernel is not one-dimensional (second-smallest singular value " << sv(n - 2)
        << ")";
    throw InvalidInput(msg.str());
  }

  SuperOperator bordered(n + 1, n);
  bordered.topRows(n) = s;
  bordered.row(n) = vec(Operator::Identity(d, d)).adjoint();
  CVector rhs = CVector::Zero(n + 1);
  rhs(n) = 1.0;
  const CVector x = bordered.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  DensityMatrix rho = unvec(x);
  rho /= rho.trace();
  return rho;
}

double branch_distance(const CVector& a, const CVector& b) {
  const CVector an = a / a.norm();
  const CVector bn = b / b.norm();
  const cplx overlap = bn.dot(an);
  const cplx phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : cplx(1.0);
  return (an - phase * bn).norm();
}

std::vector<Eigen::Index> match_eigenvalues(const CVector& from, const CVector& to) {
  struct Pair {
    double dist;
    Eigen::Index a, b;
  };
  std::vector<Pair> pairs;
  for (Eigen::Index a = 0; a < from.size(); ++a) {
    for (Eigen::Index b = 0; b < to.size(); ++b) pairs.push_back({std::abs(from(a) - to(b)), a, b});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.dist < y.dist; });
  std::vector<Eigen::Index> out(static_cast<std::size_t>(from.size()), -1);
  std::vector<bool> used(static_cast<std::size_t>(to.size()), false);
  for (const auto& p : pairs) {
    if (out[p.a] < 0 && !used[p.b]) {
      out[p.a] = p.b;
      used[p.b] = true;
    }
  }
  return out;
}

}  // namespace liouvpt
