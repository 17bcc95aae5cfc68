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

#include "liouvpt/perturb.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace liouvpt {

namespace {

void check_block(const SuperOperator& s, Eigen::Index d, const char* name, const Tolerances& tol) {
  if (s.rows() != d * d || s.cols() != d * d) {
    std::ostringstream msg;
    msg << "PerturbativeLiouvillian: block " << name << " has shape " << s.rows() << "x" << s.cols() << ", expected "
        << d * d << "x" << d * d;
    throw InvalidInput(msg.str());
  }
  if (!s.allFinite()) throw InvalidInput(std::string("PerturbativeLiouvillian: block ") + name + " is not finite");
  const double defect = trace_defect(s);
  if (defect > tol.trace * std::max(1.0, max_abs(s))) {
    std::ostringstream msg;
    msg << "PerturbativeLiouvillian: block " << name << " is not trace preserving (defect " << defect << ")";
    throw InvalidInput(msg.str());
  }
}

void require_nonresonant(const PerturbativeLiouvillian& p, const char* who) {
  if (p.basis.resonant && !p.allow_resonance) {
    throw ResonanceError(std::string(who) + ": resonant Bohr spectrum: " + p.basis.resonance_report);
  }
}

Operator diagonal_operator(const CVector& v) { return v.asDiagonal(); }

// Off-diagonal (Q-sector) part of the eigen-operator seeded by the diagonal
// vector r: q(a, b) = sum_m r_m <ab|L2|mm> / (i omega_ab).
Operator q_sector(const PerturbativeLiouvillian& p, const CVector& r) {
  const auto d = p.dim();
  Operator q = Operator::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      if (a == b) continue;
      cplx acc = 0;
      for (Eigen::Index m = 0; m < d; ++m) acc += p.l2(vec_index(a, b, d), vec_index(m, m, d)) * r(m);
      q(a, b) = acc / (kI * p.basis.omega(a, b));
    }
  }
  return q;
}

double max_abs_eigenvalue(const std::vector<DegenerateBranch>& b) {
  double m = 0.0;
  for (const auto& x : b) m = std::max(m, std::abs(x.f2));
  return m;
}

void check_splittings(const std::vector<DegenerateBranch>& b, const Tolerances& tol, const char* who) {
  const double scale = max_abs_eigenvalue(b);
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = i + 1; j < b.size(); ++j) {
      const double gap = std::abs(b[i].f2 - b[j].f2);
      if (!(gap > tol.pauli_gap * scale) || scale == 0.0) {
        std::ostringstream msg;
        msg << who << ": near-degenerate Pauli eigenvalues f2 = " << b[i].f2 << " and " << b[j].f2 << " (gap "
            << gap << ", threshold " << tol.pauli_gap * scale
            << "); degenerate splittings of the diagonal sector are not handled";
        throw DegenerateSplitting(msg.str());
      }
    }
  }
}

}  // namespace

PerturbativeLiouvillian PerturbativeLiouvillian::create(const Operator& h, const SuperOperator& l2,
                                                        std::optional<SuperOperator> l4, double coupling,
                                                        const Tolerances& tol) {
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
    throw InvalidInput("PerturbativeLiouvillian: coupling must be finite and nonnegative");
  }
  PerturbativeLiouvillian p;
  p.basis = bohr_spectrum(h, tol);
  p.hamiltonian = h;
  p.coupling = coupling;
  const auto d = p.basis.dim();
  check_block(l2, d, "L2", tol);
  if (l4) check_block(*l4, d, "L4", tol);

  p.l0 = SuperOperator::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) p.l0(vec_index(i, j, d), vec_index(i, j, d)) = -kI * p.basis.omega(i, j);
  }
  p.l2 = p.basis.super_to_energy(l2);
  if (l4) p.l4 = p.basis.super_to_energy(*l4);
  return p;
}

SuperOperator PerturbativeLiouvillian::generator(double c, bool include_l4) const {
  const double c2 = c * c;
  SuperOperator g = l0 + c2 * l2;
  if (include_l4 && l4) g += (c2 * c2) * *l4;
  return g;
}

PerturbativeLiouvillian PerturbativeLiouvillian::with_coupling(double c) const {
  PerturbativeLiouvillian p = *this;
  p.coupling = c;
  return p;
}

PerturbativeLiouvillian PerturbativeLiouvillian::without_l4() const {
  PerturbativeLiouvillian p = *this;
  p.l4.reset();
  return p;
}

// ---------------------------------------------------------------------------

OffDiagonalCorrection offdiag_corrections(const PerturbativeLiouvillian& p, Eigen::Index i, Eigen::Index j) {
  const auto d = p.dim();
  if (i < 0 || j < 0 || i >= d || j >= d) throw InvalidInput("offdiag_corrections: index out of range");
  if (i == j) throw InvalidInput("offdiag_corrections: (i, j) must be off-diagonal");
  require_nonresonant(p, "offdiag_corrections");

  const auto col = vec_index(i, j, d);
  const double wij = p.basis.omega(i, j);
  OffDiagonalCorrection out;
  out.f2 = p.l2(col, col);
  out.o2 = Operator::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      if (a == i && b == j) continue;
      const cplx denom = -kI * (wij - p.basis.omega(a, b));
      out.o2(a, b) = p.l2(vec_index(a, b, d), col) / denom;
    }
  }
  return out;
}

PauliMatrix pauli_projection(const SuperOperator& block, const EnergyBasis& basis, int order) {
  if (order != 2 && order != 4) throw InvalidInput("pauli_projection: order must be 2 or 4");
  const auto d = basis.dim();
  if (block.rows() != d * d || block.cols() != d * d) throw InvalidInput("pauli_projection: block/basis size mismatch");
  PauliMatrix w;
  w.order = order;
  w.entries.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) w.entries(i, j) = block(vec_index(i, i, d), vec_index(j, j, d));
  }
  w.imaginary_residue = max_abs(w.entries.imag().cast<cplx>());
  return w;
}

PauliMatrix fourth_order_pauli(const PerturbativeLiouvillian& p, bool include_l4) {
  require_nonresonant(p, "fourth_order_pauli");
  const auto d = p.dim();
  PauliMatrix w;
  if (include_l4 && p.l4) {
    w = pauli_projection(*p.l4, p.basis, 4);
  } else {
    w.order = 4;
    w.entries = Operator::Zero(d, d);
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      if (a == b) continue;
      const auto ab = vec_index(a, b, d);
      const cplx inv = 1.0 / (kI * p.basis.omega(a, b));
      for (Eigen::Index i = 0; i < d; ++i) {
        const cplx left = p.l2(vec_index(i, i, d), ab) * inv;
        if (left == cplx(0)) continue;
        for (Eigen::Index j = 0; j < d; ++j) w.entries(i, j) += left * p.l2(ab, vec_index(j, j, d));
      }
    }
  }
  w.imaginary_residue = max_abs(w.entries.imag().cast<cplx>());
  return w;
}

std::vector<DegenerateBranch> diagonalize_pauli(const PauliMatrix& w2, const Tolerances& tol) {
  const auto d = w2.dim();
  if (d == 0) throw InvalidInput("diagonalize_pauli: empty Pauli matrix");
  if (!w2.entries.allFinite()) throw InvalidInput("diagonalize_pauli: non-finite entries");
  Eigen::ComplexEigenSolver<Operator> es(w2.entries);
  if (es.info() != Eigen::Success) throw IllConditioned("diagonalize_pauli: eigensolver did not converge");

  std::vector<DegenerateBranch> branches(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) branches[k].f2 = es.eigenvalues()(k);
  check_splittings(branches, tol, "diagonalize_pauli");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const cplx fa = es.eigenvalues()(a), fb = es.eigenvalues()(b);
    if (fa.real() != fb.real()) return fa.real() < fb.real();
    return fa.imag() < fb.imag();
  });

  Eigen::Index zero = 0;
  for (Eigen::Index k = 1; k < d; ++k) {
    if (std::abs(es.eigenvalues()(order[k])) < std::abs(es.eigenvalues()(order[zero]))) zero = k;
  }

  Operator right(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    CVector v = es.eigenvectors().col(order[k]);
    Eigen::Index big = 0;
    for (Eigen::Index m = 1; m < d; ++m) {
      if (std::abs(v(m)) > std::abs(v(big)) * (1.0 + 1e-12)) big = m;
    }
    v *= std::conj(v(big)) / std::abs(v(big));
    v /= v.norm();
    if (k == zero) {
      // Steady-state candidate: unit 1-norm, nonnegative when sign-definite.
      const double scale = v.cwiseAbs().maxCoeff();
      bool definite = true;
      for (Eigen::Index m = 0; m < d; ++m) {
        if (v(m).real() < -1e-12 * scale || std::abs(v(m).imag()) > 1e-10 * scale) definite = false;
      }
      if (definite) {
        for (Eigen::Index m = 0; m < d; ++m) v(m) = std::max(0.0, v(m).real());
      }
      v /= v.cwiseAbs().sum();
    }
    right.col(k) = v;
  }
  Eigen::JacobiSVD<Operator> svd(right);
  const auto& sv = svd.singularValues();
  const double cond = sv(d - 1) > 0 ? sv(0) / sv(d - 1) : std::numeric_limits<double>::infinity();
  if (!(cond <= tol.max_condition)) {
    std::ostringstream msg;
    msg << "diagonalize_pauli: eigenvector condition " << cond << " (defective Pauli matrix)";
    throw IllConditioned(msg.str());
  }
  const Operator left = right.partialPivLu().inverse();

  for (Eigen::Index k = 0; k < d; ++k) {
    auto& b = branches[k];
    b.f2 = es.eigenvalues()(order[k]);
    b.right = right.col(k);
    b.left = left.row(k).transpose();
    b.o2_diag = CVector::Zero(d);
    b.has_o2 = false;
    b.stationary = (k == zero);
  }
  return branches;
}

std::vector<DegenerateBranch> degenerate_correction(const PauliMatrix& w4, std::vector<DegenerateBranch> branches,
                                                    const Tolerances& tol) {
  const auto d = w4.dim();
  if (static_cast<Eigen::Index>(branches.size()) != d) {
    throw InvalidInput("degenerate_correction: need one branch per diagonal state");
  }
  check_splittings(branches, tol, "degenerate_correction");
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const CVector w4r = w4.entries * branches[i].right;
    CVector acc = CVector::Zero(d);
    for (std::size_t j = 0; j < branches.size(); ++j) {
      if (j == i) continue;
      const cplx num = branches[j].left.transpose() * w4r;
      acc += num / (branches[i].f2 - branches[j].f2) * branches[j].right;
    }
    branches[i].o2_diag = acc;
    branches[i].has_o2 = true;
  }
  return branches;
}

// ---------------------------------------------------------------------------

AssembledSpectrum assemble_spectrum(const PerturbativeLiouvillian& p, int order, bool use_l4, const Tolerances& tol) {
  if (order != 0 && order != 2) throw InvalidInput("assemble_spectrum: order must be 0 or 2");
  const auto d = p.dim();
  const auto n = d * d;
  const double c2 = p.coupling * p.coupling;

  AssembledSpectrum out;
  out.order = order;
  CVector evals(n);
  SuperOperator evecs = SuperOperator::Zero(n, n);
  std::vector<BranchOrigin> origin(static_cast<std::size_t>(n));

  if (order == 0) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const auto k = vec_index(i, j, d);
        evals(k) = -kI * p.basis.omega(i, j);
        evecs(k, k) = 1.0;
        origin[k] = {i == j, i, j};
      }
    }
    out.flags.push_back("order 0: exact spectrum of L0");
  } else {
    require_nonresonant(p, "assemble_spectrum");
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        if (i == j) continue;
        const auto corr = offdiag_corrections(p, i, j);
        evals(k) = -kI * p.basis.omega(i, j) + c2 * corr.f2;
        CVector v = c2 * vec(corr.o2);
        v(vec_index(i, j, d)) += 1.0;
        evecs.col(k) = v;
        origin[k] = {false, i, j};
        ++k;
      }
    }
    const auto w2 = pauli_projection(p.l2, p.basis, 2);
    out.used_l4 = use_l4 && p.has_l4();
    auto branches = degenerate_correction(fourth_order_pauli(p, out.used_l4), diagonalize_pauli(w2, tol), tol);
    for (std::size_t b = 0; b < branches.size(); ++b) {
      const auto& br = branches[b];
      evals(k) = c2 * br.f2;
      const Operator op = diagonal_operator(br.right + c2 * br.o2_diag) + c2 * q_sector(p, br.right);
      evecs.col(k) = vec(op);
      origin[k] = {true, static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)};
      ++k;
    }
    out.diagonal_sector_order0_only = !out.used_l4;
    out.flags.push_back("off-diagonal sectors: eigenvalues and eigen-operators to order 2");
    out.flags.push_back(out.used_l4 ? "diagonal sector: eigen-operators to order 2 (fourth-order Pauli applied)"
                                    : "diagonal sector order-0 only");
  }

  out.decomposition = make_decomposition(evals, evecs, tol);
  out.origin.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) out.origin[k] = origin[out.decomposition.source[k]];
  if (order == 0) out.diagonal_sector_order0_only = true;
  return out;
}

SteadyState steady_state(const PerturbativeLiouvillian& p, int order, bool use_l4, const Tolerances& tol) {
  if (order != 0 && order != 2) throw InvalidInput("steady_state: order must be 0 or 2");
  const double c2 = p.coupling * p.coupling;
  const auto w2 = pauli_projection(p.l2, p.basis, 2);
  auto branches = diagonalize_pauli(w2, tol);
  const auto zero =
      std::find_if(branches.begin(), branches.end(), [](const DegenerateBranch& b) { return b.stationary; });
  const double scale = max_abs_eigenvalue(branches);
  if (zero == branches.end() || std::abs(zero->f2) > 1e3 * tol.pauli_gap * std::max(scale, 1e-300)) {
    throw DegenerateSplitting("steady_state: the Pauli matrix has no stationary branch");
  }

  SteadyState out;
  out.order = order;
  DensityMatrix rho;
  if (order == 0) {
    rho = diagonal_operator(zero->right);
  } else {
    require_nonresonant(p, "steady_state");
    const bool with_l4 = use_l4 && p.has_l4();
    branches = degenerate_correction(fourth_order_pauli(p, with_l4), std::move(branches), tol);
    const auto& z = *std::find_if(branches.begin(), branches.end(),
                                  [](const DegenerateBranch& b) { return b.stationary; });
    rho = diagonal_operator(z.right + c2 * z.o2_diag) + c2 * q_sector(p, z.right);
    out.diagonal_sector_order0_only = !with_l4;
  }
  const cplx tr = rho.trace();
  if (std::abs(tr) == 0.0) throw IllConditioned("steady_state: zero-trace stationary operator");
  rho /= tr;
  out.hermitian_residue = hermiticity_defect(rho);
  out.rho = 0.5 * (rho + rho.adjoint());
  return out;
}

double max_second_order_rate(const PerturbativeLiouvillian& p) {
  const auto d = p.dim();
  double m = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i != j) m = std::max(m, std::abs(p.l2(vec_index(i, j, d), vec_index(i, j, d))));
    }
  }
  const auto w2 = pauli_projection(p.l2, p.basis, 2);
  Eigen::ComplexEigenSolver<Operator> es(w2.entries, false);
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) m = std::max(m, std::abs(es.eigenvalues()(k)));
  return m;
}

double slowest_relaxation_rate(const PerturbativeLiouvillian& p, const Tolerances& tol) {
  const auto w2 = pauli_projection(p.l2, p.basis, 2);
  Eigen::ComplexEigenSolver<Operator> es(w2.entries, false);
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double r = std::abs(es.eigenvalues()(k).real());
    if (r > tol.pauli_gap * scale) best = std::min(best, r);
  }
  if (!std::isfinite(best)) throw DegenerateSplitting("slowest_relaxation_rate: no relaxing Pauli branch");
  return best;
}

}  // namespace liouvpt
