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

#include "liouvpt/core.hpp"

#include <string>
#include <vector>

namespace liouvpt {

/// rho -> -i [H, rho]. Rejects H that is not Hermitian to `hermiticity_tol`.
template <typename Derived>
SuperOperatorT<typename Derived::RealScalar> free_liouvillian(const Eigen::MatrixBase<Derived>& h,
                                                              double hermiticity_tol = 1e-10) {
  using Scalar = typename Derived::RealScalar;
  if (h.rows() != h.cols()) throw InvalidInput("free_liouvillian: Hamiltonian is not square");
  const OperatorT<Scalar> hc = h.template cast<Complex<Scalar>>();
  const auto defect = hermiticity_defect(hc);
  if (defect > hermiticity_tol) {
    throw InvalidInput("free_liouvillian: Hamiltonian is not Hermitian (max |H - H^dagger| = " +
                       std::to_string(static_cast<double>(defect)) + ")");
  }
  return Complex<Scalar>(0, -1) * (left_mul(hc) - right_mul(hc));
}

/// rho -> -i [K, rho] without the Hermiticity check (Lamb-shift style terms
/// inside perturbative blocks).
template <typename Derived>
SuperOperatorT<typename Derived::RealScalar> commutator_generator(const Eigen::MatrixBase<Derived>& k) {
  using Scalar = typename Derived::RealScalar;
  const OperatorT<Scalar> kc = k.template cast<Complex<Scalar>>();
  return Complex<Scalar>(0, -1) * (left_mul(kc) - right_mul(kc));
}

/// rate * (L rho L^dagger - 1/2 {L^dagger L, rho}).
template <typename Derived>
SuperOperatorT<typename Derived::RealScalar> lindblad_dissipator(const Eigen::MatrixBase<Derived>& l,
                                                                 double rate) {
  using Scalar = typename Derived::RealScalar;
  if (!(rate >= 0.0)) throw InvalidInput("lindblad_dissipator: rate must be nonnegative");
  if (l.rows() != l.cols()) throw InvalidInput("lindblad_dissipator: jump operator is not square");
  const OperatorT<Scalar> lc = l.template cast<Complex<Scalar>>();
  const OperatorT<Scalar> ldl = lc.adjoint() * lc;
  const SuperOperatorT<Scalar> s = sandwich(lc, lc.adjoint()) - Scalar(0.5) * (left_mul(ldl) + right_mul(ldl));
  return Scalar(rate) * s;
}

/// Norm of the trace functional composed with `s`; zero for trace-preserving
/// generators.
double trace_defect(const SuperOperator& s);

/// Dimension d of the Hilbert space a d^2 x d^2 superoperator acts on.
Eigen::Index hilbert_dim(const SuperOperator& s);

// ---------------------------------------------------------------------------

struct BohrFrequency {
  Eigen::Index i;
  Eigen::Index j;
  double omega;  ///< omega_i - omega_j
};

/// Eigenbasis of a Hamiltonian. `transform` has the energy eigenvectors as
/// columns (phase fixed so the largest-magnitude entry of each column is real
/// positive), so an operator X maps to U^dagger X U in the energy basis.
struct EnergyBasis {
  RVector energies;
  Operator transform;
  std::vector<BohrFrequency> bohr_frequencies;  ///< every ordered pair (i, j)
  bool resonant = false;
  std::string resonance_report;  ///< names the colliding pairs when resonant

  Eigen::Index dim() const { return energies.size(); }
  double omega(Eigen::Index i, Eigen::Index j) const { return energies(i) - energies(j); }

  Operator to_energy(const Operator& op) const { return transform.adjoint() * op * transform; }
  Operator from_energy(const Operator& op) const { return transform * op * transform.adjoint(); }
  SuperOperator super_to_energy(const SuperOperator& s) const;
  SuperOperator super_from_energy(const SuperOperator& s) const;

  /// Distinct Bohr frequencies (ascending) after merging within tolerance.
  std::vector<double> distinct_frequencies(double tol = 1e-9) const;
};

/// Diagonalizes H and flags off-diagonal Bohr degeneracies (omega_ij equal to
/// omega_i'j' for distinct off-diagonal pairs, or degenerate energy levels).
EnergyBasis bohr_spectrum(const Operator& h, const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------

/// Biorthonormal eigen-decomposition of a superoperator. Right eigen-operators
/// are the columns of `right` (vectorized); the left functionals are the rows
/// of `left`, so <o*_k, x> = left.row(k) * vec(x) and left * right = 1.
struct SpectralDecomposition {
  CVector eigenvalues;
  SuperOperator right;
  SuperOperator left;
  /// Branches whose eigenvalues lie within the clustering radius share an id.
  std::vector<int> cluster;
  bool has_degenerate_cluster = false;
  double condition = 1.0;
  /// Position of each branch in the unsorted input it was built from.
  std::vector<Eigen::Index> source;

  Eigen::Index size() const { return eigenvalues.size(); }
  Eigen::Index dim() const;
  Operator right_operator(Eigen::Index k) const { return unvec(right.col(k)); }
  /// Operator form of the left functional: <o*_k, x> = tr(left_operator(k)^dagger x).
  Operator left_operator(Eigen::Index k) const { return unvec(left.row(k).adjoint()); }
  cplx project(Eigen::Index k, const Operator& x) const { return (left.row(k) * vec(x))(0); }
  SuperOperator reconstruct() const { return right * eigenvalues.asDiagonal() * left; }
  /// Index of the branch with the smallest |f|.
  Eigen::Index zero_branch() const;
};

/// Exact (non-perturbative) spectral decomposition. Branches are ordered by
/// (Re f, Im f, original index); right eigen-operators have unit
/// Hilbert-Schmidt norm with their largest-magnitude entry (row-major scan,
/// first occurrence) real positive in the basis `s` is expressed in.
/// Throws IllConditioned for defective or ill-conditioned problems.
SpectralDecomposition spectral_decompose(const SuperOperator& s, const Tolerances& tol = default_tolerances());

/// Normalizes, orders and biorthogonalizes a complete set of eigenpairs.
/// Shared by the exact solver and the perturbative assembler.
SpectralDecomposition make_decomposition(const CVector& eigenvalues, const SuperOperator& right,
                                         const Tolerances& tol = default_tolerances());

/// Applies the phase/normalization convention to one right eigen-operator.
CVector normalize_branch(const CVector& v);

/// Unique trace-one null vector of a generator, from a bordered least-squares
/// solve. Throws InvalidInput if the kernel is not one-dimensional.
DensityMatrix exact_steady_state(const SuperOperator& s, const Tolerances& tol = default_tolerances());

/// Scale- and phase-invariant distance between two eigen-operators:
/// min over theta of || a/|a| - e^{i theta} b/|b| ||_F.
double branch_distance(const CVector& a, const CVector& b);

/// Greedy nearest-eigenvalue matching; returns for each entry of `from` the
/// index into `to` it pairs with (one-to-one).
std::vector<Eigen::Index> match_eigenvalues(const CVector& from, const CVector& to);

}  // namespace liouvpt
