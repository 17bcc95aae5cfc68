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

// Degenerate canonical perturbation theory of a stationary Liouvillian
//
//   L(c) = L0 + c^2 L2 + c^4 L4,      L0 rho = -i [H, rho].
//
// Everything here works in the energy basis of H. The kernel of L0 (operators
// diagonal in that basis) is always degenerate, so the diagonal sector is
// treated through the Pauli matrix W (the restriction of a block to diagonal
// entries) while the off-diagonal sectors |i><j| follow ordinary
// non-degenerate perturbation theory.

#pragma once

#include "liouvpt/superop.hpp"

#include <optional>
#include <string>
#include <vector>

namespace liouvpt {

/// Ordered blocks of a perturbative generator, stored per unit coupling and
/// expressed in the energy basis of the free Hamiltonian.
struct PerturbativeLiouvillian {
  EnergyBasis basis;
  Operator hamiltonian;  ///< in the caller's basis
  SuperOperator l0;
  SuperOperator l2;
  std::optional<SuperOperator> l4;
  double coupling = 0.0;  ///< c; the physical generator is L0 + c^2 L2 + c^4 L4
  /// Perturbative operations refuse a resonant Bohr spectrum unless this is set.
  bool allow_resonance = false;

  /// Validates H (Hermitian) and each block (trace preserving) and rotates the
  /// blocks, given in the caller's basis, into the energy basis.
  static PerturbativeLiouvillian create(const Operator& h, const SuperOperator& l2,
                                        std::optional<SuperOperator> l4, double coupling,
                                        const Tolerances& tol = default_tolerances());

  Eigen::Index dim() const { return basis.dim(); }
  bool has_l4() const { return l4.has_value(); }
  /// L0 + c^2 L2 (+ c^4 L4 when present and requested), energy basis.
  SuperOperator generator(double c, bool include_l4 = true) const;
  SuperOperator generator() const { return generator(coupling); }
  PerturbativeLiouvillian with_coupling(double c) const;
  PerturbativeLiouvillian without_l4() const;
};

struct PauliMatrix {
  int order = 2;
  Operator entries;           ///< (i, j) = <w_i| block{|w_j><w_j|} |w_i>
  double imaginary_residue = 0.0;  ///< max |Im W_ij|; zero for physical blocks

  Eigen::Index dim() const { return entries.rows(); }
  double column_sum_defect() const { return max_abs(entries.colwise().sum()); }
};

/// One eigen-branch of the Pauli problem W2 o = f o.
struct DegenerateBranch {
  cplx f2;               ///< eigenvalue per unit c^2
  CVector right;         ///< diagonal entries of the zeroth-order eigen-operator
  CVector left;          ///< left eigenvector, left_j . right_i = delta_ij
  CVector o2_diag;       ///< second-order diagonal-sector correction (per unit c^2)
  bool has_o2 = false;
  bool stationary = false;  ///< the f2 = 0 branch
};

struct OffDiagonalCorrection {
  cplx f2;      ///< eigenvalue correction per unit c^2
  Operator o2;  ///< eigen-operator correction per unit c^2, zero at (i, j)
};

/// Second-order eigenvalue and eigen-operator corrections of the branch
/// seeded by |w_i><w_j|, i != j. Throws ResonanceError on a resonant spectrum.
OffDiagonalCorrection offdiag_corrections(const PerturbativeLiouvillian& p, Eigen::Index i, Eigen::Index j);

/// Diagonal-to-diagonal restriction of an energy-basis block.
PauliMatrix pauli_projection(const SuperOperator& block, const EnergyBasis& basis, int order);

/// The complete fourth-order Pauli matrix: the projection of L4 (zero when L4
/// is absent or `include_l4` is false) plus the second-order feedthrough
///   W4_ij += sum_{a != b} <ii|L2|ab> <ab|L2|jj> / (i omega_ab),
/// which canonical perturbation theory generates from L2 alone.
PauliMatrix fourth_order_pauli(const PerturbativeLiouvillian& p, bool include_l4 = true);

/// Solves W2 o = f o exactly. Throws DegenerateSplitting when two eigenvalues
/// are closer than `tol.pauli_gap` relative to the largest |f|.
std::vector<DegenerateBranch> diagonalize_pauli(const PauliMatrix& w2, const Tolerances& tol = default_tolerances());

/// Fills o2_diag of each branch with
///   sum_{j != i} (left_j . W4 . right_i) / (f_i - f_j) right_j.
std::vector<DegenerateBranch> degenerate_correction(const PauliMatrix& w4, std::vector<DegenerateBranch> branches,
                                                    const Tolerances& tol = default_tolerances());

/// Where an assembled branch came from.
struct BranchOrigin {
  bool degenerate = false;
  Eigen::Index i = 0;  ///< (i, j) for off-diagonal branches; i = Pauli index otherwise
  Eigen::Index j = 0;
};

struct AssembledSpectrum {
  SpectralDecomposition decomposition;  ///< energy basis
  std::vector<BranchOrigin> origin;     ///< aligned with decomposition branches
  int order = 0;
  bool used_l4 = false;
  /// Set when the diagonal sector lacks the fourth-order Pauli information and
  /// is therefore only zeroth-order accurate.
  bool diagonal_sector_order0_only = true;
  std::vector<std::string> flags;
};

/// Perturbative spectrum of p.generator(). Order 0 is the exact spectrum of L0;
/// order 2 corrects eigenvalues to O(c^2) everywhere and eigen-operators to
/// O(c^2) off the diagonal sector, and on it too when L4 is present.
AssembledSpectrum assemble_spectrum(const PerturbativeLiouvillian& p, int order, bool use_l4 = true,
                                    const Tolerances& tol = default_tolerances());

struct SteadyState {
  DensityMatrix rho;  ///< energy basis, unit trace, Hermitized
  int order = 0;
  bool diagonal_sector_order0_only = true;
  double hermitian_residue = 0.0;  ///< max |rho - rho^dagger| before symmetrizing
};

/// Perturbative steady state at order 0 or 2. Throws DegenerateSplitting when
/// W2 has no unique stationary branch.
SteadyState steady_state(const PerturbativeLiouvillian& p, int order, bool use_l4 = true,
                         const Tolerances& tol = default_tolerances());

/// Largest second-order rate magnitude (per unit c^2) over off-diagonal f2 and
/// the W2 spectrum.
double max_second_order_rate(const PerturbativeLiouvillian& p);

/// Smallest nonzero |Re f| of the W2 spectrum (per unit c^2): the slowest
/// relaxation rate of the diagonal sector.
double slowest_relaxation_rate(const PerturbativeLiouvillian& p, const Tolerances& tol = default_tolerances());

}  // namespace liouvpt
