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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace liouvpt {

template <typename Scalar>
using Complex = std::complex<Scalar>;

/// Dense operator on a d-dimensional Hilbert space.
template <typename Scalar>
using OperatorT = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense superoperator acting on column-stacked operators (d^2 x d^2).
template <typename Scalar>
using SuperOperatorT = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorT = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

using cplx = Complex<double>;
using Operator = OperatorT<double>;
using SuperOperator = SuperOperatorT<double>;
using CVector = VectorT<double>;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// A density matrix is an Operator that is expected (not required) to be
/// Hermitian with unit trace. Positivity is never assumed.
using DensityMatrix = Operator;

inline constexpr cplx kI{0.0, 1.0};

/// Numerical tolerances shared by all modules. Every field is a plain value
/// so callers can copy and adjust.
struct Tolerances {
  double hermiticity = 1e-10;   ///< absolute, max-entry of H - H^dagger
  double trace = 1e-10;         ///< absolute, trace preservation / unit trace
  double eigen_residual = 1e-8; ///< relative residual of eigenpairs
  double cluster = 1e-9;        ///< eigenvalue clustering radius
  double max_condition = 1e12;  ///< eigenvector-matrix condition bound
  double pauli_gap = 1e-6;      ///< minimum |f_i - f_j| relative to max |f|
  double resonance = 1e-9;      ///< Bohr-frequency coincidence threshold
};

/// Default tolerances, with the absolute hermiticity/trace tolerance
/// overridden by the LIOUVILLE_TOL environment variable when it is set.
Tolerances default_tolerances();

// Error hierarchy. Every failure mode named in the operation contracts maps to
// one of these; messages carry the offending values.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ResonanceError : public Error {
 public:
  using Error::Error;
};

class DegenerateSplitting : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Vectorization. Column stacking: vec(A X B) = (B^T kron A) vec(X), and the
// operator entry (i, j) lives at index i + j * d.

inline Eigen::Index vec_index(Eigen::Index i, Eigen::Index j, Eigen::Index d) { return i + j * d; }

template <typename Derived>
VectorT<typename Derived::RealScalar> vec(const Eigen::MatrixBase<Derived>& op) {
  using Scalar = typename Derived::RealScalar;
  const OperatorT<Scalar> tmp = op.template cast<Complex<Scalar>>();
  return Eigen::Map<const VectorT<Scalar>>(tmp.data(), tmp.size());
}

template <typename Derived>
OperatorT<typename Derived::RealScalar> unvec(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::RealScalar;
  const auto n = v.size();
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d * d != n) {
    throw InvalidInput("unvec: length " + std::to_string(n) + " is not a perfect square");
  }
  const VectorT<Scalar> tmp = v.template cast<Complex<Scalar>>();
  return Eigen::Map<const OperatorT<Scalar>>(tmp.data(), d, d);
}

template <typename DerivedA, typename DerivedB>
SuperOperatorT<typename DerivedA::RealScalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                                   const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::RealScalar;
  SuperOperatorT<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          Complex<Scalar>(a(i, j)) * b.template cast<Complex<Scalar>>();
    }
  }
  return out;
}

/// Superoperator of X -> A X B.
template <typename DerivedA, typename DerivedB>
SuperOperatorT<typename DerivedA::RealScalar> sandwich(const Eigen::MatrixBase<DerivedA>& a,
                                                       const Eigen::MatrixBase<DerivedB>& b) {
  return kron(b.transpose(), a);
}

/// Superoperator of X -> A X.
template <typename Derived>
SuperOperatorT<typename Derived::RealScalar> left_mul(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::RealScalar;
  return sandwich(a, OperatorT<Scalar>::Identity(a.rows(), a.cols()));
}

/// Superoperator of X -> X B.
template <typename Derived>
SuperOperatorT<typename Derived::RealScalar> right_mul(const Eigen::MatrixBase<Derived>& b) {
  using Scalar = typename Derived::RealScalar;
  return sandwich(OperatorT<Scalar>::Identity(b.rows(), b.cols()), b);
}

/// Applies a superoperator to an operator.
template <typename DerivedS, typename DerivedX>
OperatorT<typename DerivedS::RealScalar> apply_super(const Eigen::MatrixBase<DerivedS>& s,
                                               const Eigen::MatrixBase<DerivedX>& x) {
  return unvec(s * vec(x));
}

template <typename Derived>
typename Derived::RealScalar hermiticity_defect(const Eigen::MatrixBase<Derived>& op) {
  if (op.size() == 0) return 0;
  return (op - op.adjoint()).cwiseAbs().maxCoeff();
}

/// Hilbert-Schmidt inner product <a, b> = tr(a^dagger b).
template <typename DerivedA, typename DerivedB>
Complex<typename DerivedA::RealScalar> hs_inner(const Eigen::MatrixBase<DerivedA>& a,
                                                const Eigen::MatrixBase<DerivedB>& b) {
  return (a.adjoint() * b).trace();
}

/// Maximum absolute entry; used for every "to tolerance" comparison.
template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? typename Derived::RealScalar(0) : m.cwiseAbs().maxCoeff();
}

}  // namespace liouvpt
