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

// Time-nonlocal master equations d rho/dt = int_0^t K(t - t') rho(t') dt'
// handled in the Laplace domain, K^(s) = L0 + c^2 K2^(s) (+ c^4 K4^(s)).

#pragma once

#include "liouvpt/dynamics.hpp"
#include "liouvpt/perturb.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace liouvpt {

/// Exponential memory with rate kappa:
///   plain     K2^(s) = kappa / (s + kappa) B
///   rotating  K2^(s) = kappa (s + kappa - L0)^-1 B
/// The rotating form reproduces B on each Bohr sector at s = -i omega_ij.
struct ExponentialMemory {
  SuperOperator b;
  double kappa = 1.0;
  bool rotating = false;
};

struct LaplaceKernel {
  EnergyBasis basis;
  SuperOperator l0;  ///< energy basis
  std::function<SuperOperator(cplx)> k2;
  std::function<SuperOperator(cplx)> k4;  ///< may be empty
  double coupling = 0.0;
  /// K^(s) is analytic for Re s > abscissa.
  double abscissa = -std::numeric_limits<double>::infinity();
  bool s_independent = false;
  std::optional<ExponentialMemory> memory;  ///< set by the built-in memory kernels

  SuperOperator operator()(cplx s) const;
  SuperOperator second_order(cplx s) const { return k2(s); }
};

/// Markovian kernel: K2^ = L2 and K4^ = L4 of p, independent of s.
LaplaceKernel constant_kernel(const PerturbativeLiouvillian& p);

/// Exponential memory with B = L2 of p (energy basis).
LaplaceKernel exponential_memory_kernel(const PerturbativeLiouvillian& p, double kappa, bool rotating);

/// Two-level dephasing with plain exponential memory: H = diag(0, omega), with
/// omega >= 0, and K2^(s) = -g^2 / (s + kappa) on both coherences, zero on
/// populations.
LaplaceKernel dephasing_memory_kernel(double omega, double g, double kappa, double c);

struct PoleSearchOptions {
  int max_iterations = 200;
  double tol = 1e-10;  ///< |ds| < tol * max(1, |s|)
  /// Two distinct eigenvalues whose distances to s differ by less than this
  /// (relative to max(1, |s|)) make the tracking ambiguous.
  double ambiguity = 1e-12;
};

struct KernelPole {
  cplx s;
  Operator eigen_operator;  ///< unit Hilbert-Schmidt norm, energy basis
  double residual = 0.0;    ///< |K^(s) o - s o|
  int iterations = 0;
  std::vector<cplx> iterates;
};

/// Solves s = eigenvalue of K^(s) nearest s, starting at s_start, by secant
/// iteration with step damping. Throws ConvergenceError with the iterate trace
/// on failure and ConvergenceError on ambiguous eigenvalue tracking.
KernelPole pole_search(const LaplaceKernel& k, cplx s_start, const PoleSearchOptions& opt = {});

/// Seeds -i omega_ij for off-diagonal sectors and c^2 times the W2 spectrum of
/// K2^(0) for the diagonal sector; returns one pole per seed.
std::vector<KernelPole> pole_set(const LaplaceKernel& k, const PoleSearchOptions& opt = {});

/// Pauli projection of K2^(0). Throws InvalidInput when s = 0 is not inside
/// the declared half-plane of analyticity.
PauliMatrix nonlocal_degenerate_sector(const LaplaceKernel& k);

/// Time-domain oracle for the built-in memory kernels. Embeds the convolution
/// with an auxiliary operator xi(t):
///   d rho/dt = (L0 + c^4 K4) rho + c^2 xi
///   d xi/dt  = kappa B rho - kappa xi (+ L0 xi for the rotating form)
/// and returns rho sampled at `times` (energy basis).
Trajectory simulate_memory(const LaplaceKernel& k, const DensityMatrix& rho0, const std::vector<double>& times,
                           const IntegrateOptions& opt = {});

}  // namespace liouvpt
