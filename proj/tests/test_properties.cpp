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

// Randomized invariants. Every draw comes from a fixed SplitMix64 seed.

#include "liouvpt/dynamics.hpp"
#include "liouvpt/models.hpp"
#include "liouvpt/nonlocal.hpp"
#include "liouvpt/qbm.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace liouvpt;
namespace t = liouvpt::testing;

TEST_SUITE("properties") {
  TEST_CASE("vectorization round trip and the Kronecker identity") {
    SplitMix64 rng(101);
    for (Eigen::Index d = 1; d <= 8; ++d) {
      const Operator a = t::random_operator(rng, d), x = t::random_operator(rng, d), b = t::random_operator(rng, d);
      CHECK(unvec(vec(x)) == x);
      CHECK((vec(a * x * b) - kron(Operator(b.transpose()), a) * vec(x)).norm() < 1e-12 * (1.0 + a.norm() * b.norm() * x.norm()));
    }
  }

  TEST_CASE("free Liouvillians are anti-Hermitian and annihilate the identity") {
    SplitMix64 rng(102);
    for (Eigen::Index d = 2; d <= 6; ++d) {
      const SuperOperator l = free_liouvillian(t::random_hermitian(rng, d));
      CHECK((l + l.adjoint()).norm() < 1e-12);
      CHECK(apply_super(l, Operator::Identity(d, d)).norm() < 1e-12);
    }
  }

  TEST_CASE("trace is a left zero eigenvector of every generator") {
    SplitMix64 rng(103);
    for (Eigen::Index d = 2; d <= 5; ++d) {
      const SuperOperator l = t::random_generator(rng, d);
      CHECK((vec(Operator::Identity(d, d)).adjoint() * l).norm() < 1e-12 * l.norm());
      CHECK(trace_defect(l) < 1e-12 * l.norm());
    }
    for (Eigen::Index d = 3; d <= 6; ++d) {
      const auto m = synthetic_full_model(200 + static_cast<std::uint64_t>(d), d);
      CHECK(trace_defect(m.full_generator(0.3)) < 1e-12);
    }
  }

  TEST_CASE("random decompositions are biorthonormal and reconstruct the generator") {
    SplitMix64 rng(104);
    for (int trial = 0; trial < 12; ++trial) {
      const Eigen::Index d = 2 + trial % 4;
      const SuperOperator l = t::random_generator(rng, d);
      const auto s = spectral_decompose(l);
      const auto n = d * d;
      CHECK((s.left * s.right - SuperOperator::Identity(n, n)).norm() < 1e-8);
      CHECK((s.reconstruct() - l).norm() < 1e-8 * l.norm());
      // Eigenvalues of a real-preserving map come in conjugate pairs.
      for (Eigen::Index k = 0; k < n; ++k) {
        const cplx z = std::conj(s.eigenvalues(k));
        CHECK((s.eigenvalues.array() - z).abs().minCoeff() < 1e-8 * l.norm());
      }
    }
  }

  TEST_CASE("integration preserves the trace") {
    SplitMix64 rng(105);
    for (Eigen::Index d = 2; d <= 4; ++d) {
      const auto traj = integrate(TimeDependentGenerator::constant(t::random_generator(rng, d)), t::random_density(rng, d),
                                  {0.0, 1.0, 5.0, 25.0});
      CHECK(traj.trace_drift < 1e-9);
    }
  }

  TEST_CASE("second-order structure of random models") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const Eigen::Index d = 3 + static_cast<Eigen::Index>(seed % 3);
      const auto p = synthetic_full_model(seed, d).perturbative(0.1);
      const auto w2 = pauli_projection(p.l2, p.basis, 2);
      CHECK(w2.column_sum_defect() < 1e-12);
      CHECK(w2.imaginary_residue < 1e-12);
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          if (i == j) {
            continue;
          }
          // Off-diagonal rates of W2 are nonnegative for Lindblad-form L2.
          CHECK(w2.entries(i, j).real() >= -1e-12);
          const auto a = offdiag_corrections(p, i, j), b = offdiag_corrections(p, j, i);
          CHECK(std::abs(a.f2 - std::conj(b.f2)) < 1e-12);
          CHECK(a.f2.real() <= 1e-12);
        }
      }
      const auto branches = diagonalize_pauli(w2);
      for (const auto& br : branches) CHECK(br.f2.real() <= 1e-12);
    }
  }

  TEST_CASE("harmonic number recurrence on random points") {
    SplitMix64 rng(106);
    int checked = 0;
    while (checked < 1000) {
      const double r = 100.0 * std::sqrt(rng.uniform()), th = 2.0 * std::numbers::pi * rng.uniform();
      const cplx z = std::polar(r, th);
      // Keep away from the poles at negative integers.
      if (std::abs(z - std::round(z.real())) < 1e-3 && z.real() < 0.5) continue;
      if (std::abs(z) < 1e-3) continue;
      const cplx lhs = qbm::harmonic_number(z) - qbm::harmonic_number(z - 1.0);
      CHECK(std::abs(lhs - 1.0 / z) < 1e-12 * std::max(1.0, std::abs(qbm::harmonic_number(z))));
      ++checked;
    }
  }

  TEST_CASE("covariance flow reaches the stationary covariance") {
    SplitMix64 rng(107);
    struct S {
      double gamma0, temperature, cutoff, omega, mass;
    };
    const S specs[] = {{0.05, 0.0, 1000.0, 1.0, 1.0}, {0.1, 1.0, 100.0, 1.0, 1.0}, {0.3, 0.2, 500.0, 2.0, 0.5}};
    for (const auto& sp : specs) {
      qbm::OhmicSpec s;
      s.gamma0 = sp.gamma0;
      s.temperature = sp.temperature;
      s.cutoff = sp.cutoff;
      s.omega = sp.omega;
      s.mass = sp.mass;
      const auto q = qbm::late_time_coefficients(s);
      const auto fixed = qbm::stationary_covariance(q, s.mass);
      for (int k = 0; k < 10; ++k) {
        qbm::GaussianState s0;
        s0.sxx = 0.1 + 3.0 * rng.uniform();
        s0.spp = 0.1 + 3.0 * rng.uniform();
        s0.sxp = (2.0 * rng.uniform() - 1.0) * 0.9 * std::sqrt(s0.sxx * s0.spp);
        s0.mean_x = rng.normal();
        s0.mean_p = rng.normal();
        const auto f = qbm::covariance_flow(q, s.mass, s0, 50.0 / s.gamma0, 1e-12, 4);
        const auto& e = f.states.back();
        CHECK(std::abs(e.sxx - fixed.sxx) < 1e-6 * std::abs(fixed.sxx));
        CHECK(std::abs(e.spp - fixed.spp) < 1e-6 * std::abs(fixed.spp));
        CHECK(std::abs(e.sxp) < 1e-6 * std::sqrt(std::abs(fixed.sxx * fixed.spp)));
      }
    }
  }

  TEST_CASE("poles are self-consistent and closed under conjugation") {
    std::vector<LaplaceKernel> kernels;
    for (std::uint64_t seed : {1u, 4u}) {
      const auto p = synthetic_full_model(seed, 3).perturbative(0.15);
      kernels.push_back(constant_kernel(p));
      kernels.push_back(exponential_memory_kernel(p, 3.0, true));
    }
    kernels.push_back(exponential_memory_kernel(amplitude_damping_model().perturbative(0.3), 1.0, false));
    for (const auto& k : kernels) {
      const auto poles = pole_set(k);
      for (const auto& pole : poles) {
        CHECK(pole.residual <= 1e-9);
        CHECK(pole.s.real() > k.abscissa);
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& other : poles) nearest = std::min(nearest, std::abs(other.s - std::conj(pole.s)));
        CHECK(nearest < 1e-9);
      }
    }
  }
}
