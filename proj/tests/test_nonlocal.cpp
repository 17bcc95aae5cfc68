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

#include "liouvpt/models.hpp"
#include "liouvpt/nonlocal.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace liouvpt;
using liouvpt::testing::ket_bra;

namespace {

PerturbativeLiouvillian damped_qubit(double c) { return amplitude_damping_model(1.0).perturbative(c); }

// Root of (s + i omega)(s + kappa) + c^2 g^2 = 0 nearest `near`.
cplx quadratic_root(double omega, double g, double kappa, double c, cplx near) {
  const cplx b = kappa + kI * omega;
  const cplx q = kI * omega * kappa + c * c * g * g;
  const cplx disc = std::sqrt(b * b - 4.0 * q);
  const cplx r1 = (-b + disc) / 2.0, r2 = (-b - disc) / 2.0;
  return std::abs(r1 - near) < std::abs(r2 - near) ? r1 : r2;
}

}  // namespace

TEST_SUITE("nonlocal") {
  TEST_CASE("kernel reduces to L0 without coupling") {
    auto k = exponential_memory_kernel(damped_qubit(0.3), 1.0, true);
    CHECK((k(cplx(0.2, 0.4)) - k.l0).norm() > 0.0);
    k.coupling = 0.0;
    CHECK((k(cplx(0.2, 0.4)) - k.l0).norm() == 0.0);
  }

  TEST_CASE("Markovian kernel poles are the generator spectrum") {
    const auto p = synthetic_full_model(1, 3).perturbative(0.1);
    const auto k = constant_kernel(p);
    const auto poles = pole_set(k);
    REQUIRE(poles.size() == 9);
    const auto exact = spectral_decompose(p.generator());
    CVector found(9);
    for (Eigen::Index m = 0; m < 9; ++m) found(m) = poles[m].s;
    const auto match = match_eigenvalues(found, exact.eigenvalues);
    std::vector<bool> used(9, false);
    for (Eigen::Index m = 0; m < 9; ++m) {
      CHECK(std::abs(found(m) - exact.eigenvalues(match[m])) < 1e-10);
      CHECK_FALSE(used[match[m]]);
      used[match[m]] = true;
      CHECK(poles[m].iterations <= 2);
      CHECK(poles[m].residual <= 1e-9);
      CHECK(poles[m].eigen_operator.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("dephasing with exponential memory matches the quadratic roots") {
    const double g = 0.8, kappa = 1.5, c = 0.4;
    for (double omega : {1.0, 2.3}) {
      const auto k = dephasing_memory_kernel(omega, g, kappa, c);
      for (cplx seed : {cplx(0.0, -omega), cplx(0.0, omega)}) {
        const auto pole = pole_search(k, seed);
        const cplx expect = seed.imag() < 0 ? quadratic_root(omega, g, kappa, c, seed)
                                            : std::conj(quadratic_root(omega, g, kappa, c, std::conj(seed)));
        CHECK(std::abs(pole.s - expect) < 1e-10);
        CHECK(pole.residual <= 1e-9);
      }
    }
    // omega = 0: s (s + kappa) + c^2 g^2 = 0; the slow root is tracked.
    const auto k0 = dephasing_memory_kernel(0.0, g, kappa, c);
    const double c2g2 = c * c * g * g;
    const double disc = std::sqrt(kappa * kappa - 4 * c2g2);
    const double slow = (-kappa + disc) / 2;
    CHECK(std::abs(pole_search(k0, -c2g2 / kappa).s - slow) < 1e-10);
    CHECK(std::abs(pole_search(k0, 1.5 * slow).s - slow) < 1e-10);
    CHECK(std::abs(pole_search(k0, 0.0).s) < 1e-14);  // populations
  }

  TEST_CASE("rotating memory reproduces the time-local coherence pole to fourth order") {
    const auto grid = geometric_grid(0.05, 0.3, 6);
    auto gap = [&](bool rotating) {
      return [rotating](double c) {
        const auto p = damped_qubit(c);
        const auto k = exponential_memory_kernel(p, 2.0, rotating);
        const cplx seed(0.0, -p.basis.omega(1, 0));
        const cplx local = seed + c * c * offdiag_corrections(p, 1, 0).f2;
        return std::abs(pole_search(k, seed).s - local);
      };
    };
    CHECK(order_scan(gap(true), grid).slope >= 3.8);
    // Plain memory differs at second order off the Bohr frequency.
    CHECK(order_scan(gap(false), grid).in_band(1.8, 2.2));
  }

  TEST_CASE("degenerate sector of memory kernels") {
    const auto p = damped_qubit(0.3);
    const auto local = pauli_projection(p.l2, p.basis, 2);
    CHECK((nonlocal_degenerate_sector(constant_kernel(p)).entries - local.entries).norm() == 0.0);
    for (bool rotating : {false, true}) {
      const auto w = nonlocal_degenerate_sector(exponential_memory_kernel(p, 0.7, rotating));
      CHECK((w.entries - local.entries).norm() < 1e-14);
    }

    auto bad = constant_kernel(p);
    bad.abscissa = 0.0;
    CHECK_THROWS_AS(nonlocal_degenerate_sector(bad), InvalidInput);
    try {
      nonlocal_degenerate_sector(bad);
    } catch (const InvalidInput& e) {
      CHECK(std::string(e.what()).find("abscissa") != std::string::npos);
    }
  }

  TEST_CASE("degenerate-sector pole matches the simulated decay rate") {
    const double kappa = 1.0, c = std::sqrt(0.1);
    const auto k = exponential_memory_kernel(damped_qubit(c), kappa, false);
    // Populations obey s^2 + kappa s + c^2 kappa = 0.
    const double slow = (-kappa + std::sqrt(kappa * kappa - 4 * c * c * kappa)) / 2;
    const auto poles = pole_set(k);
    const auto it = std::min_element(poles.begin(), poles.end(), [&](const KernelPole& a, const KernelPole& b) {
      return std::abs(a.s - slow) < std::abs(b.s - slow);
    });
    CHECK(std::abs(it->s - slow) < 1e-10);

    const auto traj = simulate_memory(k, ket_bra(2, 1, 1), {0.0, 40.0, 60.0});
    const double rate = std::log(traj.rho[2](1, 1).real() / traj.rho[1](1, 1).real()) / 20.0;
    CHECK(std::abs(rate - it->s.real()) < 1e-4 * std::abs(it->s.real()));
    CHECK(traj.trace_drift < 1e-9);
  }

  TEST_CASE("memory simulation without memory is refused") {
    const auto k = constant_kernel(damped_qubit(0.3));
    CHECK_THROWS_AS(simulate_memory(k, ket_bra(2, 1, 1), {0.0, 1.0}), InvalidInput);
    const auto m = exponential_memory_kernel(damped_qubit(0.3), 1.0, false);
    CHECK_THROWS_AS(simulate_memory(m, ket_bra(3, 1, 1), {0.0, 1.0}), InvalidInput);
    CHECK_THROWS_AS(exponential_memory_kernel(damped_qubit(0.3), 0.0, false), InvalidInput);
    CHECK_THROWS_AS(dephasing_memory_kernel(-1.0, 1.0, 1.0, 0.1), InvalidInput);
  }

  TEST_CASE("pole search failures") {
    // Equidistant from the eigenvalues 0 and -0.1 of the damped qubit.
    const auto k = constant_kernel(damped_qubit(std::sqrt(0.1)));
    CHECK_THROWS_AS(pole_search(k, cplx(-0.05, 0.0)), ConvergenceError);

    const auto d = dephasing_memory_kernel(1.0, 0.8, 1.5, 0.4);
    PoleSearchOptions short_run;
    short_run.max_iterations = 1;
    CHECK_THROWS_AS(pole_search(d, cplx(0.0, -1.0), short_run), ConvergenceError);
    try {
      pole_search(d, cplx(0.0, -1.0), short_run);
    } catch (const ConvergenceError& e) {
      CHECK(std::string(e.what()).find("iterates") != std::string::npos);
    }

    auto narrow = constant_kernel(damped_qubit(0.3));
    narrow.abscissa = 0.0;
    CHECK_THROWS_AS(pole_search(narrow, cplx(-0.09, 0.0)), ConvergenceError);

    LaplaceKernel empty;
    CHECK_THROWS_AS(pole_search(empty, 0.0), InvalidInput);
  }
}
