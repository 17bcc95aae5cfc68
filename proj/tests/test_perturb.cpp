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
#include "liouvpt/models.hpp"
#include "liouvpt/perturb.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace liouvpt;
using liouvpt::testing::ket_bra;

namespace {

PerturbativeLiouvillian damped_qubit() {
  const auto m = amplitude_damping_model(1.0);
  return m.perturbative(*m.coupling);
}

PauliMatrix random_pauli(SplitMix64& rng, Eigen::Index d, int order) {
  PauliMatrix w;
  w.order = order;
  w.entries = Operator::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i != j) w.entries(i, j) = 0.2 + rng.uniform();
    }
    w.entries(j, j) = -w.entries.col(j).sum();
  }
  return w;
}

}  // namespace

TEST_SUITE("perturb") {
  TEST_CASE("off-diagonal corrections of amplitude damping") {
    const auto p = damped_qubit();
    // Energy basis is (g, e); the |e><g| sector is (1, 0).
    const auto eg = offdiag_corrections(p, 1, 0);
    CHECK(std::abs(eg.f2 - cplx(-0.5, 0.0)) < 1e-14);
    CHECK(eg.o2.norm() < 1e-14);
    const auto ge = offdiag_corrections(p, 0, 1);
    CHECK(std::abs(ge.f2 - std::conj(eg.f2)) < 1e-14);
    CHECK_THROWS_AS(offdiag_corrections(p, 1, 1), InvalidInput);
  }

  TEST_CASE("Pauli projection") {
    const auto p = damped_qubit();
    const auto w = pauli_projection(p.l2, p.basis, 2);
    Operator expect(2, 2);
    expect << 0.0, 1.0, 0.0, -1.0;  // (g, e) ordering
    CHECK((w.entries - expect).norm() < 1e-14);
    CHECK(w.column_sum_defect() < 1e-14);
    CHECK(w.imaginary_residue == 0.0);
    CHECK(pauli_projection(p.l0, p.basis, 2).entries.isZero(0.0));
    CHECK_THROWS_AS(pauli_projection(p.l2, p.basis, 3), InvalidInput);
  }

  TEST_CASE("diagonalize a 2x2 Pauli matrix") {
    PauliMatrix w;
    w.entries.resize(2, 2);
    w.entries << -1.0, 0.0, 1.0, 0.0;
    const auto b = diagonalize_pauli(w);
    REQUIRE(b.size() == 2);
    CHECK(std::abs(b[0].f2 - cplx(-1.0)) < 1e-14);
    CHECK(std::abs(b[1].f2) < 1e-14);
    CHECK(b[1].stationary);
    CHECK((b[1].right - Eigen::Vector2cd(0.0, 1.0)).norm() < 1e-14);
    CHECK((b[1].left - Eigen::Vector2cd(1.0, 1.0)).norm() < 1e-14);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(std::abs(cplx(b[j].left.transpose() * b[i].right) - (i == j ? 1.0 : 0.0)) < 1e-14);
      }
    }
  }

  TEST_CASE("stationary left vector is all ones") {
    SplitMix64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
      const auto b = diagonalize_pauli(random_pauli(rng, 4, 2));
      const auto zero = std::find_if(b.begin(), b.end(), [](const auto& x) { return x.stationary; });
      REQUIRE(zero != b.end());
      CHECK((zero->left - CVector::Ones(4)).norm() < 1e-10);
      CHECK(zero->right.real().minCoeff() >= 0.0);
      CHECK(zero->right.real().sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("degenerate W2 splittings are rejected") {
    PauliMatrix w;
    w.entries = Operator::Zero(3, 3);
    w.entries(0, 1) = 1.0;
    w.entries(1, 1) = -1.0;
    w.entries(0, 2) = 1.0;
    w.entries(2, 2) = -1.0;
    CHECK_THROWS_AS(diagonalize_pauli(w), DegenerateSplitting);
  }

  TEST_CASE("degenerate correction against eigenvectors of W2 + eps W4") {
    SplitMix64 rng(21);
    const auto w2 = random_pauli(rng, 3, 2);
    const auto w4 = random_pauli(rng, 3, 4);
    const auto branches = degenerate_correction(w4, diagonalize_pauli(w2));

    PauliMatrix zero;
    zero.order = 4;
    zero.entries = Operator::Zero(3, 3);
    for (const auto& b : degenerate_correction(zero, diagonalize_pauli(w2))) CHECK(b.o2_diag.norm() == 0.0);

    // g(eps) = (v(eps) - r) / eps with left . v = 1; Richardson over eps = c^2.
    auto g = [&](const DegenerateBranch& b, double eps) {
      Eigen::ComplexEigenSolver<Operator> es(w2.entries + eps * w4.entries);
      Eigen::Index k = 0;
      (es.eigenvalues().array() - b.f2).abs().minCoeff(&k);
      CVector v = es.eigenvectors().col(k);
      v /= cplx(b.left.transpose() * v);
      return CVector((v - b.right) / eps);
    };
    for (const auto& b : branches) {
      REQUIRE(b.has_o2);
      const double c = 1e-3;
      const CVector rich = (100.0 * g(b, c * c / 10.0) - g(b, c * c)) / 99.0;
      CHECK((rich - b.o2_diag).norm() < 1e-6 * std::max(1.0, b.o2_diag.norm()));
      CHECK((g(b, 1e-8) - b.o2_diag).norm() < 1e-5 * std::max(1.0, b.o2_diag.norm()));
    }

    // Rescaling right vectors and counter-scaling left ones rescales each
    // correction with its own branch.
    auto scaled = diagonalize_pauli(w2);
    const std::vector<cplx> alpha{{2.0, 1.0}, {-0.5, 0.0}, {0.0, 3.0}};
    for (std::size_t k = 0; k < scaled.size(); ++k) {
      scaled[k].right *= alpha[k];
      scaled[k].left /= alpha[k];
    }
    scaled = degenerate_correction(w4, scaled);
    for (std::size_t k = 0; k < scaled.size(); ++k) {
      CHECK((scaled[k].o2_diag / alpha[k] - branches[k].o2_diag).norm() < 1e-12);
    }
  }

  TEST_CASE("assembled spectrum") {
    const auto p = damped_qubit();
    const auto a0 = assemble_spectrum(p, 0);
    const auto e0 = spectral_decompose(p.l0);
    for (Eigen::Index k = 0; k < a0.decomposition.size(); ++k) {
      CHECK(std::abs(a0.decomposition.eigenvalues(k) - e0.eigenvalues(k)) < 1e-14);
    }
    const auto a2 = assemble_spectrum(p, 2);
    const auto ex = spectral_decompose(p.generator());
    const auto match = match_eigenvalues(a2.decomposition.eigenvalues, ex.eigenvalues);
    for (Eigen::Index k = 0; k < a2.decomposition.size(); ++k) {
      CHECK(std::abs(a2.decomposition.eigenvalues(k) - ex.eigenvalues(match[k])) < 1e-14);
    }
    CHECK(a2.diagonal_sector_order0_only);
    CHECK_FALSE(a2.used_l4);
    CHECK_THROWS_AS(assemble_spectrum(p, 1), InvalidInput);
  }

  TEST_CASE("degenerate-sector eigen-operators need L4") {
    const auto base = synthetic_full_model(1, 3).perturbative(0.2);
    const auto grid = geometric_grid(0.02, 0.2, 9);
    auto error = [&](bool use_l4) {
      return [&, use_l4](double c) {
        const auto p = base.with_coupling(c);
        const auto a = assemble_spectrum(p, 2, use_l4);
        const auto ex = spectral_decompose(p.generator());
        const auto m = match_eigenvalues(a.decomposition.eigenvalues, ex.eigenvalues);
        double worst = 0.0;
        for (Eigen::Index k = 0; k < a.decomposition.size(); ++k) {
          if (a.origin[k].degenerate) {
            worst = std::max(worst, branch_distance(a.decomposition.right.col(k), ex.right.col(m[k])));
          }
        }
        return worst;
      };
    };
    const auto with = order_scan(error(true), grid);
    const auto without = order_scan(error(false), grid);
    CHECK(with.slope >= 3.8);
    CHECK(without.in_band(1.8, 2.2));
  }

  TEST_CASE("steady states") {
    const auto p = damped_qubit();
    for (int order : {0, 2}) {
      const auto s = steady_state(p, order);
      CHECK((s.rho - ket_bra(2, 0, 0)).norm() < 1e-14);
      CHECK(s.order == order);
    }
    const auto idle = PerturbativeLiouvillian::create(p.hamiltonian, SuperOperator::Zero(4, 4), std::nullopt, 0.1);
    CHECK_THROWS_AS(steady_state(idle, 2), DegenerateSplitting);

    const auto base = synthetic_full_model(1, 3).perturbative(0.2);
    const auto grid = geometric_grid(0.02, 0.2, 9);
    auto error = [&](bool use_l4) {
      return [&, use_l4](double c) {
        const auto q = base.with_coupling(c);
        return (steady_state(q, 2, use_l4).rho - exact_steady_state(q.generator())).norm();
      };
    };
    CHECK(order_scan(error(true), grid).slope >= 3.8);
    CHECK(order_scan(error(false), grid).in_band(1.8, 2.2));
    const auto s = steady_state(base, 2, false);
    CHECK(s.diagonal_sector_order0_only);
    CHECK_FALSE(steady_state(base, 2, true).diagonal_sector_order0_only);
  }

  TEST_CASE("model without L4 is flagged") {
    const auto m = synthetic_full_model(1, 3);
    auto p = m.perturbative(0.1).without_l4();
    CHECK_FALSE(p.has_l4());
    const auto a = assemble_spectrum(p, 2);
    CHECK(a.diagonal_sector_order0_only);
    CHECK_FALSE(a.flags.empty());
  }

  TEST_CASE("values for the stored synthetic model") {
    // Frozen from tests/oracles/perturb_goldens.py (row-major numpy build).
    const auto p = load_model(testing::data_path("synthetic_s1_d3.json")).perturbative(0.1);
    const double energies[] = {1.3572545093987516, 1.721453397895838, 2.807676081643245};
    for (int k = 0; k < 3; ++k) CHECK(p.basis.energies(k) == doctest::Approx(energies[k]).epsilon(1e-13));

    struct F2 {
      int i, j;
      cplx f;
    };
    const F2 f2[] = {{0, 1, {-0.7634298161708118, -0.1707566083987186}},
                     {0, 2, {-1.07284515585772, -0.6358343464909852}},
                     {1, 2, {-1.079287203951011, -0.404656064443921}}};
    for (const auto& e : f2) {
      CHECK(std::abs(offdiag_corrections(p, e.i, e.j).f2 - e.f) < 1e-12);
      CHECK(std::abs(offdiag_corrections(p, e.j, e.i).f2 - std::conj(e.f)) < 1e-12);
    }
    const auto b = diagonalize_pauli(pauli_projection(p.l2, p.basis, 2));
    CHECK(std::abs(b[0].f2 - cplx(-1.305419273306123)) < 1e-12);
    CHECK(std::abs(b[1].f2 - cplx(-0.9088513869353366)) < 1e-12);
    CHECK(std::abs(b[2].f2) < 1e-12);

    const DensityMatrix rho = exact_steady_state(p.generator());
    const double pops[] = {0.2786010787553623, 0.5527344162839729, 0.16866450496066496};
    for (int k = 0; k < 3; ++k) CHECK(std::abs(rho(k, k) - pops[k]) < 1e-12);

    CHECK(max_second_order_rate(p) == doctest::Approx(1.305419273306123).epsilon(1e-12));
    CHECK(slowest_relaxation_rate(p) == doctest::Approx(0.9088513869353366).epsilon(1e-12));
  }

  TEST_CASE("resonant spectra are refused") {
    Operator h = Operator::Zero(3, 3);
    h(1, 1) = 1.0;
    h(2, 2) = 2.0;
    const SuperOperator l2 = lindblad_dissipator(ket_bra(3, 0, 1), 1.0) + lindblad_dissipator(ket_bra(3, 1, 2), 1.0);
    auto p = PerturbativeLiouvillian::create(h, l2, std::nullopt, 0.1);
    CHECK(p.basis.resonant);
    CHECK_THROWS_AS(offdiag_corrections(p, 0, 1), ResonanceError);
    CHECK_THROWS_AS(assemble_spectrum(p, 2), ResonanceError);
  }

  TEST_CASE("invalid blocks are rejected") {
    const auto p = damped_qubit();
    SuperOperator bad = p.l2;
    bad(0, 0) += 0.1;
    CHECK_THROWS_AS(PerturbativeLiouvillian::create(p.hamiltonian, bad, std::nullopt, 0.1), InvalidInput);
    CHECK_THROWS_AS(PerturbativeLiouvillian::create(p.hamiltonian, SuperOperator::Zero(9, 9), std::nullopt, 0.1),
                    InvalidInput);
  }
}
