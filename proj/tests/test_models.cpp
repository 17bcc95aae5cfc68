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
#include "liouvpt/scans.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>

using namespace liouvpt;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("liouvpt_" + name)).string();
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InvalidInput& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("SplitMix64 reference output") {
    SplitMix64 rng(0);
    CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
    CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
    SplitMix64 a(42), b(42);
    for (int k = 0; k < 100; ++k) CHECK(a.next() == b.next());
    SplitMix64 u(7);
    for (int k = 0; k < 1000; ++k) {
      const double x = u.uniform();
      CHECK(x >= 0.0);
      CHECK(x < 1.0);
    }
    CHECK(stream(1, 2).next() != stream(1, 3).next());
    CHECK(stream(1, 2).next() == stream(1, 2).next());
  }

  TEST_CASE("save and load round trip") {
    for (const auto& m : {synthetic_full_model(3, 4), amplitude_damping_model(1.3), demo_positivity_model(5)}) {
      const auto path = temp_path(m.name + ".json");
      save_model(m, path);
      CHECK(load_model(path) == m);
      CHECK(model_from_json(model_to_json(m)) == m);
      std::filesystem::remove(path);
    }
  }

  TEST_CASE("load errors name the problem") {
    const auto missing = temp_path("does_not_exist.json");
    CHECK(message_of([&] { load_model(missing); }).find(missing) != std::string::npos);

    auto j = json::parse(model_to_json(amplitude_damping_model()));
    j["hamiltonian"][0][1] = json::array({0.3, 0.0});
    const auto herm = message_of([&] { model_from_json(j.dump()); });
    CHECK(herm.find("hamiltonian") != std::string::npos);
    CHECK(herm.find("[0][1]") != std::string::npos);

    auto nov = json::parse(model_to_json(amplitude_damping_model()));
    nov.erase("schema_version");
    CHECK(message_of([&] { model_from_json(nov.dump()); }).find("schema_version") != std::string::npos);

    auto future = json::parse(model_to_json(amplitude_damping_model()));
    future["schema_version"] = 99;
    CHECK_THROWS_AS(model_from_json(future.dump()), InvalidInput);
    CHECK_THROWS_AS(model_from_json("{not json"), InvalidInput);

    auto rate = json::parse(model_to_json(amplitude_damping_model()));
    rate["L2"]["lindblad"][0]["rate"] = -1.0;
    CHECK(message_of([&] { model_from_json(rate.dump()); }).find("rate") != std::string::npos);
  }

  TEST_CASE("missing L4 section") {
    auto j = json::parse(model_to_json(synthetic_full_model(1, 3)));
    j.erase("L4");
    const auto m = model_from_json(j.dump());
    CHECK_FALSE(m.l4);
    const auto a = assemble_spectrum(m.perturbative(0.1), 2);
    CHECK(a.diagonal_sector_order0_only);
  }

  TEST_CASE("synthetic model") {
    const auto a = synthetic_full_model(1, 3);
    CHECK(a == synthetic_full_model(1, 3));
    CHECK_FALSE(a == synthetic_full_model(2, 3));
    CHECK(a.metadata.seed == 1u);
    REQUIRE(a.l4);
    CHECK_FALSE(bohr_spectrum(a.hamiltonian).resonant);
    for (Eigen::Index d = 3; d <= 6; ++d) {
      const auto m = synthetic_full_model(11, d);
      CHECK(trace_defect(m.l2_superoperator()) < 1e-12);
      CHECK(trace_defect(*m.l4_superoperator()) < 1e-12);
      const auto s = spectral_decompose(m.full_generator(0.1));
      int zeros = 0;
      for (Eigen::Index k = 0; k < s.size(); ++k) zeros += std::abs(s.eigenvalues(k)) < 1e-10;
      CHECK(zeros == 1);
    }
    CHECK_THROWS_AS(synthetic_full_model(1, 2), InvalidInput);
    CHECK_THROWS_AS(synthetic_full_model(1, 7), InvalidInput);
  }

  TEST_CASE("stored synthetic model matches regeneration") {
    CHECK(load_model(testing::data_path("synthetic_s1_d3.json")) == synthetic_full_model(1, 3));
    CHECK(load_model(testing::data_path("amplitude_damping.json")) == amplitude_damping_model());
    CHECK(load_model(testing::data_path("positivity_demo.json")) == demo_positivity_model());
  }

  TEST_CASE("amplitude damping model") {
    const auto m = amplitude_damping_model(2.0);
    CHECK(m.dim == 2);
    CHECK_FALSE(m.l4);
    REQUIRE(m.coupling);
    CHECK(*m.coupling * *m.coupling == doctest::Approx(0.1));
    CHECK(trace_defect(m.l2_superoperator()) < 1e-15);
    CHECK_THROWS_AS(amplitude_damping_model(0.0), InvalidInput);
  }

  TEST_CASE("demonstration model violates positivity at second order") {
    const auto m = demo_positivity_model();
    CHECK(trace_defect(m.l2_superoperator()) < 1e-12);
    CHECK(trace_defect(*m.l4_superoperator()) < 1e-12);
    const auto p = m.perturbative(0.1);
    const auto naive = positivity_audit(steady_state(p, 2, false).rho);
    CHECK(naive.min_eigenvalue < 0.0);
    CHECK_FALSE(naive.positive());
    const auto exact = positivity_audit(p.basis.to_energy(exact_steady_state(m.full_generator(0.1))));
    CHECK(exact.positive());

    // Exact populations from the numpy oracle.
    const double pops[] = {0.992981947709833, 0.007009319422356098, 8.732867810956439e-06};
    const DensityMatrix rho = p.basis.to_energy(exact_steady_state(m.full_generator(0.1)));
    for (int k = 0; k < 3; ++k) CHECK(std::abs(rho(k, k) - pops[k]) < 1e-12);
    CHECK(exact.min_eigenvalue == doctest::Approx(1.4323607148847635e-07).epsilon(1e-6));
  }

  TEST_CASE("negativity exponent is stable across seeds") {
    const auto grid = geometric_grid(0.02, 0.2, 7);
    const auto base = positivity_scan(demo_positivity_model(), grid);
    for (double v : base.naive_min) CHECK(v < 0.0);
    for (double v : base.exact_min) CHECK(v >= -1e-12);
    CHECK(base.corrected_scan.slope >= base.naive_scan.slope + 2.0 - 0.2);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto s = positivity_scan(demo_positivity_model(seed), grid);
      CAPTURE(seed);
      CHECK(std::abs(s.naive_scan.slope - base.naive_scan.slope) <= 0.2);
    }
  }
}
