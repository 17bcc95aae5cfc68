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

#include "liouvpt/models.hpp"
#include "liouvpt/superop.hpp"

#include <string>

namespace liouvpt::testing {

inline std::string data_path(const std::string& name) { return std::string(LIOUVPT_TEST_DATA) + "/" + name; }

inline Operator random_operator(SplitMix64& rng, Eigen::Index d) {
  Operator a(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) a(i, j) = rng.complex_normal();
  }
  return a;
}

inline Operator random_hermitian(SplitMix64& rng, Eigen::Index d) {
  const Operator a = random_operator(rng, d);
  return 0.5 * (a + a.adjoint());
}

inline DensityMatrix random_density(SplitMix64& rng, Eigen::Index d) {
  const Operator a = random_operator(rng, d);
  const DensityMatrix r = a * a.adjoint();
  return r / r.trace();
}

/// Free part plus d random dissipators and a random shift: a stable,
/// trace-preserving generator with a unique steady state almost surely.
inline SuperOperator random_generator(SplitMix64& rng, Eigen::Index d) {
  SuperOperator l = free_liouvillian(random_hermitian(rng, d));
  for (Eigen::Index k = 0; k < d; ++k) {
    const Operator j = random_operator(rng, d);
    l += lindblad_dissipator(j / j.norm(), 0.5 + rng.uniform());
  }
  return l + commutator_generator(0.3 * random_hermitian(rng, d));
}

inline Operator ket_bra(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
  Operator m = Operator::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

}  // namespace liouvpt::testing
