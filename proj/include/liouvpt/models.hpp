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

#include "liouvpt/perturb.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace liouvpt {

/// SplitMix64 (Steele, Lea and Flood). State advances by 0x9E3779B97F4A7C15;
/// output is the state passed through
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z = z ^ (z >> 31).
/// uniform() = (next() >> 11) * 2^-53; normal() is Box-Muller on two uniforms
/// (first uniform mapped to (0, 1] as 1 - u), returning the cosine branch only.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();
  double normal();
  cplx complex_normal() {
    const double re = normal();
    return {re, normal()};
  }

 private:
  std::uint64_t state_;
};

/// Independent stream for a (seed, purpose) pair.
SplitMix64 stream(std::uint64_t seed, std::uint64_t purpose);

struct LindbladTerm {
  Operator op;
  double rate = 1.0;
};

/// One perturbative block: a sum of dissipators, an optional Hamiltonian
/// shift (rho -> -i [K, rho]) and additive dense superoperators.
struct GeneratorBlock {
  std::vector<LindbladTerm> lindblad;
  std::optional<Operator> hamiltonian_shift;
  std::vector<SuperOperator> superoperators;

  SuperOperator assemble(Eigen::Index dim) const;
};

struct ModelMetadata {
  std::optional<std::uint64_t> seed;
  std::string description;
};

struct ModelSpec {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::string name;
  Eigen::Index dim = 0;
  Operator hamiltonian;
  GeneratorBlock l2;
  std::optional<GeneratorBlock> l4;
  std::optional<double> coupling;  ///< suggested c for commands that need one
  ModelMetadata metadata;

  /// Throws InvalidInput naming the offending field.
  void validate(const Tolerances& tol = default_tolerances()) const;
  SuperOperator l2_superoperator() const { return l2.assemble(dim); }
  std::optional<SuperOperator> l4_superoperator() const;
  /// Blocks in the input basis: L0 + c^2 L2 + c^4 L4.
  SuperOperator full_generator(double c, bool include_l4 = true) const;
  PerturbativeLiouvillian perturbative(double c, const Tolerances& tol = default_tolerances()) const;
};

bool operator==(const ModelSpec& a, const ModelSpec& b);

std::string model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(const std::string& text, const Tolerances& tol = default_tolerances());
void save_model(const ModelSpec& spec, const std::string& path);
ModelSpec load_model(const std::string& path, const Tolerances& tol = default_tolerances());

/// Random non-resonant H with random Lindblad-form L2 and L4, reproducible from
/// the seed. dim must lie in [3, 6].
ModelSpec synthetic_full_model(std::uint64_t seed, Eigen::Index dim);

/// Two-level amplitude damping: H = diag(0, omega) in the (g, e) basis,
/// L2 = D[|g><e|] at unit rate, no L4.
ModelSpec amplitude_damping_model(double omega = 1.0);

/// Three levels g, e1, e2 at zero temperature. Both excited levels decay to g
/// at second order; a Hamiltonian shift and a non-secular term feed the g-e2
/// coherence into the e1 population with a negative sign, which the
/// second-order steady state cannot balance. L4 carries the fourth-order
/// g -> e1 excitation. A seed jitters the parameters by a few percent.
ModelSpec demo_positivity_model(std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace liouvpt
