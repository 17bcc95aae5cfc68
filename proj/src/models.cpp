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

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace liouvpt {

using nlohmann::json;

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SplitMix64 stream(std::uint64_t seed, std::uint64_t purpose) {
  SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (purpose + 1)));
  return SplitMix64(mix.next());
}

// ---------------------------------------------------------------------------

SuperOperator GeneratorBlock::assemble(Eigen::Index dim) const {
  SuperOperator s = SuperOperator::Zero(dim * dim, dim * dim);
  for (const auto& t : lindblad) s += lindblad_dissipator(t.op, t.rate);
  if (hamiltonian_shift) s += commutator_generator(*hamiltonian_shift);
  for (const auto& x : superoperators) s += x;
  return s;
}

std::optional<SuperOperator> ModelSpec::l4_superoperator() const {
  if (!l4) return std::nullopt;
  return l4->assemble(dim);
}

SuperOperator ModelSpec::full_generator(double c, bool include_l4) const {
  const double c2 = c * c;
  SuperOperator g = free_liouvillian(hamiltonian) + c2 * l2_superoperator();
  if (include_l4 && l4) g += (c2 * c2) * l4->assemble(dim);
  return g;
}

PerturbativeLiouvillian ModelSpec::perturbative(double c, const Tolerances& tol) const {
  validate(tol);
  return PerturbativeLiouvillian::create(hamiltonian, l2_superoperator(), l4_superoperator(), c, tol);
}

namespace {

void check_shape(const Operator& m, Eigen::Index d, const std::string& field) {
  if (m.rows() != d || m.cols() != d) {
    std::ostringstream msg;
    msg << field << ": shape " << m.rows() << "x" << m.cols() << ", expected " << d << "x" << d;
    throw InvalidInput(msg.str());
  }
  if (!m.allFinite()) throw InvalidInput(field + ": non-finite entry");
}

void check_hermitian(const Operator& m, const std::string& field, const Tolerances& tol) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      const double defect = std::abs(m(i, j) - std::conj(m(j, i)));
      if (defect > tol.hermiticity) {
        std::ostringstream msg;
        msg << field << ": not Hermitian at entry [" << i << "][" << j << "] (|H_ij - conj(H_ji)| = " << defect << ")";
        throw InvalidInput(msg.str());
      }
    }
  }
}

void check_block(const GeneratorBlock& b, Eigen::Index d, const std::string& field, const Tolerances& tol) {
  for (std::size_t k = 0; k < b.lindblad.size(); ++k) {
    const std::string f = field + ".lindblad[" + std::to_string(k) + "]";
    check_shape(b.lindblad[k].op, d, f + ".operator");
    if (!(b.lindblad[k].rate >= 0.0) || !std::isfinite(b.lindblad[k].rate)) {
      throw InvalidInput(f + ".rate: must be finite and nonnegative");
    }
  }
  if (b.hamiltonian_shift) {
    check_shape(*b.hamiltonian_shift, d, field + ".hamiltonian_shift");
    check_hermitian(*b.hamiltonian_shift, field + ".hamiltonian_shift", tol);
  }
  for (std::size_t k = 0; k < b.superoperators.size(); ++k) {
    const std::string f = field + ".superoperators[" + std::to_string(k) + "]";
    const auto& s = b.superoperators[k];
    if (s.rows() != d * d || s.cols() != d * d) throw InvalidInput(f + ": wrong shape");
    if (!s.allFinite()) throw InvalidInput(f + ": non-finite entry");
  }
  const SuperOperator s = b.assemble(d);
  const double defect = trace_defect(s);
  if (defect > tol.trace * std::max(1.0, max_abs(s))) {
    std::ostringstream msg;
    msg << field << ": block is not trace preserving (defect " << defect << ")";
    throw InvalidInput(msg.str());
  }
}

}  // namespace

void ModelSpec::validate(const Tolerances& tol) const {
  if (schema_version != kSchemaVersion) {
    throw InvalidInput("schema_version: unsupported value " + std::to_string(schema_version));
  }
  if (dim < 1) throw InvalidInput("dim: must be positive");
  check_shape(hamiltonian, dim, "hamiltonian");
  check_hermitian(hamiltonian, "hamiltonian", tol);
  check_block(l2, dim, "L2", tol);
  if (l4) check_block(*l4, dim, "L4", tol);
  if (coupling && (!(*coupling >= 0.0) || !std::isfinite(*coupling))) {
    throw InvalidInput("coupling: must be finite and nonnegative");
  }
}

bool operator==(const ModelSpec& a, const ModelSpec& b) {
  auto same_block = [](const GeneratorBlock& x, const GeneratorBlock& y) {
    if (x.lindblad.size() != y.lindblad.size() || x.superoperators.size() != y.superoperators.size()) return false;
    for (std::size_t k = 0; k < x.lindblad.size(); ++k) {
      if (x.lindblad[k].rate != y.lindblad[k].rate || x.lindblad[k].op != y.lindblad[k].op) return false;
    }
    for (std::size_t k = 0; k < x.superoperators.size(); ++k) {
      if (x.superoperators[k] != y.superoperators[k]) return false;
    }
    if (x.hamiltonian_shift.has_value() != y.hamiltonian_shift.has_value()) return false;
    return !x.hamiltonian_shift || *x.hamiltonian_shift == *y.hamiltonian_shift;
  };
  if (a.schema_version != b.schema_version || a.name != b.name || a.dim != b.dim) return false;
  if (a.hamiltonian != b.hamiltonian || !same_block(a.l2, b.l2)) return false;
  if (a.l4.has_value() != b.l4.has_value() || (a.l4 && !same_block(*a.l4, *b.l4))) return false;
  return a.coupling == b.coupling && a.metadata.seed == b.metadata.seed &&
         a.metadata.description == b.metadata.description;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json matrix_to_json(const Operator& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

cplx complex_from_json(const json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw InvalidInput(field + ": expected [re, im]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

Operator matrix_from_json(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw InvalidInput(field + ": expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  if (!v[0].is_array()) throw InvalidInput(field + "[0]: expected a row array");
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  Operator m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidInput(field + "[" + std::to_string(i) + "]: ragged row");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = complex_from_json(row[static_cast<std::size_t>(j)],
                                  field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
  }
  return m;
}

json block_to_json(const GeneratorBlock& b) {
  json out;
  out["lindblad"] = json::array();
  for (const auto& t : b.lindblad) out["lindblad"].push_back({{"operator", matrix_to_json(t.op)}, {"rate", t.rate}});
  if (b.hamiltonian_shift) out["hamiltonian_shift"] = matrix_to_json(*b.hamiltonian_shift);
  out["superoperators"] = json::array();
  for (const auto& s : b.superoperators) out["superoperators"].push_back(matrix_to_json(s));
  return out;
}

GeneratorBlock block_from_json(const json& v, const std::string& field) {
  if (!v.is_object()) throw InvalidInput(field + ": expected an object");
  GeneratorBlock b;
  if (v.contains("lindblad")) {
    const auto& arr = v["lindblad"];
    if (!arr.is_array()) throw InvalidInput(field + ".lindblad: expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string f = field + ".lindblad[" + std::to_string(k) + "]";
      if (!arr[k].is_object() || !arr[k].contains("operator")) throw InvalidInput(f + ": missing operator");
      LindbladTerm t;
      t.op = matrix_from_json(arr[k]["operator"], f + ".operator");
      if (arr[k].contains("rate")) {
        if (!arr[k]["rate"].is_number()) throw InvalidInput(f + ".rate: expected a number");
        t.rate = arr[k]["rate"].get<double>();
      }
      b.lindblad.push_back(std::move(t));
    }
  }
  if (v.contains("hamiltonian_shift") && !v["hamiltonian_shift"].is_null()) {
    b.hamiltonian_shift = matrix_from_json(v["hamiltonian_shift"], field + ".hamiltonian_shift");
  }
  if (v.contains("superoperators")) {
    const auto& arr = v["superoperators"];
    if (!arr.is_array()) throw InvalidInput(field + ".superoperators: expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      b.superoperators.push_back(matrix_from_json(arr[k], field + ".superoperators[" + std::to_string(k) + "]"));
    }
  }
  return b;
}

}  // namespace

std::string model_to_json(const ModelSpec& spec) {
  json j;
  j["schema_version"] = spec.schema_version;
  j["name"] = spec.name;
  j["dim"] = spec.dim;
  j["hamiltonian"] = matrix_to_json(spec.hamiltonian);
  j["L2"] = block_to_json(spec.l2);
  if (spec.l4) j["L4"] = block_to_json(*spec.l4);
  if (spec.coupling) j["coupling"] = *spec.coupling;
  json meta;
  if (spec.metadata.seed) meta["seed"] = *spec.metadata.seed;
  meta["description"] = spec.metadata.description;
  j["metadata"] = meta;
  return j.dump(2);
}

ModelSpec model_from_json(const std::string& text, const Tolerances& tol) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInput("model file: top level must be an object");
  for (const char* key : {"schema_version", "dim", "hamiltonian", "L2"}) {
    if (!j.contains(key)) throw InvalidInput(std::string(key) + ": required field missing");
  }
  ModelSpec s;
  if (!j["schema_version"].is_number_integer()) throw InvalidInput("schema_version: expected an integer");
  s.schema_version = j["schema_version"].get<int>();
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw InvalidInput("name: expected a string");
    s.name = j["name"].get<std::string>();
  }
  if (!j["dim"].is_number_integer()) throw InvalidInput("dim: expected an integer");
  s.dim = j["dim"].get<Eigen::Index>();
  s.hamiltonian = matrix_from_json(j["hamiltonian"], "hamiltonian");
  s.l2 = block_from_json(j["L2"], "L2");
  if (j.contains("L4") && !j["L4"].is_null()) s.l4 = block_from_json(j["L4"], "L4");
  if (j.contains("coupling") && !j["coupling"].is_null()) {
    if (!j["coupling"].is_number()) throw InvalidInput("coupling: expected a number");
    s.coupling = j["coupling"].get<double>();
  }
  if (j.contains("metadata")) {
    const auto& m = j["metadata"];
    if (!m.is_object()) throw InvalidInput("metadata: expected an object");
    if (m.contains("seed") && !m["seed"].is_null()) {
      if (!m["seed"].is_number_unsigned() && !m["seed"].is_number_integer()) {
        throw InvalidInput("metadata.seed: expected a nonnegative integer");
      }
      s.metadata.seed = m["seed"].get<std::uint64_t>();
    }
    if (m.contains("description")) s.metadata.description = m["description"].get<std::string>();
  }
  s.validate(tol);
  return s;
}

void save_model(const ModelSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open model file for writing: " + path);
  out << model_to_json(spec) << '\n';
  if (!out) throw Error("failed writing model file: " + path);
}

ModelSpec load_model(const std::string& path, const Tolerances& tol) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return model_from_json(buf.str(), tol);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Model zoo

namespace {

Operator ket_bra(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
  Operator m = Operator::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

Operator random_operator(SplitMix64& rng, Eigen::Index d) {
  Operator m(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) m(i, j) = rng.complex_normal();
  }
  return m;
}

Operator random_unitary(SplitMix64& rng, Eigen::Index d) {
  const Operator g = random_operator(rng, d);
  Eigen::HouseholderQR<Operator> qr(g);
  Operator q = qr.householderQ() * Operator::Identity(d, d);
  const Operator r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k) {
    const cplx rk = r(k, k);
    if (std::abs(rk) > 0) q.col(k) *= rk / std::abs(rk);
  }
  return q;
}

GeneratorBlock random_block(SplitMix64& rng, Eigen::Index d) {
  GeneratorBlock b;
  for (Eigen::Index k = 0; k < d; ++k) {
    Operator l = random_operator(rng, d);
    l /= l.norm();
    b.lindblad.push_back({l, 1.0});
  }
  const Operator g = random_operator(rng, d);
  b.hamiltonian_shift = 0.25 * (g + g.adjoint());
  return b;
}

// Smallest gap among Bohr frequencies (including 0) for sorted energies.
double bohr_gap(const std::vector<double>& e) {
  std::vector<double> w;
  for (double a : e) {
    for (double b : e) w.push_back(a - b);
  }
  std::sort(w.begin(), w.end());
  std::vector<double> distinct;
  double gap = std::numeric_limits<double>::infinity();
  // Each nonzero Bohr frequency appears once; zero appears d times.
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    const double g = w[k + 1] - w[k];
    if (w[k] == 0.0 && w[k + 1] == 0.0) continue;
    gap = std::min(gap, g);
  }
  return gap;
}

bool unique_steady_state(const ModelSpec& s, double c) {
  const SuperOperator g = s.full_generator(c);
  Eigen::ComplexEigenSolver<SuperOperator> es(g, false);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  int zeros = 0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (std::abs(es.eigenvalues()(k)) <= 1e-9 * scale) ++zeros;
  }
  return zeros == 1;
}

}  // namespace

ModelSpec synthetic_full_model(std::uint64_t seed, Eigen::Index dim) {
  if (dim < 3 || dim > 6) throw InvalidInput("synthetic_full_model: dim must lie in [3, 6]");
  constexpr int kMaxAttempts = 64;
  // Bohr frequencies crowd as dim^2 into a window of width ~dim.
  const double min_bohr_gap = 0.2 * std::pow(3.0 / static_cast<double>(dim), 3);
  const auto tol = default_tolerances();
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto rng_h = stream(seed, 4 * static_cast<std::uint64_t>(attempt) + 0);
    auto rng_l2 = stream(seed, 4 * static_cast<std::uint64_t>(attempt) + 1);
    auto rng_l4 = stream(seed, 4 * static_cast<std::uint64_t>(attempt) + 2);

    std::vector<double> e(static_cast<std::size_t>(dim));
    for (auto& x : e) x = static_cast<double>(dim) * rng_h.uniform();
    std::sort(e.begin(), e.end());
    if (bohr_gap(e) < min_bohr_gap) continue;
    const Operator u = random_unitary(rng_h, dim);
    RVector ev(dim);
    for (Eigen::Index k = 0; k < dim; ++k) ev(k) = e[static_cast<std::size_t>(k)];
    Operator h = u * ev.cast<cplx>().asDiagonal() * u.adjoint();
    h = 0.5 * (h + h.adjoint());

    ModelSpec s;
    s.name = "synthetic-d" + std::to_string(dim) + "-s" + std::to_string(seed);
    s.dim = dim;
    s.hamiltonian = h;
    s.l2 = random_block(rng_l2, dim);
    s.l4 = random_block(rng_l4, dim);
    s.coupling = 0.1;
    s.metadata.seed = seed;
    s.metadata.description = "random Lindblad-form L2 and L4 over a non-resonant Hamiltonian (attempt " +
                             std::to_string(attempt) + ")";

    if (bohr_spectrum(h, tol).resonant) continue;
    if (!unique_steady_state(s, 0.1)) continue;
    try {
      const auto p = s.perturbative(0.1);
      diagonalize_pauli(pauli_projection(p.l2, p.basis, 2), tol);
    } catch (const Error&) {
      continue;
    }
    return s;
  }
  throw Error("synthetic_full_model: no admissible model after " + std::to_string(kMaxAttempts) + " attempts");
}

ModelSpec amplitude_damping_model(double omega) {
  if (!(omega > 0.0)) throw InvalidInput("amplitude_damping_model: omega must be positive");
  ModelSpec s;
  s.name = "amplitude-damping";
  s.dim = 2;
  s.hamiltonian = Operator::Zero(2, 2);
  s.hamiltonian(1, 1) = omega;
  s.l2.lindblad.push_back({ket_bra(2, 0, 1), 1.0});
  s.coupling = std::sqrt(0.1);
  s.metadata.description = "two-level amplitude damping, basis (g, e); c^2 is the decay rate";
  return s;
}

ModelSpec demo_positivity_model(std::optional<std::uint64_t> seed) {
  double w1 = 1.0, w2 = 1.7, g1 = 1.0, g2 = 0.6, v = 0.5, kappa = 0.5, pump = 1.0;
  if (seed) {
    auto rng = stream(*seed, 7);
    for (double* x : {&w1, &w2, &g1, &g2, &v, &kappa, &pump}) *x *= 1.0 + 0.05 * (2.0 * rng.uniform() - 1.0);
  }
  constexpr Eigen::Index d = 3;
  constexpr Eigen::Index g = 0, e1 = 1, e2 = 2;
  ModelSpec s;
  s.name = "positivity-demo";
  s.dim = d;
  s.hamiltonian = Operator::Zero(d, d);
  s.hamiltonian(e1, e1) = w1;
  s.hamiltonian(e2, e2) = w2;

  s.l2.lindblad.push_back({ket_bra(d, g, e1), g1});
  s.l2.lindblad.push_back({ket_bra(d, g, e2), g2});
  s.l2.hamiltonian_shift = v * (ket_bra(d, g, e2) + ket_bra(d, e2, g));
  // rho -> kappa (rho_{g e2} + rho_{e2 g}) (|e1><e1| - |g><g|)
  SuperOperator r = SuperOperator::Zero(d * d, d * d);
  for (auto [a, b] : {std::pair{g, e2}, std::pair{e2, g}}) {
    r(vec_index(e1, e1, d), vec_index(a, b, d)) = kappa;
    r(vec_index(g, g, d), vec_index(a, b, d)) = -kappa;
  }
  s.l2.superoperators.push_back(r);

  GeneratorBlock l4;
  l4.lindblad.push_back({ket_bra(d, e1, g), pump});
  s.l4 = l4;
  s.coupling = 0.1;
  s.metadata.seed = seed;
  s.metadata.description =
      "three levels (g, e1, e2) at zero temperature; L2 decays e1, e2 -> g, shifts by v(|g><e2| + h.c.) and "
      "feeds the g-e2 coherence into the e1 population; L4 pumps g -> e1";
  return s;
}

}  // namespace liouvpt
