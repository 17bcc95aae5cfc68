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

#include "liouvpt/qbm.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace liouvpt::qbm {

namespace {

constexpr double kEuler = 0.57721566490153286060651209008240243;

// B_{2k} / (2k) for k = 1..8.
constexpr std::array<double, 8> kBernoulliOver2k = {
    1.0 / 6.0 / 2.0,     -1.0 / 30.0 / 4.0,      1.0 / 42.0 / 6.0,  -1.0 / 30.0 / 8.0,
    5.0 / 66.0 / 10.0,   -691.0 / 2730.0 / 12.0, 7.0 / 6.0 / 14.0,  -3617.0 / 510.0 / 16.0,
};

cplx digamma_asymptotic(cplx w) {
  const cplx inv2 = 1.0 / (w * w);
  cplx series = 0.0;
  cplx pw = inv2;
  for (double b : kBernoulliOver2k) {
    series += b * pw;
    pw *= inv2;
  }
  return std::log(w) - 0.5 / w - series;
}

}  // namespace

cplx harmonic_number(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InvalidInput("harmonic_number: non-finite argument");
  if (z.imag() == 0.0 && z.real() == std::floor(z.real())) {
    if (z.real() < 0.0) {
      std::ostringstream msg;
      msg << "harmonic_number: pole at z = " << z.real();
      throw InvalidInput(msg.str());
    }
    if (z.real() <= 64.0) {
      double h = 0.0;
      for (int k = 1; k <= static_cast<int>(z.real()); ++k) h += 1.0 / k;
      return h;
    }
  }
  cplx w = z + 1.0;
  cplx shift = 0.0;
  while (w.real() < 12.0) {
    shift -= 1.0 / w;
    w += 1.0;
  }
  return digamma_asymptotic(w) + shift + kEuler;
}

// ---------------------------------------------------------------------------

void OhmicSpec::validate() const {
  auto bad = [](const std::string& what) { throw InvalidInput("OhmicSpec: " + what); };
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) bad("gamma0 must be positive");
  if (!(omega > 0.0) || !std::isfinite(omega)) bad("omega must be positive");
  if (!(gamma0 < omega)) bad("gamma0 must be below omega (underdamped)");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) bad("temperature must be nonnegative");
  if (!(mass > 0.0) || !std::isfinite(mass)) bad("mass must be positive");
  if (!(cutoff >= 10.0 * omega) || !std::isfinite(cutoff)) {
    std::ostringstream msg;
    msg << "cutoff " << cutoff << " must be at least 10 omega = " << 10.0 * omega;
    bad(msg.str());
  }
}

double OhmicSpec::omega_tilde() const { return std::sqrt(omega * omega - gamma0 * gamma0); }

namespace {

// H(Lambda / 2 pi T) - H(b / 2 pi T), with the T = 0 limit ln(Lambda / b).
cplx harmonic_difference(double lambda, cplx b, double temperature) {
  if (temperature == 0.0) return std::log(cplx(lambda) / b);
  const double scale = 2.0 * std::numbers::pi * temperature;
  return harmonic_number(lambda / scale) - harmonic_number(b / scale);
}

}  // namespace

QBMCoefficients late_time_coefficients(const OhmicSpec& s) {
  s.validate();
  QBMCoefficients q;
  q.mode = CoefficientMode::Exact;
  q.omega_r = s.omega;
  q.gamma = s.gamma0;
  q.omega_tilde = s.omega_tilde();
  const cplx b(s.gamma0, q.omega_tilde);
  q.i0 = (2.0 / std::numbers::pi) * (kI + s.gamma0 / q.omega_tilde) * harmonic_difference(s.cutoff, b, s.temperature);
  q.dxp = s.gamma0 * q.i0.imag();
  q.dpp = 2.0 * s.gamma0 * s.temperature + s.gamma0 * (b * q.i0).imag();
  return q;
}

QBMCoefficients truncated_coefficients(const OhmicSpec& s) {
  s.validate();
  QBMCoefficients q;
  q.mode = CoefficientMode::Truncated;
  q.omega_r = s.omega;
  q.gamma = s.gamma0;
  q.omega_tilde = s.omega;
  q.i0 = (2.0 / std::numbers::pi) * kI * harmonic_difference(s.cutoff, cplx(0.0, s.omega), s.temperature);
  q.dxp = s.gamma0 * q.i0.imag();
  q.dpp = 2.0 * s.gamma0 * s.temperature + s.gamma0 * s.omega * q.i0.real();
  return q;
}

GaussianState stationary_covariance(const QBMCoefficients& q, double mass) {
  if (!(q.gamma > 0.0)) throw InvalidInput("stationary_covariance: Gamma must be positive (no relaxation)");
  if (!(mass > 0.0)) throw InvalidInput("stationary_covariance: mass must be positive");
  GaussianState g;
  const double d = q.dpp / (2.0 * q.gamma);
  g.sxx = (d - q.dxp) / (mass * q.omega_r * q.omega_r);
  g.sxp = 0.0;
  g.spp = mass * d;
  return g;
}

CovarianceTrajectory covariance_flow(const QBMCoefficients& q, double mass, const GaussianState& s0, double t_end,
                                     double tol, int n_samples) {
  namespace odeint = boost::numeric::odeint;
  if (!(tol > 0.0)) throw InvalidInput("covariance_flow: tol must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidInput("covariance_flow: t_end must be positive");
  if (!(mass > 0.0)) throw InvalidInput("covariance_flow: mass must be positive");
  if (n_samples < 1) throw InvalidInput("covariance_flow: need at least one sample");

  using State = std::array<double, 5>;  // <x>, <p>, sxx, sxp, spp
  const double m = mass, w2 = q.omega_r * q.omega_r, g = q.gamma;
  auto rhs = [&](const State& y, State& dy, double) {
    dy[0] = y[1] / m;
    dy[1] = -m * w2 * y[0] - 2.0 * g * y[1];
    dy[2] = 2.0 * y[3] / m;
    dy[3] = y[4] / m - m * w2 * y[2] - 2.0 * g * y[3] - q.dxp;
    dy[4] = -2.0 * m * w2 * y[3] - 4.0 * g * y[4] + 2.0 * m * q.dpp;
  };
  std::vector<double> times(static_cast<std::size_t>(n_samples) + 1);
  for (int k = 0; k <= n_samples; ++k) times[k] = t_end * k / n_samples;
  times.back() = t_end;

  CovarianceTrajectory out;
  auto observer = [&](const State& y, double t) {
    out.t.push_back(t);
    out.states.push_back({y[0], y[1], y[2], y[3], y[4]});
  };
  State y{s0.mean_x, s0.mean_p, s0.sxx, s0.sxp, s0.spp};
  try {
    odeint::integrate_times(odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>()), rhs, y,
                            times.begin(), times.end(), 1e-3 * std::min(1.0, t_end), observer,
                            odeint::max_step_checker(10'000'000));
  } catch (const std::exception& e) {
    throw ConvergenceError(std::string("covariance_flow: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<CutoffRow> cutoff_scan(const OhmicSpec& s, const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw InvalidInput("cutoff_scan: empty cutoff grid");
  std::vector<CutoffRow> rows;
  rows.reserve(lambdas.size());
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (k > 0 && !(lambdas[k] > lambdas[k - 1])) throw InvalidInput("cutoff_scan: grid must be ascending");
    OhmicSpec sk = s;
    sk.cutoff = lambdas[k];
    sk.validate();
    const auto exact = stationary_covariance(late_time_coefficients(sk), sk.mass);
    const auto mixed = stationary_covariance(truncated_coefficients(sk), sk.mass);
    CutoffRow r;
    r.lambda = lambdas[k];
    r.sxx_exact = exact.sxx;
    r.sxx_mixed = mixed.sxx;
    r.det_mixed = mixed.det();
    r.heisenberg_ok = mixed.heisenberg_ok();
    r.positive_ok = mixed.sxx > 0.0;
    rows.push_back(r);
  }
  return rows;
}

CutoffSummary summarize(const OhmicSpec& s, const std::vector<CutoffRow>& rows) {
  CutoffSummary out;
  out.expected_log_slope = -2.0 * s.gamma0 / (std::numbers::pi * s.mass * s.omega * s.omega);
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n >= 2) {
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      a(k, 0) = std::log(rows[k].lambda);
      a(k, 1) = 1.0;
      y(k) = rows[k].sxx_mixed;
    }
    out.mixed_log_slope = a.colPivHouseholderQr().solve(y)(0);
  }
  for (const auto& r : rows) {
    if (!out.lambda_heisenberg && !r.heisenberg_ok) out.lambda_heisenberg = r.lambda;
    if (!out.lambda_negative && !r.positive_ok) out.lambda_negative = r.lambda;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      if (std::log10(rows[j].lambda / rows[i].lambda) > 1.0 + 1e-9) break;
      const double rel = std::abs(rows[j].sxx_exact - rows[i].sxx_exact) / std::abs(rows[i].sxx_exact);
      out.exact_max_decade_variation = std::max(out.exact_max_decade_variation, rel);
    }
  }
  return out;
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

void write_cutoff_csv(const std::vector<CutoffRow>& rows, std::ostream& out) {
  out << "lambda,sxx_exact,sxx_mixed,det_mixed,heisenberg_ok,positive_ok\n";
  for (const auto& r : rows) {
    out << format_double(r.lambda) << ',' << format_double(r.sxx_exact) << ',' << format_double(r.sxx_mixed) << ','
        << format_double(r.det_mixed) << ',' << (r.heisenberg_ok ? "true" : "false") << ','
        << (r.positive_ok ? "true" : "false") << '\n';
  }
}

}  // namespace liouvpt::qbm
