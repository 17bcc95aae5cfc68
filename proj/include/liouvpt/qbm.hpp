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

// Quantum Brownian motion with Ohmic coupling, hbar = k_B = 1:
//
//   d rho/dt = -i [H_R, rho] - i Gamma [x, {p, rho}]
//              - M Dpp [x, [x, rho]] - Dxp [x, [p, rho]],
//
// with late-time coefficients Omega_R = Omega, Gamma = gamma0 and
//
//   Dxp = gamma0 Im I0,   Dpp = 2 gamma0 T + gamma0 Im[(gamma0 + i Wt) I0],
//   I0  = (2/pi) (i + gamma0/Wt) [H(Lambda/2 pi T) - H((gamma0 + i Wt)/2 pi T)],
//   Wt  = sqrt(Omega^2 - gamma0^2).
//
// Terms of order 1/Lambda are dropped throughout.

#pragma once

#include "liouvpt/core.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace liouvpt::qbm {

/// H(z) = psi(z + 1) + Euler gamma. Exact finite sums for small nonnegative
/// integers; otherwise upward recurrence to Re > 12 and an 8-term asymptotic
/// series. Throws InvalidInput at the poles z = -1, -2, ...
cplx harmonic_number(cplx z);

struct OhmicSpec {
  double gamma0 = 0.05;
  double temperature = 0.0;
  double cutoff = 1000.0;
  double omega = 1.0;
  double mass = 1.0;

  /// Throws InvalidInput unless gamma0 > 0, 0 < gamma0 < omega, T >= 0,
  /// mass > 0 and cutoff >= 10 omega.
  void validate() const;
  double omega_tilde() const;
};

enum class CoefficientMode { Exact, Truncated };

struct QBMCoefficients {
  double omega_r = 0.0;
  double gamma = 0.0;
  double dpp = 0.0;
  double dxp = 0.0;
  double omega_tilde = 0.0;
  cplx i0 = 0.0;
  CoefficientMode mode = CoefficientMode::Exact;
};

/// Late-time coefficients to all orders in gamma0.
QBMCoefficients late_time_coefficients(const OhmicSpec& s);

/// Leading order in gamma0 only: I0 evaluated at gamma0 = 0 with Wt -> Omega,
/// Dxp = gamma0 Im I0|0 and Dpp = 2 gamma0 T + gamma0 Omega Re I0|0.
QBMCoefficients truncated_coefficients(const OhmicSpec& s);

struct GaussianState {
  double mean_x = 0.0, mean_p = 0.0;
  double sxx = 0.0, sxp = 0.0, spp = 0.0;  ///< sxp is the symmetrized <x p + p x>/2 covariance

  double det() const { return sxx * spp - sxp * sxp; }
  bool heisenberg_ok() const { return det() >= 0.25; }
};

/// Fixed point of the covariance flow:
///   sxx = (Dpp/(2 Gamma) - Dxp) / (M Omega_R^2),  sxp = 0,  spp = M Dpp/(2 Gamma).
GaussianState stationary_covariance(const QBMCoefficients& q, double mass);

struct CovarianceTrajectory {
  std::vector<double> t;
  std::vector<GaussianState> states;
};

/// Integrates the moment equations of the master equation above:
///   d sxx/dt = 2 sxp / M
///   d sxp/dt = spp / M - M Omega_R^2 sxx - 2 Gamma sxp - Dxp
///   d spp/dt = -2 M Omega_R^2 sxp - 4 Gamma spp + 2 M Dpp
/// together with the means. Samples at n_samples + 1 uniform times.
CovarianceTrajectory covariance_flow(const QBMCoefficients& q, double mass, const GaussianState& s0, double t_end,
                                     double tol, int n_samples = 100);

struct CutoffRow {
  double lambda = 0.0;
  double sxx_exact = 0.0;
  double sxx_mixed = 0.0;
  double det_mixed = 0.0;
  bool heisenberg_ok = true;
  bool positive_ok = true;
};

struct CutoffSummary {
  double mixed_log_slope = 0.0;     ///< least-squares d sxx_mixed / d ln Lambda
  double expected_log_slope = 0.0;  ///< -2 gamma0 / (pi M Omega^2)
  std::optional<double> lambda_heisenberg;  ///< first Lambda with det < 1/4
  std::optional<double> lambda_negative;    ///< first Lambda with sxx_mixed < 0
  double exact_max_decade_variation = 0.0;  ///< max relative change of sxx_exact per decade
};

/// One row per cutoff (ascending, each >= 10 Omega); spec.cutoff is ignored.
/// The mixed column inserts the truncated coefficients into the exact
/// stationary covariance.
std::vector<CutoffRow> cutoff_scan(const OhmicSpec& s, const std::vector<double>& lambdas);
CutoffSummary summarize(const OhmicSpec& s, const std::vector<CutoffRow>& rows);

/// Header lambda,sxx_exact,sxx_mixed,det_mixed,heisenberg_ok,positive_ok;
/// doubles in shortest round-trip form.
void write_cutoff_csv(const std::vector<CutoffRow>& rows, std::ostream& out);

/// Shortest decimal that parses back to exactly x.
std::string format_double(double x);

}  // namespace liouvpt::qbm
