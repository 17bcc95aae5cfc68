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

// Coupling scans shared by the command-line driver and the acceptance suite.
// Each compares a perturbative quantity against dense diagonalization or
// direct integration of the assembled generator.

#pragma once

#include "liouvpt/dynamics.hpp"
#include "liouvpt/models.hpp"

#include <vector>

namespace liouvpt {

struct TheoremScan {
  std::vector<double> grid;
  OrderScanResult steady_2me;      ///< |rho_ss of L0 + c^2 L2 - exact|
  OrderScanResult steady_w4;       ///< |order-2 steady state with W4 - exact|
  OrderScanResult offdiag_eigen;   ///< max off-diagonal branch eigenvalue error
  OrderScanResult diagonal_part;   ///< diagonal entries of the 2ME error
  OrderScanResult offdiag_part;    ///< off-diagonal entries of the 2ME error
};

/// Exact references are null vectors and spectra of the full generator.
TheoremScan theorem_scan(const ModelSpec& model, const std::vector<double>& grid);

struct PositivityScan {
  std::vector<double> grid;
  std::vector<double> naive_min;      ///< min eigenvalue, order 2 without W4
  std::vector<double> corrected_min;  ///< min eigenvalue, order 2 with W4
  std::vector<double> exact_min;
  OrderScanResult naive_scan;      ///< of |naive_min|
  OrderScanResult corrected_scan;  ///< of |corrected_min|
};

PositivityScan positivity_scan(const ModelSpec& model, const std::vector<double>& grid);

struct TimeScan {
  std::vector<double> grid;
  double t_short = 0.0;
  OrderScanResult short_time;  ///< |neumann(order 2) - integrate| at t_short
  OrderScanResult late_time;   ///< |2ME - full| at t = 10 / (c^2 scale)
};

/// t_short = 0.05 / (c_max^2 * max second-order rate), fixed across the grid;
/// the late-time scale is the slowest W2 relaxation rate. Both start from the
/// highest energy eigenstate.
TimeScan time_scan(const ModelSpec& model, const std::vector<double>& grid);

}  // namespace liouvpt
