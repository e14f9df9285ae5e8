#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cicdsc/panel.hpp"
#include "cicdsc/quantile.hpp"

// Descriptive statistics for the three testable implications. Each statistic
// is zero in population exactly when the corresponding identification
// condition holds. The paper supplies no test distributions, so verdicts are
// calibrated against split-half sampling noise rather than critical values.

namespace cicdsc {

struct DiagnosticProfile {
  std::vector<double> grid_u;
  std::vector<double> grid_v;
  std::vector<double> surface;  // row-major [u][v]; empty when not applicable
};

struct DiagnosticResult {
  double statistic = 0.0;
  bool defined = true;       // case 3 can find no within-band pairs
  int excluded_cells = 0;    // case 2 boundary inversion failures
  DiagnosticProfile profile;
};

// Range over tau_U of psi(tau_U, tau_V) = F_{N0(tau_U)}(Q_{I0(tau_U)}(tau_V)),
// maximized over tau_V. tau_U-free in population iff case 1 applies.
DiagnosticResult diagnose_case1(const CellQuantiles& cq,
                                const QuantileGrid& grid_u,
                                const QuantileGrid& grid_v);

// Range over tau_V of the matched control level tau_U'(tau_U, tau_V),
// maximized over tau_U. tau_V-free in population iff case 2 applies.
DiagnosticResult diagnose_case2(const CellQuantiles& cq,
                                const QuantileGrid& grid_u,
                                const QuantileGrid& grid_v);

// Among control grid cells whose period-0 values agree within `band`, the
// largest period-1 discrepancy. Zero (as band -> 0) iff the index structure
// is preserved over time. band <= 0 selects the resolution-aware default:
// the median absolute gap between adjacent period-0 surface values.
DiagnosticResult diagnose_case3(const CellQuantiles& cq,
                                const QuantileGrid& grid_u,
                                const QuantileGrid& grid_v, double band);

struct DiagnosticsReport {
  DiagnosticResult case1, case2, case3;
  double threshold1 = 0.0, threshold2 = 0.0, threshold3 = 0.0;
  bool consistent1 = false, consistent2 = false, consistent3 = false;
  double band = 0.0;
  std::string note;

  nlohmann::json to_json(bool include_profiles = true) const;
};

// Runs all three diagnostics with thresholds set to 3x the same statistic
// computed on a null configuration built by splitting the control groups in
// half (for case 3, by matching one half's period-0 surface against the
// other's).
DiagnosticsReport run_diagnostics(const CellQuantiles& cq,
                                  const QuantileGrid& grid_u,
                                  const QuantileGrid& grid_v,
                                  double band = -1.0);

}  // namespace cicdsc
