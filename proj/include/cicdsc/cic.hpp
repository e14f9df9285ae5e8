#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cicdsc/panel.hpp"
#include "cicdsc/quantile.hpp"

// Counterfactual quantile and QTT estimation for the three identification
// cases: (1) identical individual-level distributions across arms, (2)
// identical group-level distributions, (3) a time-invariant single index.

namespace cicdsc {

enum class CicCase { Case1 = 1, Case2 = 2, Case3 = 3 };

struct CicRequest {
  double tau_u_star = 0.5;
  double tau_v_star = 0.5;
  CicCase which = CicCase::Case1;
  QuantileGrid grid_u = QuantileGrid::defaults();
  QuantileGrid grid_v = QuantileGrid::defaults();
  // Case-2 match tolerance for min D; <= 0 selects the scale-aware default
  // (4x the median squared cross-group quantile spacing at period 0).
  double mismatch_tol = -1.0;
};

struct CicEstimate {
  double counterfactual = 0.0;
  double observed = 0.0;
  double qtt = 0.0;  // observed - counterfactual, exactly
  CicCase case_used = CicCase::Case1;

  // Case 2: the matched control quantile level and the attained min D.
  std::optional<double> matched_tau_u;
  double match_objective = 0.0;
  bool mismatch_warning = false;

  // Case 3: matched (tau_u', tau_v') pairs and the dispersion (population
  // standard deviation) of their period-1 values.
  std::vector<std::pair<double, double>> matched_set;
  double matched_dispersion = 0.0;
  int skipped_grid_points = 0;

  // Case 1: composed probabilities that hit the grid bounds.
  int clamp_count = 0;
  int grid_count = 0;
  bool support_warning = false;
};

// Period-1 treated-arm cross-group quantile at (tau_u, tau_v): the observed
// counterpart of the counterfactual, and the minuend of the QTT.
double observed_treated_quantile(const CellQuantiles& cq, double tau_u,
                                 double tau_v, const QuantileGrid& grid_v);

CicEstimate estimate_case1(const CellQuantiles& cq, const CicRequest& req);
CicEstimate estimate_case2(const CellQuantiles& cq, const CicRequest& req);
CicEstimate estimate_case3(const CellQuantiles& cq, const CicRequest& req);

// Dispatch by req.which.
CicEstimate estimate_cic(const CellQuantiles& cq, const CicRequest& req);

}  // namespace cicdsc
