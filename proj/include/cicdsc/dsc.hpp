#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cicdsc/panel.hpp"
#include "cicdsc/quantile.hpp"
#include "cicdsc/simplex.hpp"

// Distributional synthetic control with time-series quantile matching, plus
// the same-period weighting baseline used for comparison reports.

namespace cicdsc {

enum class Regime { Pre = 0, Post = 1 };

// Simplex weights over the control groups (group 1 is the treated unit).
struct SimplexWeights {
  std::vector<double> lambda;

  // Checks nonnegativity and unit sum (within 1e-9).
  void validate() const;
};

// Per group and regime, the within-group quantile curves of every period in
// that regime. Time-series quantiles at any (tau_u, tau_v) are computed from
// these directly, so evaluation is not restricted to the fitting grids.
class TsQuantilePanel {
 public:
  TsQuantilePanel(std::vector<std::string> groups, QuantileGrid grid_u,
                  QuantileGrid grid_v,
                  std::vector<std::array<std::vector<QuantileCurve>, 2>> series);

  const std::vector<std::string>& groups() const { return groups_; }
  const QuantileGrid& grid_u() const { return grid_u_; }
  const QuantileGrid& grid_v() const { return grid_v_; }
  std::size_t num_controls() const { return groups_.size() - 1; }

  // Sorted time series {Y_hat_gt(tau_u)} over the regime's periods.
  std::vector<double> series_values(std::size_t g, Regime j,
                                    double tau_u) const;
  // tau_v-th time-series quantile of the tau_u-th within-group quantile.
  double ts_quantile(std::size_t g, Regime j, double tau_u,
                     double tau_v) const;
  QuantileCurve ts_curve(std::size_t g, Regime j, double tau_u) const;

 private:
  std::vector<std::string> groups_;  // [0] is the treated group
  QuantileGrid grid_u_, grid_v_;
  std::vector<std::array<std::vector<QuantileCurve>, 2>> series_;
};

struct DscEstimate {
  double counterfactual = 0.0;
  double observed = 0.0;
  double gap = 0.0;  // observed - counterfactual
  SimplexWeights weights;
  double fit_residual = 0.0;  // pre-period objective at the optimum
};

struct DscFit {
  SimplexWeights weights;
  double fit_residual = 0.0;
  int iterations = 0;
  bool duplicate_columns = false;
};

// Splits periods at t0 (pre: t <= t0, post: t > t0) and tabulates per-regime
// series. treated_group must be present in cq; all other groups become the
// donor pool. Each regime needs at least min_periods periods per group.
TsQuantilePanel build_ts_panel(const CellQuantiles& cq,
                               const std::string& treated_group,
                               std::int64_t t0, const QuantileGrid& grid_u,
                               const QuantileGrid& grid_v,
                               int min_periods = 20);

// Pooled least squares of the treated pre-regime quantile surface on the
// donors' surfaces over grid_u x grid_v, constrained to the simplex.
DscFit fit_weights(const TsQuantilePanel& panel);

DscEstimate dsc_counterfactual(const TsQuantilePanel& panel,
                               const SimplexWeights& w, double tau_u_star,
                               double tau_v_star, double fit_residual = 0.0);

// The same-period comparison: match realized per-period values y_gt(tau_u)
// instead of time-series quantile levels. Only used in comparison reports.
DscFit baseline_same_period_weights(const CellQuantiles& cq,
                                    const std::string& treated_group,
                                    std::int64_t t0,
                                    const QuantileGrid& grid_u);

// Long-format dump of fitted vs target pre-period curves for plotting:
// tau_u, tau_v, target, fitted.
void dump_dsc_fit(const TsQuantilePanel& panel, const SimplexWeights& w,
                  std::ostream& out);

}  // namespace cicdsc
