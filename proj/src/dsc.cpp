#include "cicdsc/dsc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "cicdsc/errors.hpp"

namespace cicdsc {

void SimplexWeights::validate() const {
  if (lambda.empty()) throw ValidationError("empty weight vector");
  double s = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0)) throw ValidationError("negative simplex weight");
    s += l;
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw ValidationError("simplex weights sum to " + std::to_string(s));
}

TsQuantilePanel::TsQuantilePanel(
    std::vector<std::string> groups, QuantileGrid grid_u, QuantileGrid grid_v,
    std::vector<std::array<std::vector<QuantileCurve>, 2>> series)
    : groups_(std::move(groups)),
      grid_u_(std::move(grid_u)),
      grid_v_(std::move(grid_v)),
      series_(std::move(series)) {}

std::vector<double> TsQuantilePanel::series_values(std::size_t g, Regime j,
                                                   double tau_u) const {
  const auto& curves = series_.at(g)[static_cast<std::size_t>(j)];
  std::vector<double> values(curves.size());
  for (std::size_t t = 0; t < curves.size(); ++t)
    values[t] = curves[t].eval(tau_u);
  std::sort(values.begin(), values.end());
  return values;
}

double TsQuantilePanel::ts_quantile(std::size_t g, Regime j, double tau_u,
                                    double tau_v) const {
  return empirical_quantile(Sample(series_values(g, j, tau_u)), tau_v);
}

QuantileCurve TsQuantilePanel::ts_curve(std::size_t g, Regime j,
                                        double tau_u) const {
  return curve_from_sample(Sample(series_values(g, j, tau_u)), grid_v_);
}

TsQuantilePanel build_ts_panel(const CellQuantiles& cq,
                               const std::string& treated_group,
                               std::int64_t t0, const QuantileGrid& grid_u,
                               const QuantileGrid& grid_v, int min_periods) {
  if (!cq.roles.count(treated_group))
    throw ValidationError("treated group '" + treated_group +
                          "' not present in panel");
  std::vector<std::string> groups{treated_group};
  for (const auto& [g, arm] : cq.roles) {
    (void)arm;
    if (g != treated_group) groups.push_back(g);
  }
  if (groups.size() < 2)
    throw ValidationError("synthetic control needs at least one donor group");

  std::vector<std::array<std::vector<QuantileCurve>, 2>> series;
  series.reserve(groups.size());
  for (const auto& g : groups) {
    std::array<std::vector<QuantileCurve>, 2> regimes;
    for (std::int64_t t : cq.periods) {
      const auto it = cq.by_cell.find({g, t});
      if (it == cq.by_cell.end()) continue;
      regimes[t <= t0 ? 0 : 1].push_back(it->second);
    }
    for (int j = 0; j < 2; ++j) {
      if (static_cast<int>(regimes[j].size()) < min_periods)
        throw ValidationError(
            "group '" + g + "' has " + std::to_string(regimes[j].size()) +
            " periods in the " + (j == 0 ? "pre" : "post") +
            " regime, fewer than min_periods " + std::to_string(min_periods));
    }
    series.push_back(std::move(regimes));
  }
  return TsQuantilePanel(std::move(groups), grid_u, grid_v, std::move(series));
}

DscFit fit_weights(const TsQuantilePanel& panel) {
  const auto& gu = panel.grid_u().points;
  const auto& gv = panel.grid_v().points;
  const std::size_t rows = gu.size() * gv.size();
  const std::size_t cols = panel.num_controls();

  SimplexLsProblem problem;
  problem.rows = rows;
  problem.cols = cols;
  problem.design.resize(rows * cols);
  problem.target.resize(rows);

  for (std::size_t g = 0; g < panel.groups().size(); ++g) {
    for (std::size_t m = 0; m < gu.size(); ++m) {
      const Sample ts(panel.series_values(g, Regime::Pre, gu[m]));
      for (std::size_t s = 0; s < gv.size(); ++s) {
        const double q = empirical_quantile(ts, gv[s]);
        const std::size_t row = m * gv.size() + s;
        if (g == 0)
          problem.target[row] = q;
        else
          problem.design[row * cols + (g - 1)] = q;
      }
    }
  }

  const SimplexLsSolution sol = solve_simplex_ls(problem);
  DscFit fit;
  fit.weights.lambda = project_onto_simplex(sol.weights);
  fit.weights.validate();
  fit.fit_residual = sol.objective;
  fit.iterations = sol.iterations;
  fit.duplicate_columns = sol.duplicate_columns;
  return fit;
}

DscEstimate dsc_counterfactual(const TsQuantilePanel& panel,
                               const SimplexWeights& w, double tau_u_star,
                               double tau_v_star, double fit_residual) {
  w.validate();
  if (w.lambda.size() != panel.num_controls())
    throw ValidationError("weight vector length does not match donor pool");

  DscEstimate est;
  est.weights = w;
  est.fit_residual = fit_residual;
  double acc = 0.0;
  for (std::size_t g = 1; g < panel.groups().size(); ++g)
    acc += w.lambda[g - 1] *
           panel.ts_quantile(g, Regime::Post, tau_u_star, tau_v_star);
  est.counterfactual = acc;
  est.observed = panel.ts_quantile(0, Regime::Post, tau_u_star, tau_v_star);
  est.gap = est.observed - est.counterfactual;
  return est;
}

DscFit baseline_same_period_weights(const CellQuantiles& cq,
                                    const std::string& treated_group,
                                    std::int64_t t0,
                                    const QuantileGrid& grid_u) {
  if (!cq.roles.count(treated_group))
    throw ValidationError("treated group '" + treated_group +
                          "' not present in panel");
  std::vector<std::string> donors;
  for (const auto& [g, arm] : cq.roles) {
    (void)arm;
    if (g != treated_group) donors.push_back(g);
  }
  if (donors.empty())
    throw ValidationError("synthetic control needs at least one donor group");

  std::vector<std::int64_t> pre_periods;
  for (std::int64_t t : cq.periods)
    if (t <= t0) pre_periods.push_back(t);
  if (pre_periods.empty())
    throw ValidationError("no pre-treatment periods at or before t0");

  const auto& gu = grid_u.points;
  const std::size_t rows = pre_periods.size() * gu.size();
  const std::size_t cols = donors.size();

  SimplexLsProblem problem;
  problem.rows = rows;
  problem.cols = cols;
  problem.design.resize(rows * cols);
  problem.target.resize(rows);

  std::size_t row = 0;
  for (std::int64_t t : pre_periods) {
    const QuantileCurve& target_curve = cq.cell(treated_group, t);
    for (std::size_t m = 0; m < gu.size(); ++m, ++row) {
      problem.target[row] = target_curve.eval(gu[m]);
      for (std::size_t c = 0; c < cols; ++c)
        problem.design[row * cols + c] = cq.cell(donors[c], t).eval(gu[m]);
    }
  }

  const SimplexLsSolution sol = solve_simplex_ls(problem);
  DscFit fit;
  fit.weights.lambda = project_onto_simplex(sol.weights);
  fit.weights.validate();
  fit.fit_residual = sol.objective;
  fit.iterations = sol.iterations;
  fit.duplicate_columns = sol.duplicate_columns;
  return fit;
}

void dump_dsc_fit(const TsQuantilePanel& panel, const SimplexWeights& w,
                  std::ostream& out) {
  out << "tau_u,tau_v,target,fitted\n";
  char buf[128];
  for (double tau_u : panel.grid_u().points) {
    for (double tau_v : panel.grid_v().points) {
      const double target = panel.ts_quantile(0, Regime::Pre, tau_u, tau_v);
      double fitted = 0.0;
      for (std::size_t g = 1; g < panel.groups().size(); ++g)
        fitted += w.lambda[g - 1] *
                  panel.ts_quantile(g, Regime::Pre, tau_u, tau_v);
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", tau_u,
                    tau_v, target, fitted);
      out << buf;
    }
  }
}

}  // namespace cicdsc
