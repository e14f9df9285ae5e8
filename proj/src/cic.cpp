#include "cicdsc/cic.hpp"

#include <algorithm>
#include <cmath>

#include "cicdsc/errors.hpp"
#include "cicdsc/kernels.hpp"

namespace cicdsc {

namespace {

void require_two_periods(const CellQuantiles& cq) {
  if (cq.periods.size() != 2)
    throw ValidationError("changes-in-changes needs exactly two periods, got " +
                          std::to_string(cq.periods.size()));
}

// Mean over the tau_V grid of squared differences between two curves
// tabulated on the same grid.
double curve_distance(const QuantileCurve& a, const QuantileCurve& b) {
  const std::size_t n = a.values().size();
  return kernels::sumsq_diff(a.values().data(), b.values().data(), n) /
         static_cast<double>(n);
}

// Scale-aware default tolerance for the case-2 match: 4x the median squared
// spacing between adjacent cross-group quantiles at period 0.
double default_mismatch_tol(const CellQuantiles& cq, std::int64_t pre,
                            double tau_u_star) {
  const auto values = cross_group_values(cq, Arm::Control, pre, tau_u_star);
  std::vector<double> sq;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double d = values[i] - values[i - 1];
    sq.push_back(d * d);
  }
  if (sq.empty()) return 1e-12;
  std::sort(sq.begin(), sq.end());
  const std::size_t n = sq.size();
  const double med =
      n % 2 == 1 ? sq[n / 2] : 0.5 * (sq[n / 2 - 1] + sq[n / 2]);
  return 4.0 * med;
}

}  // namespace

double observed_treated_quantile(const CellQuantiles& cq, double tau_u,
                                 double tau_v, const QuantileGrid& grid_v) {
  const std::int64_t post = cq.periods.back();
  return cross_group_curve(cq, Arm::Treated, post, tau_u, grid_v).eval(tau_v);
}

CicEstimate estimate_case1(const CellQuantiles& cq, const CicRequest& req) {
  require_two_periods(cq);
  const std::int64_t pre = cq.periods.front();
  const std::int64_t post = cq.periods.back();

  CicEstimate est;
  est.case_used = CicCase::Case1;
  est.grid_count = static_cast<int>(req.grid_u.points.size());

  const QuantileCurve q_n1_star =
      cross_group_curve(cq, Arm::Control, post, req.tau_u_star, req.grid_v);

  double acc = 0.0;
  for (double tau_um : req.grid_u.points) {
    const QuantileCurve q_i0 =
        cross_group_curve(cq, Arm::Treated, pre, tau_um, req.grid_v);
    const QuantileCurve q_n0 =
        cross_group_curve(cq, Arm::Control, pre, tau_um, req.grid_v);
    const double y = q_i0.eval(req.tau_v_star);
    if (y < q_n0.min_value() || y > q_n0.max_value()) ++est.clamp_count;
    const double tau_v_prime = q_n0.invert(y);
    acc += q_n1_star.eval(tau_v_prime);
  }
  est.counterfactual = acc / static_cast<double>(est.grid_count);
  est.support_warning = est.clamp_count * 2 > est.grid_count;
  est.observed =
      observed_treated_quantile(cq, req.tau_u_star, req.tau_v_star, req.grid_v);
  est.qtt = est.observed - est.counterfactual;
  return est;
}

CicEstimate estimate_case2(const CellQuantiles& cq, const CicRequest& req) {
  require_two_periods(cq);
  const std::int64_t pre = cq.periods.front();
  const std::int64_t post = cq.periods.back();

  CicEstimate est;
  est.case_used = CicCase::Case2;

  const QuantileCurve q_i0_star =
      cross_group_curve(cq, Arm::Treated, pre, req.tau_u_star, req.grid_v);

  auto objective = [&](double tau) {
    return curve_distance(
        cross_group_curve(cq, Arm::Control, pre, tau, req.grid_v), q_i0_star);
  };

  // Coarse bracket on the grid, then ternary refinement.
  const auto& taus = req.grid_u.points;
  std::size_t best = 0;
  double best_d = objective(taus[0]);
  for (std::size_t j = 1; j < taus.size(); ++j) {
    const double d = objective(taus[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  double lo = taus[best > 0 ? best - 1 : 0];
  double hi = taus[best + 1 < taus.size() ? best + 1 : taus.size() - 1];
  while (hi - lo > 1e-6) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (objective(m1) <= objective(m2))
      hi = m2;
    else
      lo = m1;
  }
  const double tau_u_prime = 0.5 * (lo + hi);
  est.matched_tau_u = tau_u_prime;
  est.match_objective = objective(tau_u_prime);

  const double tol = req.mismatch_tol > 0.0
                         ? req.mismatch_tol
                         : default_mismatch_tol(cq, pre, req.tau_u_star);
  est.mismatch_warning = est.match_objective > tol;

  est.counterfactual =
      cross_group_curve(cq, Arm::Control, post, tau_u_prime, req.grid_v)
          .eval(req.tau_v_star);
  est.observed =
      observed_treated_quantile(cq, req.tau_u_star, req.tau_v_star, req.grid_v);
  est.qtt = est.observed - est.counterfactual;
  return est;
}

CicEstimate estimate_case3(const CellQuantiles& cq, const CicRequest& req) {
  require_two_periods(cq);
  const std::int64_t pre = cq.periods.front();
  const std::int64_t post = cq.periods.back();

  CicEstimate est;
  est.case_used = CicCase::Case3;

  const double y_star =
      cross_group_curve(cq, Arm::Treated, pre, req.tau_u_star, req.grid_v)
          .eval(req.tau_v_star);

  double acc = 0.0;
  std::vector<double> matched_values;
  for (double tau_u : req.grid_u.points) {
    const QuantileCurve q_n0 =
        cross_group_curve(cq, Arm::Control, pre, tau_u, req.grid_v);
    if (y_star < q_n0.min_value() || y_star > q_n0.max_value()) {
      ++est.skipped_grid_points;
      continue;
    }
    const double tau_v = q_n0.invert(y_star);
    const double value =
        cross_group_curve(cq, Arm::Control, post, tau_u, req.grid_v)
            .eval(tau_v);
    est.matched_set.emplace_back(tau_u, tau_v);
    matched_values.push_back(value);
    acc += value;
  }
  if (matched_values.empty())
    throw EstimationError("target level outside control support");

  const double n = static_cast<double>(matched_values.size());
  est.counterfactual = acc / n;
  double ss = 0.0;
  for (double v : matched_values) {
    const double d = v - est.counterfactual;
    ss += d * d;
  }
  est.matched_dispersion = std::sqrt(ss / n);

  est.observed =
      observed_treated_quantile(cq, req.tau_u_star, req.tau_v_star, req.grid_v);
  est.qtt = est.observed - est.counterfactual;
  return est;
}

CicEstimate estimate_cic(const CellQuantiles& cq, const CicRequest& req) {
  switch (req.which) {
    case CicCase::Case1:
      return estimate_case1(cq, req);
    case CicCase::Case2:
      return estimate_case2(cq, req);
    case CicCase::Case3:
      return estimate_case3(cq, req);
  }
  throw ValidationError("unknown CiC case");
}

}  // namespace cicdsc
