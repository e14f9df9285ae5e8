#include "cicdsc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cicdsc/errors.hpp"

namespace cicdsc {

namespace {

// Tabulates the cross-group quantile surface [u][v] for one arm and period.
std::vector<double> surface_for(const CellQuantiles& cq, Arm arm,
                                std::int64_t period,
                                const QuantileGrid& grid_u,
                                const QuantileGrid& grid_v) {
  std::vector<double> s(grid_u.points.size() * grid_v.points.size());
  for (std::size_t u = 0; u < grid_u.points.size(); ++u) {
    const Sample sample(cross_group_values(cq, arm, period, grid_u.points[u]));
    for (std::size_t v = 0; v < grid_v.points.size(); ++v)
      s[u * grid_v.points.size() + v] =
          empirical_quantile(sample, grid_v.points[v]);
  }
  return s;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

DiagnosticResult diagnose_case1(const CellQuantiles& cq,
                                const QuantileGrid& grid_u,
                                const QuantileGrid& grid_v) {
  const std::int64_t pre = cq.periods.front();
  const std::size_t mu = grid_u.points.size();
  const std::size_t mv = grid_v.points.size();

  DiagnosticResult res;
  res.profile.grid_u = grid_u.points;
  res.profile.grid_v = grid_v.points;
  res.profile.surface.resize(mu * mv);

  for (std::size_t u = 0; u < mu; ++u) {
    const double tau_u = grid_u.points[u];
    const Sample treated(cross_group_values(cq, Arm::Treated, pre, tau_u));
    const Sample control(cross_group_values(cq, Arm::Control, pre, tau_u));
    for (std::size_t v = 0; v < mv; ++v) {
      const double q = empirical_quantile(treated, grid_v.points[v]);
      res.profile.surface[u * mv + v] = ecdf(control, q);
    }
  }

  double stat = 0.0;
  for (std::size_t v = 0; v < mv; ++v) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t u = 0; u < mu; ++u) {
      const double psi = res.profile.surface[u * mv + v];
      lo = std::min(lo, psi);
      hi = std::max(hi, psi);
    }
    stat = std::max(stat, hi - lo);
  }
  res.statistic = stat;
  return res;
}

DiagnosticResult diagnose_case2(const CellQuantiles& cq,
                                const QuantileGrid& grid_u,
                                const QuantileGrid& grid_v) {
  const std::int64_t pre = cq.periods.front();
  const std::size_t mu = grid_u.points.size();
  const std::size_t mv = grid_v.points.size();

  const auto control = surface_for(cq, Arm::Control, pre, grid_u, grid_v);
  const auto treated = surface_for(cq, Arm::Treated, pre, grid_u, grid_v);

  DiagnosticResult res;
  res.profile.grid_u = grid_u.points;
  res.profile.grid_v = grid_v.points;
  // tau_U' per cell; -1 marks a boundary inversion failure.
  res.profile.surface.assign(mu * mv, -1.0);

  double stat = 0.0;
  for (std::size_t v = 0; v < mv; ++v) {
    // tau |-> Q_{N0(tau)}(tau_V) is monotone; invert it per treated cell.
    std::vector<double> column(mu);
    for (std::size_t u = 0; u < mu; ++u) column[u] = control[u * mv + v];
    const QuantileCurve inv(grid_u.points, column);
    for (std::size_t u = 0; u < mu; ++u) {
      const double y = treated[u * mv + v];
      if (y < inv.min_value() || y > inv.max_value()) {
        ++res.excluded_cells;
        continue;
      }
      res.profile.surface[u * mv + v] = inv.invert(y);
    }
  }
  for (std::size_t u = 0; u < mu; ++u) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    int defined = 0;
    for (std::size_t v = 0; v < mv; ++v) {
      const double t = res.profile.surface[u * mv + v];
      if (t < 0.0) continue;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
      ++defined;
    }
    if (defined >= 2) stat = std::max(stat, hi - lo);
  }
  res.statistic = stat;
  return res;
}

DiagnosticResult diagnose_case3(const CellQuantiles& cq,
                                const QuantileGrid& grid_u,
                                const QuantileGrid& grid_v, double band) {
  const std::int64_t pre = cq.periods.front();
  const std::int64_t post = cq.periods.back();
  const std::size_t mu = grid_u.points.size();
  const std::size_t mv = grid_v.points.size();

  const auto s0 = surface_for(cq, Arm::Control, pre, grid_u, grid_v);
  const auto s1 = surface_for(cq, Arm::Control, post, grid_u, grid_v);

  if (band <= 0.0) {
    std::vector<double> gaps;
    for (std::size_t u = 0; u < mu; ++u)
      for (std::size_t v = 0; v + 1 < mv; ++v)
        gaps.push_back(std::abs(s0[u * mv + v + 1] - s0[u * mv + v]));
    for (std::size_t u = 0; u + 1 < mu; ++u)
      for (std::size_t v = 0; v < mv; ++v)
        gaps.push_back(std::abs(s0[(u + 1) * mv + v] - s0[u * mv + v]));
    band = median(std::move(gaps));
  }

  DiagnosticResult res;
  res.profile.grid_u = grid_u.points;
  res.profile.grid_v = grid_v.points;

  // Sort cells by period-0 value; within-band pairs form a sliding window.
  std::vector<std::size_t> order(s0.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s0[a] < s0[b]; });

  double stat = 0.0;
  bool any_pair = false;
  for (std::size_t i = 0, j = 1; i < order.size(); ++i) {
    if (j <= i) j = i + 1;
    while (j < order.size() && s0[order[j]] - s0[order[i]] < band) {
      any_pair = true;
      ++j;
    }
    double lo = s1[order[i]], hi = s1[order[i]];
    for (std::size_t k = i + 1; k < j; ++k) {
      lo = std::min(lo, s1[order[k]]);
      hi = std::max(hi, s1[order[k]]);
    }
    stat = std::max(stat, hi - lo);
  }
  res.defined = any_pair;
  res.statistic = any_pair ? stat : 0.0;
  return res;
}

DiagnosticsReport run_diagnostics(const CellQuantiles& cq,
                                  const QuantileGrid& grid_u,
                                  const QuantileGrid& grid_v, double band) {
  const std::int64_t pre = cq.periods.front();
  const std::int64_t post = cq.periods.back();

  DiagnosticsReport rep;
  if (band <= 0.0) {
    // Resolve the band once so the null calibration uses the same value.
    const auto s0 = surface_for(cq, Arm::Control, pre, grid_u, grid_v);
    std::vector<double> gaps;
    const std::size_t mv = grid_v.points.size();
    const std::size_t mu = grid_u.points.size();
    for (std::size_t u = 0; u < mu; ++u)
      for (std::size_t v = 0; v + 1 < mv; ++v)
        gaps.push_back(std::abs(s0[u * mv + v + 1] - s0[u * mv + v]));
    for (std::size_t u = 0; u + 1 < mu; ++u)
      for (std::size_t v = 0; v < mv; ++v)
        gaps.push_back(std::abs(s0[(u + 1) * mv + v] - s0[u * mv + v]));
    band = median(std::move(gaps));
  }
  rep.band = band;

  rep.case1 = diagnose_case1(cq, grid_u, grid_v);
  rep.case2 = diagnose_case2(cq, grid_u, grid_v);
  rep.case3 = diagnose_case3(cq, grid_u, grid_v, band);

  // Null configuration: split the control groups into halves; the halves
  // share one population, so any nonzero statistic there is sampling noise.
  std::vector<std::string> controls;
  for (const auto& [g, arm] : cq.roles)
    if (arm == Arm::Control) controls.push_back(g);
  std::sort(controls.begin(), controls.end());

  if (controls.size() >= 4) {
    std::vector<std::string> half_a, half_b;
    for (std::size_t i = 0; i < controls.size(); ++i)
      (i % 2 == 0 ? half_a : half_b).push_back(controls[i]);

    CellQuantiles null_cq = cq.filter_groups(controls);
    for (const auto& g : half_a) null_cq.roles[g] = Arm::Treated;
    rep.threshold1 = 3.0 * diagnose_case1(null_cq, grid_u, grid_v).statistic;
    rep.threshold2 = 3.0 * diagnose_case2(null_cq, grid_u, grid_v).statistic;

    // Case-3 null: match one half's period-0 surface against the other's.
    CellQuantiles null3;
    null3.grid_u = cq.grid_u;
    null3.periods = {pre, post};
    for (const auto& g : half_a) {
      null3.by_cell.emplace(CellKey{g, pre}, cq.cell(g, pre));
      null3.roles.emplace(g, Arm::Control);
    }
    for (const auto& g : half_b) {
      null3.by_cell.emplace(CellKey{g, post}, cq.cell(g, pre));
      null3.roles.emplace(g, Arm::Control);
    }
    rep.threshold3 = 3.0 * diagnose_case3(null3, grid_u, grid_v, band).statistic;

    rep.consistent1 = rep.case1.statistic <= rep.threshold1;
    rep.consistent2 = rep.case2.statistic <= rep.threshold2;
    rep.consistent3 =
        rep.case3.defined && rep.case3.statistic <= rep.threshold3;
    rep.note =
        "Verdicts are descriptive: each statistic is compared against 3x the "
        "same statistic on a split-half null of the control arm. The case-3 "
        "diagnostic cannot distinguish unequal supports across arms from a "
        "failure of the time-invariant index condition; bounded supports are "
        "assumed, not checked.";
  } else {
    rep.consistent1 = rep.case1.statistic == 0.0;
    rep.consistent2 = rep.case2.statistic == 0.0;
    rep.consistent3 = rep.case3.defined && rep.case3.statistic == 0.0;
    rep.note =
        "Fewer than four control groups: split-half noise calibration is "
        "unavailable, verdicts require exactly zero statistics.";
  }
  return rep;
}

nlohmann::json DiagnosticsReport::to_json(bool include_profiles) const {
  auto result_json = [&](const DiagnosticResult& r) {
    nlohmann::json j{{"statistic", r.statistic},
                     {"defined", r.defined},
                     {"excluded_cells", r.excluded_cells}};
    if (include_profiles && !r.profile.surface.empty()) {
      j["profile"] = {{"grid_u", r.profile.grid_u},
                      {"grid_v", r.profile.grid_v},
                      {"surface", r.profile.surface}};
    }
    return j;
  };
  return nlohmann::json{
      {"case1", result_json(case1)},
      {"case2", result_json(case2)},
      {"case3", result_json(case3)},
      {"thresholds", {threshold1, threshold2, threshold3}},
      {"verdicts",
       {{"case1", consistent1 ? "consistent" : "inconsistent"},
        {"case2", consistent2 ? "consistent" : "inconsistent"},
        {"case3", consistent3 ? "consistent" : "inconsistent"}}},
      {"band", band},
      {"note", note}};
}

}  // namespace cicdsc
