#include "cicdsc/scenario.hpp"

#include "cicdsc/cic.hpp"
#include "cicdsc/dsc.hpp"
#include "cicdsc/errors.hpp"
#include "cicdsc/panel.hpp"

namespace cicdsc {

Scenario Scenario::from_json(const nlohmann::json& j) {
  Scenario s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "cic") {
    s.kind = Kind::Cic;
    s.cic = CicDgp::from_json(j.at("dgp"));
  } else if (kind == "dsc") {
    s.kind = Kind::Dsc;
    s.dsc = DscDgp::from_json(j.at("dgp"));
  } else {
    throw ValidationError("unknown scenario kind '" + kind + "'");
  }
  s.estimator = j.at("estimator").get<std::string>();
  s.reps = j.at("reps").get<int>();
  s.tau_u_star = j.value("tau_u_star", 0.5);
  s.tau_v_star = j.value("tau_v_star", 0.5);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    s.grid = QuantileGrid::equispaced(g.value("m", 29), g.value("lo", 0.05),
                                      g.value("hi", 0.95));
  }
  s.seed = j.value("seed", 1ULL);
  s.claims_support_inclusion = j.value("claims_support_inclusion", true);
  s.validate();
  return s;
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json j{{"kind", kind == Kind::Cic ? "cic" : "dsc"},
                   {"estimator", estimator},
                   {"reps", reps},
                   {"tau_u_star", tau_u_star},
                   {"tau_v_star", tau_v_star},
                   {"grid", {{"m", grid.m}, {"lo", grid.lo}, {"hi", grid.hi}}},
                   {"seed", seed},
                   {"claims_support_inclusion", claims_support_inclusion}};
  j["dgp"] = kind == Kind::Cic ? cic.to_json() : dsc.to_json();
  return j;
}

void Scenario::validate() const {
  if (reps < 2) throw ValidationError("scenario needs reps >= 2");
  if (!(tau_u_star > grid.lo && tau_u_star < grid.hi) ||
      !(tau_v_star > grid.lo && tau_v_star < grid.hi))
    throw ValidationError(
        "tau_u_star and tau_v_star must lie strictly inside the grid");
  if (kind == Kind::Cic) {
    if (estimator != "case1" && estimator != "case2" && estimator != "case3")
      throw ValidationError("CiC estimator must be case1, case2 or case3");
    validate_cic_dgp(cic, claims_support_inclusion);
  } else {
    if (estimator != "dsc" && estimator != "baseline")
      throw ValidationError("DSC estimator must be dsc or baseline");
    validate_dsc_dgp(dsc);
  }
}

double scenario_truth(const Scenario& s) {
  return s.kind == Scenario::Kind::Cic
             ? oracle_cic_truth(s.cic, s.tau_u_star, s.tau_v_star)
             : oracle_dsc_truth(s.dsc, s.tau_u_star, s.tau_v_star);
}

double run_scenario_once(const Scenario& s, std::uint64_t seed) {
  if (s.kind == Scenario::Kind::Cic) {
    const PanelDataset panel = generate_cic_panel(s.cic, seed);
    const CellQuantiles cq = within_group_quantiles(panel, s.grid);
    CicRequest req;
    req.tau_u_star = s.tau_u_star;
    req.tau_v_star = s.tau_v_star;
    req.grid_u = s.grid;
    req.grid_v = s.grid;
    req.which = s.estimator == "case1"   ? CicCase::Case1
                : s.estimator == "case2" ? CicCase::Case2
                                         : CicCase::Case3;
    return estimate_cic(cq, req).counterfactual;
  }

  const PanelDataset panel = generate_dsc_panel(s.dsc, seed);
  const CellQuantiles cq = within_group_quantiles(panel, s.grid);
  const std::string treated = panel.arm_groups(Arm::Treated).front();
  const TsQuantilePanel ts =
      build_ts_panel(cq, treated, s.dsc.t0, s.grid, s.grid);
  const DscFit fit = s.estimator == "baseline"
                         ? baseline_same_period_weights(cq, treated, s.dsc.t0,
                                                        s.grid)
                         : fit_weights(ts);
  return dsc_counterfactual(ts, fit.weights, s.tau_u_star, s.tau_v_star,
                            fit.fit_residual)
      .counterfactual;
}

McResult run_scenario(const Scenario& s) {
  return run_monte_carlo(s.reps, s.seed, scenario_truth(s),
                         [&](std::uint64_t seed) {
                           return run_scenario_once(s, seed);
                         });
}

}  // namespace cicdsc
