// Command-line front end: panel data in, estimates / diagnostics / simulation
// reports out.
//
// Exit codes: 0 success, 2 input or validation failure, 3 estimation failure,
// 4 optimizer non-convergence.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cicdsc/cic.hpp"
#include "cicdsc/diagnostics.hpp"
#include "cicdsc/dsc.hpp"
#include "cicdsc/errors.hpp"
#include "cicdsc/kernels.hpp"
#include "cicdsc/panel.hpp"
#include "cicdsc/scenario.hpp"

namespace {

using nlohmann::json;
using namespace cicdsc;

struct CommonOpts {
  std::string input;
  std::string roles_path;
  std::string schema_spec;
  std::string out_path;
  std::string dump_cells_path;
  int grid_m = 99;
  double grid_lo = 0.05;
  double grid_hi = 0.95;
  std::vector<double> tau_u{0.5};
  std::vector<double> tau_v{0.5};
  int min_cell_size = 30;
};

PanelSchema parse_schema(const std::string& spec) {
  PanelSchema schema;
  if (spec.empty()) return schema;
  std::stringstream ss(spec);
  std::string pair;
  while (std::getline(ss, pair, ',')) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos)
      throw ValidationError("bad --schema entry '" + pair +
                            "'; expected key=column");
    const std::string key = pair.substr(0, eq);
    const std::string col = pair.substr(eq + 1);
    if (key == "unit")
      schema.unit = col;
    else if (key == "group")
      schema.group = col;
    else if (key == "period")
      schema.period = col;
    else if (key == "outcome")
      schema.outcome = col;
    else if (key == "treated")
      schema.treated = col;
    else
      throw ValidationError("unknown --schema key '" + key + "'");
  }
  return schema;
}

PanelDataset load_from(const CommonOpts& opts) {
  LoadOptions lo;
  lo.schema = parse_schema(opts.schema_spec);
  lo.min_cell_size = opts.min_cell_size;
  if (!opts.roles_path.empty()) lo.roles = load_roles_file(opts.roles_path);
  return load_panel_file(opts.input, lo);
}

void write_report(const std::string& path, const json& report) {
  if (path.empty()) {
    std::cout << report.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open output file '" + path + "'");
  out << report.dump(2) << "\n";
}

void maybe_dump_cells(const CellQuantiles& cq, const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open dump file '" + path + "'");
  dump_cell_quantiles(cq, out);
}

json common_config(const CommonOpts& opts) {
  return {{"input", opts.input},
          {"roles", opts.roles_path},
          {"schema", opts.schema_spec},
          {"grid", {{"m", opts.grid_m}, {"lo", opts.grid_lo}, {"hi", opts.grid_hi}}},
          {"tau_u", opts.tau_u},
          {"tau_v", opts.tau_v},
          {"min_cell_size", opts.min_cell_size},
          {"kernel_backend",
           kernels::backend_name(kernels::active_backend())}};
}

json estimate_json(const CicEstimate& est, double tau_u, double tau_v) {
  json j{{"case", static_cast<int>(est.case_used)},
         {"tau_u_star", tau_u},
         {"tau_v_star", tau_v},
         {"counterfactual", est.counterfactual},
         {"observed", est.observed},
         {"qtt", est.qtt}};
  if (est.matched_tau_u) {
    j["matched_tau_u"] = *est.matched_tau_u;
    j["match_objective"] = est.match_objective;
    j["mismatch_warning"] = est.mismatch_warning;
  }
  if (est.case_used == CicCase::Case3) {
    json pairs = json::array();
    for (const auto& [tu, tv] : est.matched_set) pairs.push_back({tu, tv});
    j["matched_set"] = pairs;
    j["matched_dispersion"] = est.matched_dispersion;
    j["skipped_grid_points"] = est.skipped_grid_points;
  }
  if (est.case_used == CicCase::Case1) {
    j["clamp_count"] = est.clamp_count;
    j["support_warning"] = est.support_warning;
  }
  return j;
}

int cmd_cic(const CommonOpts& opts, const std::string& case_arg,
            double mismatch_tol, double band) {
  const PanelDataset panel = load_from(opts);
  if (panel.periods.size() != 2)
    throw ValidationError("the cic command needs exactly two periods, got " +
                          std::to_string(panel.periods.size()));
  const QuantileGrid grid =
      QuantileGrid::equispaced(opts.grid_m, opts.grid_lo, opts.grid_hi);
  const CellQuantiles cq = within_group_quantiles(panel, grid);
  maybe_dump_cells(cq, opts.dump_cells_path);

  const DiagnosticsReport diag = run_diagnostics(cq, grid, grid, band);

  std::vector<CicCase> cases;
  bool overidentified = false;
  if (case_arg == "auto") {
    if (diag.consistent1) cases.push_back(CicCase::Case1);
    if (diag.consistent2) cases.push_back(CicCase::Case2);
    if (diag.consistent3) cases.push_back(CicCase::Case3);
    overidentified = cases.size() > 1;
  } else if (case_arg == "1" || case_arg == "2" || case_arg == "3") {
    cases.push_back(static_cast<CicCase>(case_arg[0] - '0'));
  } else {
    throw ValidationError("--case must be 1, 2, 3 or auto");
  }

  json estimates = json::array();
  for (CicCase which : cases) {
    for (double tu : opts.tau_u) {
      for (double tv : opts.tau_v) {
        CicRequest req;
        req.tau_u_star = tu;
        req.tau_v_star = tv;
        req.which = which;
        req.grid_u = grid;
        req.grid_v = grid;
        req.mismatch_tol = mismatch_tol;
        estimates.push_back(estimate_json(estimate_cic(cq, req), tu, tv));
      }
    }
  }

  json report{{"command", "cic"},
              {"config", common_config(opts)},
              {"case_selection", case_arg},
              {"diagnostics", diag.to_json()},
              {"overidentified", overidentified},
              {"estimates", estimates}};
  if (case_arg == "auto" && cases.empty())
    report["warning"] =
        "no identification case is consistent with the diagnostics";
  write_report(opts.out_path, report);
  return 0;
}

int cmd_dsc(const CommonOpts& opts, std::int64_t t0, int min_periods,
            const std::string& dump_fit_path) {
  const PanelDataset panel = load_from(opts);
  if (t0 >= panel.periods.back())
    throw ValidationError("no post-treatment regime: t0 >= last period");
  if (t0 < panel.periods.front())
    throw ValidationError("no pre-treatment regime: t0 < first period");
  const auto treated = panel.arm_groups(Arm::Treated);
  if (treated.size() != 1)
    throw ValidationError("the dsc command needs exactly one treated group, got " +
                          std::to_string(treated.size()));

  const QuantileGrid grid =
      QuantileGrid::equispaced(opts.grid_m, opts.grid_lo, opts.grid_hi);
  const CellQuantiles cq = within_group_quantiles(panel, grid);
  maybe_dump_cells(cq, opts.dump_cells_path);

  const TsQuantilePanel ts =
      build_ts_panel(cq, treated.front(), t0, grid, grid, min_periods);
  const DscFit fit = fit_weights(ts);
  const DscFit baseline =
      baseline_same_period_weights(cq, treated.front(), t0, grid);

  auto weights_json = [&](const DscFit& f) {
    json w = json::object();
    for (std::size_t g = 1; g < ts.groups().size(); ++g)
      w[ts.groups()[g]] = f.weights.lambda[g - 1];
    return json{{"weights", w},
                {"fit_residual", f.fit_residual},
                {"iterations", f.iterations},
                {"duplicate_columns", f.duplicate_columns}};
  };

  json estimates = json::array();
  for (double tu : opts.tau_u) {
    for (double tv : opts.tau_v) {
      const DscEstimate est =
          dsc_counterfactual(ts, fit.weights, tu, tv, fit.fit_residual);
      const DscEstimate base =
          dsc_counterfactual(ts, baseline.weights, tu, tv,
                             baseline.fit_residual);
      estimates.push_back({{"tau_u_star", tu},
                           {"tau_v_star", tv},
                           {"counterfactual", est.counterfactual},
                           {"observed", est.observed},
                           {"gap", est.gap},
                           {"baseline_counterfactual", base.counterfactual},
                           {"baseline_gap", base.gap}});
    }
  }

  if (!dump_fit_path.empty()) {
    std::ofstream out(dump_fit_path);
    if (!out)
      throw ValidationError("cannot open dump file '" + dump_fit_path + "'");
    dump_dsc_fit(ts, fit.weights, out);
  }

  json config = common_config(opts);
  config["t0"] = t0;
  config["min_periods"] = min_periods;
  json report{{"command", "dsc"},
              {"config", config},
              {"treated_group", ts.groups().front()},
              {"fit", weights_json(fit)},
              {"baseline_same_period", weights_json(baseline)},
              {"estimates", estimates}};
  write_report(opts.out_path, report);
  return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_path,
                 const std::string& csv_path, int reps_override,
                 long long seed_override) {
  std::ifstream in(scenario_path);
  if (!in)
    throw ValidationError("cannot open scenario file '" + scenario_path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario file is not valid JSON: ") +
                          e.what());
  }
  if (reps_override > 0) j["reps"] = reps_override;
  if (seed_override >= 0) j["seed"] = static_cast<std::uint64_t>(seed_override);
  Scenario scenario;
  try {
    scenario = Scenario::from_json(j);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad scenario config: ") + e.what());
  }

  const McResult result = run_scenario(scenario);

  std::cout << "scenario: " << scenario.estimator << " reps=" << result.reps
            << "\n";
  std::cout << "truth     " << result.truth << "\n";
  std::cout << "mean      " << result.mean << "\n";
  std::cout << "bias      " << result.bias << "\n";
  std::cout << "rmse      " << result.rmse << "\n";
  std::cout << "se(mean)  " << result.se_mean << "\n";

  json report{{"command", "simulate"},
              {"config", scenario.to_json()},
              {"result", result.to_json()}};
  write_report(out_path, report);

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw ValidationError("cannot open CSV file '" + csv_path + "'");
    result.write_csv(csv);
  }
  return 0;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool dsc_defaults) {
  cmd->add_option("--input", opts.input, "panel data file (CSV or TSV)")
      ->required();
  cmd->add_option("--roles", opts.roles_path,
                  "sidecar role file: group,treated");
  cmd->add_option("--schema", opts.schema_spec,
                  "column map, e.g. unit=uid,group=grp,period=t,outcome=y");
  cmd->add_option("--grid-m", opts.grid_m, "quantile grid size");
  cmd->add_option("--grid-lo", opts.grid_lo, "lowest grid level");
  cmd->add_option("--grid-hi", opts.grid_hi, "highest grid level");
  cmd->add_option("--tau-u", opts.tau_u, "target individual quantile level(s)");
  cmd->add_option("--tau-v", opts.tau_v, "target group quantile level(s)");
  cmd->add_option("--min-cell-size", opts.min_cell_size,
                  "minimum observations per (group, period) cell");
  cmd->add_option("--out", opts.out_path, "report path (default: stdout)");
  cmd->add_option("--dump-cells", opts.dump_cells_path,
                  "write the aggregated quantile curves as long-format CSV");
  if (dsc_defaults) opts.grid_m = 29;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-heterogeneous changes-in-changes and distributional "
               "synthetic control"};
  app.require_subcommand(1);

  CommonOpts cic_opts;
  std::string case_arg = "auto";
  double mismatch_tol = -1.0;
  double band = -1.0;
  CLI::App* cic = app.add_subcommand(
      "cic", "counterfactual quantiles and QTT for two-period panels");
  add_common(cic, cic_opts, false);
  cic->add_option("--case", case_arg, "identification case: 1, 2, 3 or auto");
  cic->add_option("--mismatch-tol", mismatch_tol,
                  "case-2 match tolerance (default: scale-aware)");
  cic->add_option("--band", band,
                  "case-3 diagnostic band (default: resolution-aware)");

  CommonOpts dsc_opts;
  std::int64_t t0 = 0;
  int min_periods = 20;
  std::string dump_fit_path;
  CLI::App* dsc = app.add_subcommand(
      "dsc", "distributional synthetic control for long panels");
  add_common(dsc, dsc_opts, true);
  dsc->add_option("--t0", t0, "last pre-treatment period")->required();
  dsc->add_option("--min-periods", min_periods,
                  "minimum periods per regime and group");
  dsc->add_option("--dump-fit", dump_fit_path,
                  "write fitted vs target pre-period curves as CSV");

  std::string scenario_path, sim_out, sim_csv;
  int reps_override = 0;
  long long seed_override = -1;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Monte Carlo runs of an estimator against its oracle");
  sim->add_option("--scenario", scenario_path, "scenario JSON file")
      ->required();
  sim->add_option("--out", sim_out, "report path (default: stdout)");
  sim->add_option("--csv", sim_csv, "per-replication estimates CSV");
  sim->add_option("--reps", reps_override, "override the scenario rep count");
  sim->add_option("--seed", seed_override, "override the scenario seed");

  try {
    app.parse(argc, argv);
    if (cic->parsed())
      return cmd_cic(cic_opts, case_arg, mismatch_tol, band);
    if (dsc->parsed())
      return cmd_dsc(dsc_opts, t0, min_periods, dump_fit_path);
    return cmd_simulate(scenario_path, sim_out, sim_csv, reps_override,
                        seed_override);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cicdsc::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const cicdsc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cicdsc::EstimationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
