#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

#include "cicdsc/dgp.hpp"
#include "cicdsc/panel.hpp"
#include "cicdsc/scenario.hpp"

// Integration tests that spawn the real binary (path passed as argv[1]) and
// assert on exit codes and emitted reports. All fixtures are generated here.

using nlohmann::json;
using namespace cicdsc;

namespace {

std::string g_bin;

const std::string& work_dir() {
  static const std::string dir = [] {
    const auto d = std::filesystem::temp_directory_path() / "cicdsc_cli_test";
    std::filesystem::create_directories(d);
    return d.string();
  }();
  return dir;
}

std::string path_of(const std::string& name) { return work_dir() + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the binary with the given arguments; returns the exit code and leaves
// combined stdout/stderr in *output when requested.
int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string capture = path_of("last_output.txt");
  const std::string cmd =
      "\"" + g_bin + "\" " + args + " > \"" + capture + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) *output = slurp(capture);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Long-format CSV for a generated panel; the unit id is unique within a
// (group, period) cell and stable across periods.
void write_panel_csv(const std::string& path, const PanelDataset& p,
                     bool with_treated_column) {
  std::ofstream out(path);
  out << "unit,group,period,outcome";
  if (with_treated_column) out << ",treated";
  out << "\n";
  for (const auto& [key, cell] : p.cells) {
    const bool treated = p.roles.at(key.first) == Arm::Treated;
    for (std::size_t i = 0; i < cell.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", cell[i]);
      out << key.first << "-" << i << "," << key.first << "," << key.second
          << "," << buf;
      if (with_treated_column) out << "," << (treated ? 1 : 0);
      out << "\n";
    }
  }
}

std::string cic_fixture(const std::string& name, const CicDgp& dgp,
                        std::uint64_t seed) {
  const std::string path = path_of(name);
  write_panel_csv(path, generate_cic_panel(dgp, seed), true);
  return path;
}

CicDgp identical_arms_dgp() {
  CicDgp dgp;
  dgp.h = HForm::additive(0.0, 0.5);
  dgp.groups_per_arm = 40;
  dgp.cell_size = 80;
  return dgp;
}

}  // namespace

TEST_CASE("help exits cleanly") {
  std::string out;
  CHECK(run_cli("--help", &out) == 0);
  CHECK(out.find("cic") != std::string::npos);
  CHECK(out.find("dsc") != std::string::npos);
  CHECK(out.find("simulate") != std::string::npos);
}

TEST_CASE("unknown arguments exit with the usage code") {
  CHECK(run_cli("--no-such-flag") == 2);
  CHECK(run_cli("cic") == 2);  // --input is required
}

TEST_CASE("cic on identical arms: near-zero qtt and a full report") {
  const auto input = cic_fixture("identical.csv", identical_arms_dgp(), 1);
  const auto out = path_of("cic_report.json");
  CHECK(run_cli("cic --input \"" + input + "\" --case 1 --grid-m 29 --out \"" +
                out + "\"") == 0);
  const json report = json::parse(slurp(out));
  CHECK(report.at("command") == "cic");
  CHECK(report.at("config").at("grid").at("m") == 29);
  CHECK(report.at("config").contains("kernel_backend"));
  CHECK(report.at("diagnostics").contains("verdicts"));
  REQUIRE(report.at("estimates").size() == 1);
  const auto& est = report.at("estimates")[0];
  CHECK(est.at("case") == 1);
  CHECK(std::abs(est.at("qtt").get<double>()) < 0.05);
  CHECK(est.at("qtt").get<double>() ==
        est.at("observed").get<double>() - est.at("counterfactual").get<double>());
}

TEST_CASE("cic --case auto reports overidentification on compliant data") {
  const auto input = cic_fixture("identical2.csv", identical_arms_dgp(), 2);
  const auto out = path_of("auto_report.json");
  CHECK(run_cli("cic --input \"" + input + "\" --case auto --grid-m 29 --out \"" +
                out + "\"") == 0);
  const json report = json::parse(slurp(out));
  CHECK(report.at("case_selection") == "auto");
  CHECK(report.at("overidentified") == true);
  CHECK(report.at("estimates").size() >= 2);  // one block per consistent case
}

TEST_CASE("tau lists produce the cross product of estimates") {
  const auto input = cic_fixture("taus.csv", identical_arms_dgp(), 3);
  const auto out = path_of("taus_report.json");
  CHECK(run_cli("cic --input \"" + input +
                "\" --case 1 --grid-m 29 --tau-u 0.25 0.75 --tau-v 0.5 --out \"" +
                out + "\"") == 0);
  const json report = json::parse(slurp(out));
  REQUIRE(report.at("estimates").size() == 2);
  CHECK(report.at("estimates")[0].at("tau_u_star") == 0.25);
  CHECK(report.at("estimates")[1].at("tau_u_star") == 0.75);
}

TEST_CASE("missing column is a usage error naming the column") {
  const auto path = path_of("missing_col.csv");
  std::ofstream(path) << "unit,group,period,treated\nu1,a,0,1\n";
  std::string out;
  CHECK(run_cli("cic --input \"" + path + "\"", &out) == 2);
  CHECK(out.find("outcome") != std::string::npos);
}

TEST_CASE("undersized cells fail unless --min-cell-size is lowered") {
  CicDgp dgp = identical_arms_dgp();
  dgp.groups_per_arm = 6;
  dgp.cell_size = 10;  // below the default threshold of 30
  const auto input = cic_fixture("small_cells.csv", dgp, 4);
  std::string out;
  CHECK(run_cli("cic --input \"" + input + "\" --case 1 --grid-m 29", &out) == 2);
  CHECK(out.find("min_cell_size") != std::string::npos);
  CHECK(run_cli("cic --input \"" + input +
                "\" --case 1 --grid-m 29 --min-cell-size 5") == 0);
}

TEST_CASE("schema remapping and a roles sidecar") {
  const auto panel = generate_cic_panel(identical_arms_dgp(), 5);
  const auto path = path_of("renamed.csv");
  {
    std::ofstream out(path);
    out << "id,g,t,y\n";
    for (const auto& [key, cell] : panel.cells)
      for (std::size_t i = 0; i < cell.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", cell[i]);
        out << key.first << "-" << i << "," << key.first << "," << key.second
            << "," << buf << "\n";
      }
  }
  const auto roles = path_of("roles.csv");
  {
    std::ofstream out(roles);
    out << "group,treated\n";
    for (const auto& [group, arm] : panel.roles)
      out << group << "," << (arm == Arm::Treated ? 1 : 0) << "\n";
  }
  // Without roles the treated column is missing entirely.
  std::string err;
  CHECK(run_cli("cic --input \"" + path +
                "\" --schema unit=id,group=g,period=t,outcome=y --case 1 "
                "--grid-m 29",
                &err) == 2);
  CHECK(run_cli("cic --input \"" + path +
                "\" --schema unit=id,group=g,period=t,outcome=y --roles \"" +
                roles + "\" --case 1 --grid-m 29") == 0);
  CHECK(run_cli("cic --input \"" + path + "\" --schema nonsense", &err) == 2);
  CHECK(err.find("key=column") != std::string::npos);
}

TEST_CASE("cell quantile dump has the long format header") {
  const auto input = cic_fixture("dump.csv", identical_arms_dgp(), 6);
  const auto dump = path_of("cells.csv");
  CHECK(run_cli("cic --input \"" + input + "\" --case 1 --grid-m 29 "
                "--dump-cells \"" + dump + "\"") == 0);
  const std::string text = slurp(dump);
  CHECK(text.rfind("group,period,tau_u,value\n", 0) == 0);
  CHECK(text.find("C0001,0,") != std::string::npos);
}

TEST_CASE("identical invocations write byte-identical reports") {
  const auto input = cic_fixture("det.csv", identical_arms_dgp(), 7);
  const auto out1 = path_of("det1.json"), out2 = path_of("det2.json");
  const std::string args = "cic --input \"" + input + "\" --case 2 --grid-m 29";
  CHECK(run_cli(args + " --out \"" + out1 + "\"") == 0);
  CHECK(run_cli(args + " --out \"" + out2 + "\"") == 0);
  const std::string a = slurp(out1);
  CHECK(!a.empty());
  CHECK(a == slurp(out2));
}

TEST_CASE("dsc recovers construction weights on a representable panel") {
  DscDgp dgp;
  dgp.control_v = {Dist::normal(0.0, 0.5), Dist::normal(1.0, 1.5),
                   Dist::normal(2.0, 1.0)};
  dgp.lambda_star = {0.5, 0.3, 0.2};
  dgp.t0 = 300;
  dgp.t = 600;
  dgp.cell_size = 200;
  const auto input = path_of("dsc.csv");
  write_panel_csv(input, generate_dsc_panel(dgp, 11), true);
  const auto out = path_of("dsc_report.json");
  CHECK(run_cli("dsc --input \"" + input + "\" --t0 300 --grid-m 29 --out \"" +
                out + "\"") == 0);
  const json report = json::parse(slurp(out));
  CHECK(report.at("treated_group") == "G0001");
  const auto& w = report.at("fit").at("weights");
  REQUIRE(w.size() == 3);
  CHECK(std::abs(w.at("G0002").get<double>() - 0.5) < 0.1);
  CHECK(std::abs(w.at("G0003").get<double>() - 0.3) < 0.1);
  CHECK(std::abs(w.at("G0004").get<double>() - 0.2) < 0.1);
  CHECK(report.at("baseline_same_period").at("weights").size() == 3);
  REQUIRE(report.at("estimates").size() == 1);
  CHECK(std::abs(report.at("estimates")[0].at("gap").get<double>()) < 0.3);

  // The fit dump is a per-(regime, period-ish) table; just check the header.
  const auto dump = path_of("fit.csv");
  CHECK(run_cli("dsc --input \"" + input + "\" --t0 300 --grid-m 29 "
                "--dump-fit \"" + dump + "\"") == 0);
  CHECK(!slurp(dump).empty());
}

TEST_CASE("dsc with a single donor pins the weight to one") {
  DscDgp dgp;
  dgp.control_v = {Dist::normal(0.0, 1.0)};
  dgp.lambda_star = {1.0};
  dgp.t0 = 40;
  dgp.t = 80;
  dgp.cell_size = 120;
  const auto input = path_of("dsc_single.csv");
  write_panel_csv(input, generate_dsc_panel(dgp, 12), true);
  const auto out = path_of("dsc_single.json");
  CHECK(run_cli("dsc --input \"" + input + "\" --t0 40 --grid-m 29 --out \"" +
                out + "\"") == 0);
  const json report = json::parse(slurp(out));
  CHECK(report.at("fit").at("weights").at("G0002") == 1.0);
}

TEST_CASE("dsc rejects a cutoff with no post-treatment periods") {
  DscDgp dgp;
  dgp.control_v = {Dist::normal(0.0, 1.0)};
  dgp.lambda_star = {1.0};
  dgp.t0 = 30;
  dgp.t = 60;
  dgp.cell_size = 60;
  const auto input = path_of("dsc_t0.csv");
  write_panel_csv(input, generate_dsc_panel(dgp, 13), true);
  std::string out;
  CHECK(run_cli("dsc --input \"" + input + "\" --t0 60", &out) == 2);
  CHECK(out.find("no post-treatment regime") != std::string::npos);
  CHECK(run_cli("dsc --input \"" + input + "\" --t0 0", &out) == 2);
  CHECK(out.find("no pre-treatment regime") != std::string::npos);
}

TEST_CASE("simulate smoke run with overrides and a csv dump") {
  Scenario s;
  s.kind = Scenario::Kind::Cic;
  s.estimator = "case1";
  s.reps = 50;  // overridden below
  s.cic.groups_per_arm = 30;
  s.cic.cell_size = 60;
  const auto scen = path_of("scenario.json");
  std::ofstream(scen) << s.to_json().dump(2);
  const auto out = path_of("sim_report.json");
  const auto csv = path_of("sim_reps.csv");
  std::string text;
  CHECK(run_cli("simulate --scenario \"" + scen + "\" --reps 10 --seed 2 "
                "--out \"" + out + "\" --csv \"" + csv + "\"",
                &text) == 0);
  CHECK(text.find("rmse") != std::string::npos);
  const json report = json::parse(slurp(out));
  CHECK(report.at("result").at("reps") == 10);
  CHECK(report.at("config").at("seed") == 2);
  CHECK(report.at("result").at("estimates").size() == 10);
  CHECK(report.at("result").at("rmse").get<double>() < 0.2);
  CHECK(slurp(csv).rfind("rep,estimate,error\n", 0) == 0);
}

TEST_CASE("simulate rejects broken scenarios with usage errors") {
  std::string out;
  CHECK(run_cli("simulate --scenario \"" + path_of("nope.json") + "\"", &out) ==
        2);
  CHECK(out.find("cannot open") != std::string::npos);

  const auto garbled = path_of("garbled.json");
  std::ofstream(garbled) << "{not json";
  CHECK(run_cli("simulate --scenario \"" + garbled + "\"", &out) == 2);
  CHECK(out.find("not valid JSON") != std::string::npos);

  Scenario s;
  s.cic.groups_per_arm = 5;
  s.cic.cell_size = 40;
  auto j = s.to_json();
  j["reps"] = 1;  // below the Monte Carlo minimum
  const auto scen = path_of("one_rep.json");
  std::ofstream(scen) << j.dump(2);
  CHECK(run_cli("simulate --scenario \"" + scen + "\"", &out) == 2);
  CHECK(out.find("reps") != std::string::npos);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-cicdsc-binary>\n", argv[0]);
    return 1;
  }
  g_bin = argv[1];
  doctest::Context ctx;
  ctx.applyCommandLine(1, argv);
  return ctx.run();
}
