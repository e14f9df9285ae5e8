#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "cicdsc/dgp.hpp"
#include "cicdsc/mc.hpp"
#include "cicdsc/quantile.hpp"

// A simulation scenario: a generative spec plus the estimator to run against
// its analytic oracle.

namespace cicdsc {

struct Scenario {
  enum class Kind { Cic, Dsc };
  Kind kind = Kind::Cic;
  // "case1" | "case2" | "case3" for CiC; "dsc" | "baseline" for DSC.
  std::string estimator = "case1";
  int reps = 100;
  double tau_u_star = 0.5;
  double tau_v_star = 0.5;
  QuantileGrid grid = QuantileGrid::equispaced(29, 0.05, 0.95);
  std::uint64_t seed = 1;
  // Whether the scenario asserts treated-support inclusion (checked by the
  // validator; scenarios built to violate it opt out).
  bool claims_support_inclusion = true;

  CicDgp cic;
  DscDgp dsc;

  static Scenario from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

// Analytic oracle value the estimator should converge to.
double scenario_truth(const Scenario& s);

// One replication with the given seed; returns the counterfactual estimate.
double run_scenario_once(const Scenario& s, std::uint64_t seed);

McResult run_scenario(const Scenario& s);

}  // namespace cicdsc
