#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "json.hpp"

// Monte Carlo driver: replication seeds are derived from the master seed by a
// counter scheme, so runs are reproducible in any order and bit-identical
// given (spec, reps).

namespace cicdsc {

struct McResult {
  int reps = 0;
  double truth = 0.0;
  std::vector<double> estimates;
  double mean = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double se_mean = 0.0;  // standard error of the mean estimate

  nlohmann::json to_json() const;
  // Flat CSV of per-replication estimates: rep, estimate, error.
  void write_csv(std::ostream& out) const;
};

// run_one receives the replication seed and returns the estimate. Any
// replication error aborts with the replication index attached.
McResult run_monte_carlo(int reps, std::uint64_t master_seed, double truth,
                         const std::function<double(std::uint64_t)>& run_one);

}  // namespace cicdsc
