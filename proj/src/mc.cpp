#include "cicdsc/mc.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "cicdsc/dgp.hpp"
#include "cicdsc/errors.hpp"

namespace cicdsc {

McResult run_monte_carlo(int reps, std::uint64_t master_seed, double truth,
                         const std::function<double(std::uint64_t)>& run_one) {
  if (reps < 2) throw ValidationError("Monte Carlo needs at least 2 replications");

  McResult res;
  res.reps = reps;
  res.truth = truth;
  res.estimates.reserve(reps);
  for (int rep = 0; rep < reps; ++rep) {
    try {
      res.estimates.push_back(run_one(derive_seed(master_seed, rep)));
    } catch (const std::exception& e) {
      throw EstimationError("replication " + std::to_string(rep) +
                            " failed: " + e.what());
    }
  }

  double sum = 0.0, sq_err = 0.0;
  for (double est : res.estimates) {
    sum += est;
    const double err = est - truth;
    sq_err += err * err;
  }
  const double n = static_cast<double>(reps);
  res.mean = sum / n;
  res.bias = res.mean - truth;
  res.rmse = std::sqrt(sq_err / n);
  double var = 0.0;
  for (double est : res.estimates) {
    const double d = est - res.mean;
    var += d * d;
  }
  var /= (n - 1.0);
  res.se_mean = std::sqrt(var / n);
  return res;
}

nlohmann::json McResult::to_json() const {
  return {{"reps", reps},       {"truth", truth}, {"mean", mean},
          {"bias", bias},       {"rmse", rmse},   {"se_mean", se_mean},
          {"estimates", estimates}};
}

void McResult::write_csv(std::ostream& out) const {
  out << "rep,estimate,error\n";
  char buf[96];
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i, estimates[i],
                  estimates[i] - truth);
    out << buf;
  }
}

}  // namespace cicdsc
