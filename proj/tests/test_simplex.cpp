#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "cicdsc/errors.hpp"
#include "cicdsc/simplex.hpp"

using namespace cicdsc;

namespace {

SimplexLsProblem random_problem(std::mt19937_64& rng, std::size_t rows,
                                std::size_t cols, double target_scale) {
  std::normal_distribution<double> d(0.0, 1.0);
  SimplexLsProblem p;
  p.rows = rows;
  p.cols = cols;
  p.design.resize(rows * cols);
  p.target.resize(rows);
  for (auto& x : p.design) x = d(rng);
  // target_scale > 1 pushes the target outside the columns' convex hull.
  for (auto& x : p.target) x = target_scale * d(rng);
  return p;
}

// Exhaustive minimizer over the step-sized simplex grid, using the Gram form
// of the objective so the scan is cheap.
std::vector<double> grid_search_3(const SimplexLsProblem& p, int steps,
                                  double* best_obj) {
  std::array<std::array<double, 3>, 3> G{};
  std::array<double, 3> c{};
  double bb = 0.0;
  for (std::size_t r = 0; r < p.rows; ++r) {
    const double* row = &p.design[r * 3];
    for (int i = 0; i < 3; ++i) {
      c[i] += row[i] * p.target[r];
      for (int j = 0; j < 3; ++j) G[i][j] += row[i] * row[j];
    }
    bb += p.target[r] * p.target[r];
  }
  std::vector<double> best(3, 0.0);
  *best_obj = std::numeric_limits<double>::infinity();
  const double h = 1.0 / steps;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps - i; ++j) {
      const double w0 = i * h, w1 = j * h, w2 = 1.0 - w0 - w1;
      const double obj = G[0][0] * w0 * w0 + G[1][1] * w1 * w1 +
                         G[2][2] * w2 * w2 + 2 * G[0][1] * w0 * w1 +
                         2 * G[0][2] * w0 * w2 + 2 * G[1][2] * w1 * w2 -
                         2 * (c[0] * w0 + c[1] * w1 + c[2] * w2) + bb;
      if (obj < *best_obj) {
        *best_obj = obj;
        best = {w0, w1, w2};
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("simplex projection") {
  CHECK(project_onto_simplex({0.6, 0.6}) == std::vector<double>{0.5, 0.5});
  CHECK(project_onto_simplex({2.0, 0.0}) == std::vector<double>{1.0, 0.0});
  const auto w = project_onto_simplex({0.2, 0.1, 0.1});
  CHECK(w[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(w[2] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(project_onto_simplex({}), ValidationError);
}

TEST_CASE("projection properties on random vectors") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0.0, 2.0);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> v(1 + rep % 12);
    for (auto& x : v) x = d(rng);
    const auto w = project_onto_simplex(v);
    double s = 0.0;
    for (double x : w) {
      CHECK(x >= 0.0);
      s += x;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    // Projection of a feasible point is itself.
    const auto w2 = project_onto_simplex(w);
    for (std::size_t i = 0; i < w.size(); ++i)
      CHECK(w2[i] == doctest::Approx(w[i]).epsilon(1e-12));
  }
}

TEST_CASE("problem validation") {
  SimplexLsProblem p;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.rows = 2;
  p.cols = 2;
  p.design = {1, 0, 0, 1};
  p.target = {1, 0, 0};  // wrong length
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.target = {1, std::nan("")};
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("identity design with target equal to column 1") {
  SimplexLsProblem p;
  p.rows = 3;
  p.cols = 3;
  p.design = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  p.target = {1, 0, 0};
  const auto sol = solve_simplex_ls(p);
  CHECK(sol.weights[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.weights[1] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(sol.weights[2] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(sol.objective < 1e-14);
  CHECK(!sol.duplicate_columns);
}

TEST_CASE("exact interior mixture is recovered") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d(0.0, 1.0);
  SimplexLsProblem p;
  p.rows = 40;
  p.cols = 2;
  p.design.resize(80);
  p.target.resize(40);
  for (auto& x : p.design) x = d(rng);
  for (std::size_t r = 0; r < 40; ++r)
    p.target[r] = 0.3 * p.design[2 * r] + 0.7 * p.design[2 * r + 1];
  const auto sol = solve_simplex_ls(p);
  CHECK(sol.weights[0] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(sol.weights[1] == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(sol.objective < 1e-12);
}

TEST_CASE("random problems match the exhaustive grid oracle") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 5; ++rep) {
    const auto p = random_problem(rng, 50, 3, 3.0);
    const auto sol = solve_simplex_ls(p);

    double grid_obj = 0.0;
    const auto grid_w = grid_search_3(p, 1000, &grid_obj);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(sol.weights[i] - grid_w[i]) <= 1e-3);
    CHECK(sol.objective <= grid_obj + 1e-6);
    CHECK(kkt_residual(p, sol.weights) < 1e-6);
  }
}

TEST_CASE("solution is feasible and satisfies KKT") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = random_problem(rng, 30 + rep, 2 + rep % 6, 2.0);
    const auto sol = solve_simplex_ls(p);
    double s = 0.0;
    for (double w : sol.weights) {
      CHECK(w >= 0.0);
      s += w;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(kkt_residual(p, sol.weights) < 1e-6);
  }
}

TEST_CASE("duplicate columns are flagged") {
  SimplexLsProblem p;
  p.rows = 4;
  p.cols = 3;
  // Columns 0 and 2 identical.
  p.design = {1, 5, 1, 2, -3, 2, 0, 1, 0, 4, 2, 4};
  p.target = {1, 2, 0, 4};
  const auto sol = solve_simplex_ls(p);
  CHECK(sol.duplicate_columns);
  CHECK(kkt_residual(p, sol.weights) < 1e-6);
}

TEST_CASE("zero design yields uniform weights") {
  SimplexLsProblem p;
  p.rows = 3;
  p.cols = 4;
  p.design.assign(12, 0.0);
  p.target = {1, 1, 1};
  const auto sol = solve_simplex_ls(p);
  for (double w : sol.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("determinism: identical inputs give identical outputs") {
  std::mt19937_64 rng(5);
  const auto p = random_problem(rng, 25, 4, 2.5);
  const auto a = solve_simplex_ls(p);
  const auto b = solve_simplex_ls(p);
  CHECK(a.weights == b.weights);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("iteration cap raises a convergence error") {
  std::mt19937_64 rng(6);
  auto p = random_problem(rng, 60, 5, 4.0);
  p.max_iter = 2;
  p.tol = 0.0;
  try {
    solve_simplex_ls(p);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations == 2);
    CHECK(std::isfinite(e.last_objective));
    CHECK(std::isfinite(e.gradient_norm));
  }
}
