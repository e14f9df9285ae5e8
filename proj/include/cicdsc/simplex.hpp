#pragma once

#include <cstddef>
#include <vector>

// Deterministic least squares over the probability simplex via accelerated
// projected gradient, with exact Euclidean projection.

namespace cicdsc {

// Euclidean projection onto the unit simplex (sort-based thresholding).
std::vector<double> project_onto_simplex(std::vector<double> v);

struct SimplexLsProblem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> design;  // row-major, rows x cols
  std::vector<double> target;  // length rows
  double tol = 1e-12;          // relative objective-decrease stop
  int max_iter = 20000;

  void validate() const;
};

struct SimplexLsSolution {
  std::vector<double> weights;
  double objective = 0.0;  // ||A w - b||^2 at the solution
  int iterations = 0;
  bool duplicate_columns = false;  // two columns equal within 1e-12
};

SimplexLsSolution solve_simplex_ls(const SimplexLsProblem& p);

// Scaled KKT residual of w for problem p: 0 at an exact minimizer. For every
// active coordinate the partial gradient must equal the minimum partial
// gradient; inactive coordinates must not undercut it.
double kkt_residual(const SimplexLsProblem& p, const std::vector<double>& w);

}  // namespace cicdsc
