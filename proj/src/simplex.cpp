#include "cicdsc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cicdsc/errors.hpp"
#include "cicdsc/kernels.hpp"

namespace cicdsc {

namespace {

// y = A x  (A row-major, rows x cols)
void matvec(const SimplexLsProblem& p, const double* x, double* y) {
  for (std::size_t r = 0; r < p.rows; ++r)
    y[r] = kernels::dot(p.design.data() + r * p.cols, x, p.cols);
}

// g = A^T r
void matvec_t(const SimplexLsProblem& p, const double* r, double* g) {
  std::fill(g, g + p.cols, 0.0);
  for (std::size_t row = 0; row < p.rows; ++row)
    kernels::axpy(r[row], p.design.data() + row * p.cols, g, p.cols);
}

// Objective ||A w - b||^2 and residual r = A w - b.
double objective_and_residual(const SimplexLsProblem& p, const double* w,
                              std::vector<double>& r) {
  matvec(p, w, r.data());
  for (std::size_t i = 0; i < p.rows; ++i) r[i] -= p.target[i];
  return kernels::dot(r.data(), r.data(), p.rows);
}

// Largest eigenvalue of A^T A by power iteration started from the all-ones
// vector (deterministic).
double largest_gram_eigenvalue(const SimplexLsProblem& p) {
  std::vector<double> x(p.cols, 1.0), ax(p.rows), y(p.cols);
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    matvec(p, x.data(), ax.data());
    matvec_t(p, ax.data(), y.data());
    const double norm = std::sqrt(kernels::dot(y.data(), y.data(), p.cols));
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < p.cols; ++i) y[i] /= norm;
    matvec(p, y.data(), ax.data());
    const double next = kernels::dot(ax.data(), ax.data(), p.rows);
    x.swap(y);
    if (it > 0 && std::abs(next - lambda) <= 1e-10 * std::max(1.0, next)) {
      return next;
    }
    lambda = next;
  }
  return lambda;
}

// Plain projected-gradient refinement from w. Near the optimum these steps
// contract onto the fixed point, which satisfies the KKT conditions.
void polish(const SimplexLsProblem& p, double step, std::vector<double>& w,
            double& f, std::vector<double>& r, std::vector<double>& grad,
            std::vector<double>& trial) {
  for (int k = 0; k < 200; ++k) {
    objective_and_residual(p, w.data(), r);
    matvec_t(p, r.data(), grad.data());
    double change = 0.0;
    for (std::size_t i = 0; i < p.cols; ++i)
      trial[i] = w[i] - step * 2.0 * grad[i];
    trial = project_onto_simplex(std::move(trial));
    for (std::size_t i = 0; i < p.cols; ++i)
      change = std::max(change, std::abs(trial[i] - w[i]));
    const double f_trial = objective_and_residual(p, trial.data(), r);
    if (f_trial > f) break;
    w = trial;
    f = f_trial;
    if (change <= 1e-15) break;
  }
}

bool has_duplicate_columns(const SimplexLsProblem& p) {
  for (std::size_t c1 = 0; c1 + 1 < p.cols; ++c1) {
    for (std::size_t c2 = c1 + 1; c2 < p.cols; ++c2) {
      bool equal = true;
      for (std::size_t r = 0; r < p.rows && equal; ++r)
        equal = std::abs(p.design[r * p.cols + c1] -
                         p.design[r * p.cols + c2]) <= 1e-12;
      if (equal) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<double> project_onto_simplex(std::vector<double> v) {
  if (v.empty()) throw ValidationError("cannot project an empty vector");
  std::vector<double> u(v);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  std::size_t rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  for (double& x : v) x = std::max(x - theta, 0.0);
  // Renormalize away the last-ulp drift so the unit-sum invariant is exact
  // to working precision.
  double s = kernels::sum(v.data(), v.size());
  if (s > 0.0)
    for (double& x : v) x /= s;
  return v;
}

void SimplexLsProblem::validate() const {
  if (rows == 0 || cols == 0) throw ValidationError("empty simplex LS problem");
  if (design.size() != rows * cols || target.size() != rows)
    throw ValidationError("simplex LS problem dimensions do not match");
  for (double v : design)
    if (!std::isfinite(v)) throw ValidationError("non-finite design entry");
  for (double v : target)
    if (!std::isfinite(v)) throw ValidationError("non-finite target entry");
}

SimplexLsSolution solve_simplex_ls(const SimplexLsProblem& p) {
  p.validate();

  SimplexLsSolution sol;
  sol.duplicate_columns = has_duplicate_columns(p);

  const double sigma_max = largest_gram_eigenvalue(p);
  if (sigma_max <= std::numeric_limits<double>::epsilon()) {
    // Zero design: every feasible point has the same objective.
    sol.weights.assign(p.cols, 1.0 / static_cast<double>(p.cols));
    std::vector<double> r(p.rows);
    sol.objective = objective_and_residual(p, sol.weights.data(), r);
    return sol;
  }
  const double step = 1.0 / (2.0 * sigma_max);  // gradient of ||Aw-b||^2 is 2 A^T r

  std::vector<double> w = project_onto_simplex(
      std::vector<double>(p.cols, 1.0 / static_cast<double>(p.cols)));
  std::vector<double> y = w, w_prev = w, grad(p.cols), trial(p.cols), r(p.rows);

  double f = objective_and_residual(p, w.data(), r);
  double t_momentum = 1.0;
  int it = 0;
  for (; it < p.max_iter; ++it) {
    // Gradient at the extrapolated point y.
    double fy = objective_and_residual(p, y.data(), r);
    (void)fy;
    matvec_t(p, r.data(), grad.data());
    for (std::size_t i = 0; i < p.cols; ++i)
      trial[i] = y[i] - step * 2.0 * grad[i];
    trial = project_onto_simplex(std::move(trial));

    double f_trial = objective_and_residual(p, trial.data(), r);
    if (f_trial > f) {
      // Momentum overshot: restart from the best point.
      t_momentum = 1.0;
      y = w;
      double fw = objective_and_residual(p, w.data(), r);
      matvec_t(p, r.data(), grad.data());
      for (std::size_t i = 0; i < p.cols; ++i)
        trial[i] = w[i] - step * 2.0 * grad[i];
      trial = project_onto_simplex(std::move(trial));
      f_trial = objective_and_residual(p, trial.data(), r);
      if (f_trial > fw) {
        // A plain projected-gradient step with step 1/L cannot increase the
        // objective; hitting this means we are at the constrained optimum up
        // to rounding.
        f = fw;
        polish(p, step, w, f, r, grad, trial);
        sol.weights = w;
        sol.objective = f;
        sol.iterations = it;
        return sol;
      }
    }

    w_prev.swap(w);
    w = trial;
    const double t_next =
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
    const double beta = (t_momentum - 1.0) / t_next;
    for (std::size_t i = 0; i < p.cols; ++i)
      y[i] = w[i] + beta * (w[i] - w_prev[i]);
    t_momentum = t_next;

    const double decrease = f - f_trial;
    f = f_trial;
    if (it >= 10 && decrease >= 0.0 && decrease <= p.tol * std::max(1.0, f)) {
      polish(p, step, w, f, r, grad, trial);
      sol.weights = w;
      sol.objective = f;
      sol.iterations = it + 1;
      return sol;
    }
  }

  std::vector<double> rr(p.rows);
  const double f_final = objective_and_residual(p, w.data(), rr);
  matvec_t(p, rr.data(), grad.data());
  double gnorm = 2.0 * std::sqrt(kernels::dot(grad.data(), grad.data(), p.cols));
  throw ConvergenceError(
      "simplex LS solver hit max_iter=" + std::to_string(p.max_iter) +
          " (objective " + std::to_string(f_final) + ", gradient norm " +
          std::to_string(gnorm) + ")",
      f_final, gnorm, it);
}

double kkt_residual(const SimplexLsProblem& p, const std::vector<double>& w) {
  p.validate();
  if (w.size() != p.cols)
    throw ValidationError("weight vector length does not match problem");
  std::vector<double> r(p.rows), grad(p.cols);
  objective_and_residual(p, w.data(), r);
  matvec_t(p, r.data(), grad.data());
  for (double& g : grad) g *= 2.0;
  double gmin = grad[0];
  double gmax_abs = 0.0;
  for (double g : grad) {
    gmin = std::min(gmin, g);
    gmax_abs = std::max(gmax_abs, std::abs(g));
  }
  const double scale = std::max(1.0, gmax_abs);
  double viol = 0.0;
  for (std::size_t i = 0; i < p.cols; ++i) {
    if (w[i] > 1e-10) {
      viol = std::max(viol, std::abs(grad[i] - gmin) / scale);
    } else {
      viol = std::max(viol, std::max(0.0, gmin - grad[i]) / scale);
    }
  }
  return viol;
}

}  // namespace cicdsc
