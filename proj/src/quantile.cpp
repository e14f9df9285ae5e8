#include "cicdsc/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cicdsc/errors.hpp"

namespace cicdsc {

Sample::Sample(std::vector<double> values) : sorted_(std::move(values)) {
  if (sorted_.empty()) throw ValidationError("empty cell");
  for (double v : sorted_) {
    if (!std::isfinite(v)) throw ValidationError("invalid data: non-finite outcome");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double empirical_quantile(const Sample& s, double tau, QuantileRule rule) {
  if (!(tau > 0.0 && tau < 1.0))
    throw ValidationError("quantile level must lie in (0,1)");
  const auto& x = s.sorted();
  const std::size_t n = x.size();
  if (n == 1) return x[0];
  if (rule == QuantileRule::InverseEcdf) {
    // Smallest order statistic whose ECDF value weakly exceeds tau.
    const std::size_t k =
        static_cast<std::size_t>(std::ceil(tau * static_cast<double>(n)));
    return x[std::min(k == 0 ? 0 : k - 1, n - 1)];
  }
  const double h = (static_cast<double>(n) - 1.0) * tau + 1.0;
  const double fl = std::floor(h);
  std::size_t j = static_cast<std::size_t>(fl) - 1;  // 0-based lower index
  if (j >= n - 1) return x[n - 1];
  return x[j] + (h - fl) * (x[j + 1] - x[j]);
}

double ecdf(const Sample& s, double y) {
  const auto& x = s.sorted();
  const auto it = std::upper_bound(x.begin(), x.end(), y);
  return static_cast<double>(it - x.begin()) / static_cast<double>(x.size());
}

QuantileGrid QuantileGrid::equispaced(int m, double lo, double hi) {
  if (m < 1) throw ValidationError("grid size must be positive");
  if (!(0.0 < lo && lo <= hi && hi < 1.0))
    throw ValidationError("grid bounds must satisfy 0 < lo <= hi < 1");
  QuantileGrid g;
  g.m = m;
  g.lo = lo;
  g.hi = hi;
  g.points.resize(m);
  if (m == 1) {
    g.points[0] = 0.5 * (lo + hi);
  } else {
    const double step = (hi - lo) / static_cast<double>(m - 1);
    for (int k = 0; k < m; ++k) g.points[k] = lo + step * k;
    g.points.back() = hi;
  }
  return g;
}

QuantileCurve::QuantileCurve(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.empty() || grid_.size() != values_.size())
    throw ValidationError("curve grid and values must be nonempty and equal-length");
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!(grid_[i] > 0.0 && grid_[i] < 1.0))
      throw ValidationError("curve grid points must lie in (0,1)");
    if (i > 0 && !(grid_[i] > grid_[i - 1]))
      throw ValidationError("curve grid must be strictly increasing");
    if (!std::isfinite(values_[i]))
      throw ValidationError("invalid data: non-finite curve value");
  }
  // Monotone rearrangement.
  std::sort(values_.begin(), values_.end());
}

double QuantileCurve::eval(double tau, bool* clamped) const {
  if (clamped) *clamped = false;
  if (tau <= grid_.front()) {
    if (clamped && tau < grid_.front()) *clamped = true;
    return values_.front();
  }
  if (tau >= grid_.back()) {
    if (clamped && tau > grid_.back()) *clamped = true;
    return values_.back();
  }
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), tau);
  const std::size_t i = static_cast<std::size_t>(it - grid_.begin());
  const double t0 = grid_[i - 1], t1 = grid_[i];
  const double w = (tau - t0) / (t1 - t0);
  return values_[i - 1] + w * (values_[i] - values_[i - 1]);
}

double QuantileCurve::invert(double y) const {
  if (y <= values_.front()) return grid_.front();
  if (y > values_.back()) return grid_.back();
  // First index with values_[i] >= y gives the leftmost crossing.
  const auto it = std::lower_bound(values_.begin(), values_.end(), y);
  const std::size_t i = static_cast<std::size_t>(it - values_.begin());
  if (i == 0) return grid_.front();
  const double v0 = values_[i - 1], v1 = values_[i];
  if (v1 == v0) return grid_[i];
  const double w = (y - v0) / (v1 - v0);
  return grid_[i - 1] + w * (grid_[i] - grid_[i - 1]);
}

QuantileCurve curve_from_sample(const Sample& s, const QuantileGrid& grid,
                                QuantileRule rule) {
  std::vector<double> values(grid.points.size());
  for (std::size_t k = 0; k < grid.points.size(); ++k)
    values[k] = empirical_quantile(s, grid.points[k], rule);
  return QuantileCurve(grid.points, std::move(values));
}

}  // namespace cicdsc
