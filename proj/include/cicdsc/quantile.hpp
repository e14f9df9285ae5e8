#pragma once

#include <cstddef>
#include <vector>

// Empirical quantile functions, ECDFs and monotone interpolated quantile
// curves. Everything here is immutable after construction and pure, so
// concurrent reads are safe.

namespace cicdsc {

// Which sample-quantile convention to use. LinearInterp places the tau-th
// quantile at position h = (n-1)*tau + 1 between order statistics and
// interpolates linearly; InverseEcdf is the left-continuous generalized
// inverse of the ECDF (a step function).
enum class QuantileRule { LinearInterp, InverseEcdf };

// A validated, sorted batch of real outcomes for one cell.
class Sample {
 public:
  explicit Sample(std::vector<double> values);

  const std::vector<double>& sorted() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }
  double min() const { return sorted_.front(); }
  double max() const { return sorted_.back(); }

 private:
  std::vector<double> sorted_;
};

// The tau-th sample quantile of s. Nondecreasing in tau.
double empirical_quantile(const Sample& s, double tau,
                          QuantileRule rule = QuantileRule::LinearInterp);

// Fraction of observations <= y. Right-continuous, in [0, 1].
double ecdf(const Sample& s, double y);

// An equispaced grid of quantile levels strictly inside (0, 1).
struct QuantileGrid {
  int m = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> points;

  static QuantileGrid equispaced(int m, double lo, double hi);
  // 99 points on [0.05, 0.95]; trims the boundary where sample quantiles
  // are unstable.
  static QuantileGrid defaults() { return equispaced(99, 0.05, 0.95); }
};

// A monotone piecewise-linear quantile function tabulated on a tau grid.
// Values are rearranged into nondecreasing order at construction; monotone
// rearrangement never worsens sup-norm error of an estimated quantile curve.
class QuantileCurve {
 public:
  QuantileCurve(std::vector<double> grid, std::vector<double> values);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double grid_lo() const { return grid_.front(); }
  double grid_hi() const { return grid_.back(); }
  double min_value() const { return values_.front(); }
  double max_value() const { return values_.back(); }

  // Piecewise-linear evaluation; tau outside [grid_lo, grid_hi] is clamped
  // and *clamped (if given) set to true.
  double eval(double tau, bool* clamped = nullptr) const;

  // Generalized inverse: the smallest tau in [grid_lo, grid_hi] with
  // eval(tau) >= y, interpolated on the inverted segment. Leftmost tau on
  // flat segments; y outside the value range maps to the nearest endpoint.
  double invert(double y) const;

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
};

QuantileCurve curve_from_sample(const Sample& s, const QuantileGrid& grid,
                                QuantileRule rule = QuantileRule::LinearInterp);

}  // namespace cicdsc
