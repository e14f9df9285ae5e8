#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cicdsc/errors.hpp"
#include "cicdsc/quantile.hpp"

using namespace cicdsc;

TEST_CASE("sample validation") {
  CHECK_THROWS_WITH_AS(Sample({}), doctest::Contains("empty cell"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(Sample({1.0, std::nan("")}),
                       doctest::Contains("invalid data"), ValidationError);
  CHECK_THROWS_AS(Sample({std::numeric_limits<double>::infinity()}),
                  ValidationError);
  const Sample s({3.0, 1.0, 2.0});
  CHECK(s.sorted() == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(s.min() == 1.0);
  CHECK(s.max() == 3.0);
}

TEST_CASE("interpolated sample quantile") {
  const Sample s({1, 2, 3, 4});
  CHECK(empirical_quantile(s, 0.5) == 2.5);  // h = 2.5
  CHECK(empirical_quantile(s, 1.0 / 3.0) == doctest::Approx(2.0));
  const Sample one({7.0});
  CHECK(empirical_quantile(one, 0.1) == 7.0);
  CHECK(empirical_quantile(one, 0.9) == 7.0);
  CHECK_THROWS_WITH_AS(empirical_quantile(s, 0.0),
                       doctest::Contains("quantile level"), ValidationError);
  CHECK_THROWS_AS(empirical_quantile(s, 1.0), ValidationError);
}

TEST_CASE("inverse-ECDF quantile rule") {
  const Sample s({1, 2, 3, 4});
  // Left-continuous generalized inverse: smallest x with F(x) >= tau.
  CHECK(empirical_quantile(s, 0.5, QuantileRule::InverseEcdf) == 2.0);
  CHECK(empirical_quantile(s, 0.51, QuantileRule::InverseEcdf) == 3.0);
  CHECK(empirical_quantile(s, 0.25, QuantileRule::InverseEcdf) == 1.0);
  CHECK(empirical_quantile(s, 0.9, QuantileRule::InverseEcdf) == 4.0);
}

TEST_CASE("seeded uniform sample quantile near population value") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> draws(10001);
  for (auto& d : draws) d = unif(rng);
  const Sample s(std::move(draws));
  CHECK(empirical_quantile(s, 0.25) == doctest::Approx(0.25).epsilon(0.08));
  CHECK(std::abs(empirical_quantile(s, 0.25) - 0.25) < 0.02);
}

TEST_CASE("ecdf") {
  const Sample s({1, 2, 3, 4});
  CHECK(ecdf(s, 2.5) == 0.5);
  CHECK(ecdf(s, 0.0) == 0.0);
  CHECK(ecdf(s, 4.0) == 1.0);
  CHECK(ecdf(s, 2.0) == 0.5);  // right-continuity: point mass included
  CHECK(ecdf(s, 100.0) == 1.0);
}

TEST_CASE("quantile grid construction") {
  const auto g = QuantileGrid::equispaced(3, 0.25, 0.75);
  CHECK(g.points == std::vector<double>{0.25, 0.5, 0.75});
  const auto d = QuantileGrid::defaults();
  CHECK(d.m == 99);
  CHECK(d.points.front() == 0.05);
  CHECK(d.points.back() == 0.95);
  CHECK(QuantileGrid::equispaced(1, 0.5, 0.5).points ==
        std::vector<double>{0.5});
  CHECK_THROWS_AS(QuantileGrid::equispaced(0, 0.1, 0.9), ValidationError);
  CHECK_THROWS_AS(QuantileGrid::equispaced(5, 0.0, 0.9), ValidationError);
  CHECK_THROWS_AS(QuantileGrid::equispaced(5, 0.9, 0.1), ValidationError);
}

TEST_CASE("curve_from_sample tabulates the quantile rule") {
  const Sample s({0.0, 1.0});
  const auto c = curve_from_sample(s, QuantileGrid::equispaced(3, 0.25, 0.75));
  CHECK(c.values() == std::vector<double>{0.25, 0.5, 0.75});

  const Sample constant({5, 5, 5});
  const auto cc =
      curve_from_sample(constant, QuantileGrid::equispaced(5, 0.1, 0.9));
  for (double v : cc.values()) CHECK(v == 5.0);
}

TEST_CASE("DKW-style sup-norm check on a large uniform sample") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> draws(10000);
  for (auto& d : draws) d = unif(rng);
  const auto c =
      curve_from_sample(Sample(std::move(draws)), QuantileGrid::defaults());
  double sup = 0.0;
  for (std::size_t k = 0; k < c.grid().size(); ++k)
    sup = std::max(sup, std::abs(c.values()[k] - c.grid()[k]));
  CHECK(sup < 0.02);
}

TEST_CASE("curve validation and monotone rearrangement") {
  CHECK_THROWS_AS(QuantileCurve({}, {}), ValidationError);
  CHECK_THROWS_AS(QuantileCurve({0.5}, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(QuantileCurve({0.5, 0.5}, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(QuantileCurve({0.0, 0.5}, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(QuantileCurve({0.2, 0.5}, {1.0, std::nan("")}),
                  ValidationError);
  // Noise-inverted values come back sorted.
  const QuantileCurve c({0.2, 0.5, 0.8}, {3.0, 1.0, 2.0});
  CHECK(c.values() == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("curve evaluation") {
  const QuantileCurve c({0.25, 0.75}, {1.0, 3.0});
  CHECK(c.eval(0.5) == 2.0);
  CHECK(c.eval(0.25) == 1.0);
  CHECK(c.eval(0.75) == 3.0);
  bool clamped = false;
  CHECK(c.eval(0.01, &clamped) == 1.0);
  CHECK(clamped);
  clamped = false;
  CHECK(c.eval(0.99, &clamped) == 3.0);
  CHECK(clamped);
  clamped = true;
  c.eval(0.5, &clamped);
  // eval resets the flag for in-range taus
  CHECK(!clamped);
}

TEST_CASE("curve inversion") {
  const QuantileCurve c({0.25, 0.75}, {1.0, 3.0});
  CHECK(c.invert(2.0) == 0.5);
  CHECK(c.invert(0.0) == 0.25);   // below range -> grid_lo
  CHECK(c.invert(10.0) == 0.75);  // above range -> grid_hi

  // Leftmost tau on a flat segment.
  const QuantileCurve flat({0.1, 0.4, 0.7, 0.9}, {1.0, 2.0, 2.0, 3.0});
  CHECK(flat.invert(2.0) == 0.4);
}

TEST_CASE("round trip on strictly increasing curves") {
  const QuantileCurve c({0.1, 0.3, 0.6, 0.9}, {-2.0, 0.5, 0.7, 4.0});
  for (double tau : {0.1, 0.2, 0.3, 0.45, 0.6, 0.77, 0.9})
    CHECK(c.invert(c.eval(tau)) == doctest::Approx(tau).epsilon(1e-12));
}

TEST_CASE("randomized property suite") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size_pick(1, 60);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  std::uniform_real_distribution<double> level(0.01, 0.99);

  for (int rep = 0; rep < 1000; ++rep) {
    const int n = size_pick(rng);
    std::vector<double> values(n);
    for (auto& v : values) v = val(rng);
    const Sample s(values);

    // Monotonicity in tau.
    double t1 = level(rng), t2 = level(rng);
    if (t1 > t2) std::swap(t1, t2);
    CHECK(empirical_quantile(s, t1) <= empirical_quantile(s, t2));

    // ECDF / quantile compatibility at sample points.
    if (n >= 2) {
      const double y = values[static_cast<std::size_t>(rep) % values.size()];
      const double p = ecdf(s, y);
      const double range = s.max() - s.min();
      CHECK(empirical_quantile(s, std::min(p, 1.0 - 1e-12)) >=
            y - range / (n - 1) - 1e-12);
    }

    // Quantiles stay inside the sample range.
    const double q = empirical_quantile(s, level(rng));
    CHECK(q >= s.min());
    CHECK(q <= s.max());
  }
}

TEST_CASE("brute-force formula enumeration for tiny samples") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::uniform_real_distribution<double> level(0.01, 0.99);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + rep % 8;
    std::vector<double> values(n);
    for (auto& v : values) v = val(rng);
    std::vector<double> x = values;
    std::sort(x.begin(), x.end());
    const Sample s(values);
    const double tau = level(rng);
    const double h = (n - 1) * tau + 1.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - std::floor(h);
    const double expected =
        frac == 0.0 || lo >= x.size()
            ? x[lo - 1]
            : x[lo - 1] + frac * (x[lo] - x[lo - 1]);
    CHECK(empirical_quantile(s, tau) == doctest::Approx(expected).epsilon(1e-14));
  }
}
