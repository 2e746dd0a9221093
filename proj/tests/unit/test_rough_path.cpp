#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "random_paths.hpp"
#include "roughkit/errors.hpp"
#include "roughkit/lift.hpp"
#include "roughkit/rough_path.hpp"

using namespace roughkit;
using roughkit::testing::max_abs;
using roughkit::testing::max_abs_diff;
using roughkit::testing::random_rough_path;

namespace {

RoughPath linear_lift(std::vector<double> v, const TimeGrid& grid, double alpha = 0.5) {
  return lift_smooth(
      [v](double t) {
        std::vector<double> y(v);
        for (auto& x : y) x *= t;
        return y;
      },
      grid, 4, alpha);
}

double scale_of(const Increment& inc) {
  return std::max(1.0, std::max(max_abs(inc.first) * max_abs(inc.first), max_abs(inc.second)));
}

}  // namespace

TEST(RoughPath, ConstructorValidatesShapes) {
  const auto g = make_grid(1.0, 2);
  EXPECT_THROW(RoughPath(g, 1, {0.0, 1.0}, {0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(RoughPath(g, 1, {0.0, 1.0, 2.0}, {0.0}), InvalidArgument);
  EXPECT_THROW(RoughPath(g, 1, {0.0, 1.0, 2.0}, {0.0, 0.0}, 0.3), InvalidArgument);
  EXPECT_THROW(RoughPath(g, 1, {0.0, 1.0, 2.0}, {0.0, 0.0}, 0.6), InvalidArgument);
  EXPECT_NO_THROW(RoughPath(g, 1, {0.0, 1.0, 2.0}, {0.0, 0.0}, 0.5));
}

TEST(RoughPath, ChenBaseCaseReturnsStoredIncrement) {
  const auto rp = random_rough_path(3, 2, 6);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto inc = chen_increment(rp, i, i + 1);
    EXPECT_EQ(inc.second, std::vector<double>(rp.area(i).begin(), rp.area(i).end()));
    EXPECT_EQ(inc.first[0], rp.value(i + 1)[0] - rp.value(i)[0]);
  }
}

TEST(RoughPath, ChenRejectsBadWindows) {
  const auto rp = random_rough_path(3, 2, 4);
  EXPECT_THROW(chen_increment(rp, 2, 2), InvalidArgument);
  EXPECT_THROW(chen_increment(rp, 3, 1), InvalidArgument);
  EXPECT_THROW(chen_increment(rp, 0, 5), InvalidArgument);
}

TEST(RoughPath, ChenCompositionIsConsistentOnRandomPaths) {
  for (Seed seed = 0; seed < 25; ++seed) {
    const auto rp = random_rough_path(seed, 1 + seed % 3, 9);
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = i + 2; j <= 9; ++j)
        for (std::size_t k = i + 1; k < j; ++k) {
          const auto whole = chen_increment(rp, i, j);
          const auto parts = chen_compose(chen_increment(rp, i, k), chen_increment(rp, k, j));
          const double tol = 1e-12 * scale_of(whole);
          EXPECT_LE(max_abs_diff(whole.first, parts.first), tol);
          EXPECT_LE(max_abs_diff(whole.second, parts.second), tol);
        }
  }
}

TEST(RoughPath, SymmetricPartIdentityHoldsForAllPairs) {
  const auto rp = random_rough_path(11, 3, 7);
  const auto br = bracket(rp);
  const std::size_t d = 3;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = i + 1; j <= 7; ++j) {
      const auto inc = chen_increment(rp, i, j);
      const auto db = br.increment(i, j);
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
          const double lhs = inc.first[a] * inc.first[b];
          const double rhs = inc.second[a * d + b] + inc.second[b * d + a] + db[a * d + b];
          EXPECT_NEAR(lhs, rhs, 1e-12 * scale_of(inc));
        }
    }
}

TEST(RoughPath, BracketIsSymmetricAndStartsAtZero) {
  const auto br = bracket(random_rough_path(5, 3, 10));
  EXPECT_EQ(max_abs(br.at(0)), 0.0);
  for (std::size_t i = 0; i <= 10; ++i) {
    const auto m = br.at(i);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) EXPECT_EQ(m[a * 3 + b], m[b * 3 + a]);
  }
}

TEST(RoughPath, GeometrizeNullsBracketAndIsIdempotent) {
  for (Seed seed = 100; seed < 110; ++seed) {
    const auto rp = random_rough_path(seed, 2, 8);
    const auto g = geometrize(rp);
    EXPECT_EQ(std::vector<double>(g.first_level().begin(), g.first_level().end()),
              std::vector<double>(rp.first_level().begin(), rp.first_level().end()));
    const double scale = std::max(1.0, max_abs(rp.second_level()));
    EXPECT_LE(max_abs(bracket(g).at(8)), 1e-12 * scale);
    const auto gg = geometrize(g);
    EXPECT_LE(max_abs_diff(gg.second_level(), g.second_level()), 1e-12 * scale);
  }
}

TEST(RoughPath, DecompositionRoundTrip) {
  const auto rp = random_rough_path(17, 2, 5);
  const auto g = geometrize(rp);
  const auto br = bracket(rp);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto db = br.increment(i, i + 1);
    const auto stored = rp.area(i);
    const auto geo = g.area(i);
    for (std::size_t k = 0; k < 4; ++k)
      EXPECT_NEAR(geo[k] - 0.5 * db[k], stored[k], 1e-12 * std::max(1.0, std::abs(stored[k])));
  }
}

TEST(RoughPath, LinearLiftIsExact) {
  const auto grid = make_grid(1.0, 8);
  const std::vector<double> v{1.5, -0.5};
  const auto rp = linear_lift(v, grid);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = i + 1; j <= 8; ++j) {
      const double h = grid[j] - grid[i];
      const auto inc = chen_increment(rp, i, j);
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
          EXPECT_NEAR(inc.second[a * 2 + b], 0.5 * h * h * v[a] * v[b], 1e-15);
    }
  EXPECT_LE(max_abs(bracket(rp).at(8)), 1e-15);
  EXPECT_LE(max_abs_diff(geometrize(rp).second_level(), rp.second_level()), 1e-16);
}

TEST(RoughPath, CircleAreaMatchesQuadratureOracle) {
  const double two_pi = 2.0 * std::numbers::pi;
  const auto grid = make_grid(two_pi, 256);
  const auto rp = lift_smooth([](double t) { return std::vector<double>{std::cos(t), std::sin(t)}; },
                              grid, 64);
  const auto inc = chen_increment(rp, 0, 256);
  const double antisym = 0.5 * (inc.second[1] - inc.second[2]);

  // Oracle: composite Simpson on 0.5 * int (x - x_0) y' - (y - y_0) x' dt
  // with analytic derivatives.
  const int n = 200000;
  const double h = two_pi / n;
  auto g = [](double t) { return 0.5 * ((std::cos(t) - 1.0) * std::cos(t) + std::sin(t) * std::sin(t)); };
  double oracle = g(0.0) + g(two_pi);
  for (int k = 1; k < n; ++k) oracle += (k % 2 ? 4.0 : 2.0) * g(k * h);
  oracle *= h / 3.0;

  EXPECT_NEAR(oracle, std::numbers::pi, 1e-10);
  EXPECT_NEAR(antisym, oracle, 1e-6);
}

TEST(RoughPath, HolderStatsOfLinearPath) {
  const auto rp = linear_lift({3.0, 4.0}, make_grid(1.0, 16));
  const auto s = holder_stats(rp, 0.5);
  EXPECT_NEAR(s.first_level_holder, 5.0, 1e-14);
  EXPECT_NEAR(s.second_level_holder, 12.5, 1e-13);
  EXPECT_NEAR(s.homogeneous_norm, 5.0, 1e-14);
  EXPECT_LE(s.bracket_lip, 1e-13);
}

TEST(RoughPath, HolderStatsOfZeroPath) {
  const auto g = make_grid(1.0, 3);
  const RoughPath rp(g, 2, std::vector<double>(8, 0.0), std::vector<double>(12, 0.0));
  const auto s = holder_stats(rp, 0.4);
  EXPECT_EQ(s.first_level_holder, 0.0);
  EXPECT_EQ(s.second_level_holder, 0.0);
  EXPECT_EQ(s.homogeneous_norm, 0.0);
  EXPECT_EQ(s.bracket_lip, 0.0);
  EXPECT_THROW(holder_stats(rp, 0.3), InvalidArgument);
  EXPECT_THROW(holder_stats(rp, 0.51), InvalidArgument);
}

TEST(RoughPath, HolderStatsSingleInterval) {
  const TimeGrid g({0.0, 4.0});
  const RoughPath rp(g, 1, {0.0, 2.0}, {1.0}, 0.5);
  const auto s = holder_stats(rp, 0.5);
  EXPECT_DOUBLE_EQ(s.first_level_holder, 1.0);
  EXPECT_DOUBLE_EQ(s.second_level_holder, 0.25);
  EXPECT_DOUBLE_EQ(s.bracket_lip, 0.5);  // 4 - 2 = 2 over length 4
}

TEST(RoughPath, DistanceAxioms) {
  for (Seed seed = 0; seed < 10; ++seed) {
    const auto a = random_rough_path(seed, 2, 6);
    const auto b = random_rough_path(seed + 1000, 2, 6);
    const RoughPath b_on_a(a.grid(), 2, {b.first_level().begin(), b.first_level().end()},
                           {b.second_level().begin(), b.second_level().end()});
    for (auto metric : {RoughMetric::rho_alpha, RoughMetric::rho_alpha_1}) {
      EXPECT_EQ(rough_distance(a, a, 0.4, metric), 0.0);
      const double ab = rough_distance(a, b_on_a, 0.4, metric);
      const double ba = rough_distance(b_on_a, a, 0.4, metric);
      EXPECT_GT(ab, 0.0);
      EXPECT_NEAR(ab, ba, 1e-12 * ab);
    }
  }
}

TEST(RoughPath, DistancesAgreeOnGeometricPaths) {
  const auto a = geometrize(random_rough_path(1, 2, 6));
  const auto b0 = random_rough_path(2, 2, 6);
  const auto b = geometrize(RoughPath(a.grid(), 2, {b0.first_level().begin(), b0.first_level().end()},
                                      {b0.second_level().begin(), b0.second_level().end()}));
  const double r = rough_distance(a, b, 0.4, RoughMetric::rho_alpha);
  EXPECT_NEAR(rough_distance(a, b, 0.4, RoughMetric::rho_alpha_1), r, 1e-12 * r);
}

TEST(RoughPath, DistanceRejectsMismatchedOperands) {
  const auto a = random_rough_path(1, 2, 6);
  EXPECT_THROW(rough_distance(a, random_rough_path(1, 3, 6), 0.4, RoughMetric::rho_alpha),
               IncompatibleOperands);
  EXPECT_THROW(rough_distance(a, random_rough_path(2, 2, 6), 0.4, RoughMetric::rho_alpha),
               IncompatibleOperands);
}

TEST(RoughPath, CsvRoundTripIsLossless) {
  const auto rp = random_rough_path(21, 3, 12);
  std::stringstream buffer;
  write_rough_path(buffer, rp);
  const auto back = read_rough_path(buffer);
  EXPECT_EQ(back.grid(), rp.grid());
  EXPECT_EQ(back.dim(), rp.dim());
  EXPECT_EQ(back.alpha(), rp.alpha());
  EXPECT_TRUE(std::equal(rp.first_level().begin(), rp.first_level().end(),
                         back.first_level().begin()));
  EXPECT_TRUE(std::equal(rp.second_level().begin(), rp.second_level().end(),
                         back.second_level().begin()));
}

TEST(RoughPath, CsvRejectsMalformedInput) {
  std::stringstream bad("roughpath,1,0x1.999999999999ap-2,1\nnode,0x0p+0,0x0p+0\n");
  EXPECT_THROW(read_rough_path(bad), InvalidArgument);
  std::stringstream junk("hello\n");
  EXPECT_THROW(read_rough_path(junk), InvalidArgument);
}
