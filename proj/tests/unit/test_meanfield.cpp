#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "roughkit/errors.hpp"
#include "roughkit/meanfield.hpp"
#include "roughkit/rsde.hpp"

using namespace roughkit;

namespace {

using Span = std::span<const double>;
using Out = std::span<double>;

MkvSpec scalar_mkv(MkvCoefficient b, MkvCoefficient sigma, MkvCoefficient f,
                   std::vector<std::string> features = {}) {
  MkvSpec s;
  for (const auto& text : features) s.features.push_back(parse_feature(text));
  s.drift = std::move(b);
  s.brownian = std::move(sigma);
  s.rough = std::move(f);
  s.initial = [](Rng& r, Out o) { o[0] = 0.5 + 0.5 * r.normal(); };
  return s;
}

MkvCoefficient constant(double c) {
  return [c](Span, Span, Out o) { std::fill(o.begin(), o.end(), c); };
}

MkvSpec interacting() {
  return scalar_mkv([](Span x, Span f, Out o) { o[0] = f[0] - x[0] + 0.2 * f[1] * x[0] - 0.3 * f[2]; }, constant(0.4),
                    [](Span x, Span f, Out o) { o[0] = 0.3 + 0.5 * f[0] + 0.1 * std::sin(x[0]) * f[2]; },
                    {"mean:0", "variance:0", "gaussian_kernel:0.7"});
}

RoughPath strat_path(Seed seed, std::size_t n = 16, std::size_t ff = 8) {
  return sample_bm_lift(1, make_grid(1.0, static_cast<std::int64_t>(n)), ff, seed, LiftConvention::stratonovich);
}

}  // namespace

TEST(MeanField, FeatureRegistry) {
  EXPECT_EQ(parse_feature("mean:0").kind, FeatureKind::mean);
  EXPECT_EQ(parse_feature("variance:2").component, 2u);
  EXPECT_EQ(parse_feature("gaussian_kernel:0.25").bandwidth, 0.25);
  EXPECT_EQ(to_string(parse_feature("mean:1")), "mean:1");
  EXPECT_THROW(parse_feature("median:0"), PresetViolation);
  EXPECT_THROW(parse_feature("mean:x"), PresetViolation);
  EXPECT_THROW(parse_feature("mean"), PresetViolation);
  auto s = interacting();
  s.features.push_back(parse_feature("mean:3"));
  EXPECT_THROW(validate(s), PresetViolation);
  s.features.back() = parse_feature("gaussian_kernel:-1");
  EXPECT_THROW(validate(s), PresetViolation);
}

TEST(MeanField, FeatureValues) {
  const auto s = interacting();
  const std::vector<double> pts{0.0, 1.0, 2.0, 5.0};
  const auto f = measure_features(s, pts, 4);
  EXPECT_EQ(f[0], 2.0);
  EXPECT_EQ(f[1], 3.5);
  double k0 = 0.0;
  for (double p : pts) k0 += std::exp(-p * p / (2 * 0.49));
  EXPECT_NEAR(f[2], k0 / 4, 1e-15);
}

TEST(MeanField, FeaturesArePermutationInvariant) {
  const auto s = interacting();
  std::vector<double> pts(37);
  Rng rng(4);
  for (auto& p : pts) p = rng.normal() * 1e3 + 0.1;
  auto perm = pts;
  std::reverse(perm.begin(), perm.end());
  const auto a = measure_features(s, pts, 37), b = measure_features(s, perm, 37);
  for (std::size_t i = 0; i < 37; ++i)
    for (std::size_t q = 0; q < 3; ++q) EXPECT_EQ(a[i * 3 + q], b[(36 - i) * 3 + q]);
}

TEST(MeanField, FixedPointOfInteraction) {
  auto s = scalar_mkv([](Span x, Span f, Out o) { o[0] = f[0] - x[0]; }, constant(0.0), constant(0.0), {"mean:0"});
  s.initial = [](Rng&, Out o) { o[0] = 0.5; };
  const auto ens = simulate_common_noise_particles(s, 100, make_grid(1.0, 8), 4, 1);
  for (double x : ens.states) EXPECT_EQ(x, 0.5);
}

TEST(MeanField, IndependentDecay) {
  const auto s = scalar_mkv([](Span x, Span, Out o) { o[0] = -x[0]; }, constant(0.0), constant(0.0));
  const auto grid = make_grid(1.0, 16);
  const auto ens = simulate_common_noise_particles(s, 20, grid, 64, 2);
  for (std::size_t i = 0; i < grid.nodes(); ++i)
    for (std::size_t p = 0; p < 20; ++p)
      EXPECT_NEAR(ens.particle(i, p)[0], ens.particle(0, p)[0] * std::exp(-grid[i]), 1e-3 * std::abs(ens.particle(0, p)[0]));
}

TEST(MeanField, LinearMeanFollowsCommonNoise) {
  const double sigma = 0.6, f = 0.8;
  const auto s = scalar_mkv([](Span x, Span m, Out o) { o[0] = 2.0 * (m[0] - x[0]); }, constant(sigma), constant(f),
                            {"mean:0"});
  const std::size_t N = 400;
  const auto grid = make_grid(1.0, 16);
  const auto common = sample_brownian(grid.refine(16), 1, 77);
  const auto ens = simulate_common_noise_particles(s, particle_seeds(5, N), grid, common);
  const auto mean_at = [&](std::size_t node) {
    double m = 0.0;
    for (double x : ens.at(node)) m += x;
    return m / N;
  };
  const double wT = brownian_path(common).back();
  EXPECT_LE(std::abs(mean_at(16) - mean_at(0) - f * wT), 3 * sigma / std::sqrt(double(N)));
}

TEST(MeanField, ConstantRoughCoefficientShiftsEveryParticle) {
  const auto s = scalar_mkv(constant(0.0), constant(0.0), constant(1.5), {"mean:0"});
  const auto rp = strat_path(3);
  const auto ens = solve_mkv_rsde_particles(s, rp, 30, 4, 9);
  for (std::size_t i = 0; i < rp.grid().nodes(); ++i)
    for (std::size_t p = 0; p < 30; ++p)
      EXPECT_NEAR(ens.particle(i, p)[0], ens.particle(0, p)[0] + 1.5 * rp.value(i)[0], 1e-13);
}

TEST(MeanField, DecoupledParticlesMatchSingleSolves) {
  const auto s = scalar_mkv([](Span x, Span, Out o) { o[0] = -0.5 * x[0]; },
                            [](Span x, Span, Out o) { o[0] = 0.3 * std::cos(x[0]); },
                            [](Span x, Span, Out o) { o[0] = x[0] + 0.2 * std::sin(x[0]); });
  RsdeSpec single;
  single.drift = [](double, Span x, const DriverView&, Out o) { o[0] = -0.5 * x[0]; };
  single.brownian = [](double, Span x, const DriverView&, Out o) { o[0] = 0.3 * std::cos(x[0]); };
  single.rough = [](double, Span x, const DriverView&, Out o) { o[0] = x[0] + 0.2 * std::sin(x[0]); };
  const auto rp = strat_path(4, 32, 8);
  const std::size_t ff = 4;
  const auto seeds = particle_seeds(11, 12);
  const auto ens = solve_mkv_rsde_particles(s, rp, seeds, ff);
  for (std::size_t p = 0; p < seeds.size(); ++p) {
    Rng rng(seeds[p]);
    double x0[1];
    s.initial(rng, x0);
    const auto bm = sample_brownian(rp.grid().refine(ff), 1, derive_seed(seeds[p], "brownian"));
    const auto sol = solve_rsde(single, rp, bm, x0);
    for (std::size_t i = 0; i < rp.grid().nodes(); ++i) EXPECT_EQ(ens.particle(i, p)[0], sol.state(i)[0]);
  }
}

TEST(MeanField, EmpiricalMeanClosesOnScalarEquation) {
  const auto s = scalar_mkv(constant(0.0), constant(0.0), [](Span, Span m, Out o) { o[0] = m[0]; }, {"mean:0"});
  const auto rp = strat_path(6, 64, 8);
  const std::size_t N = 50;
  const auto ens = solve_mkv_rsde_particles(s, rp, N, 1, 12);
  auto mean_at = [&](std::size_t node) {
    double m = 0.0;
    for (double x : ens.at(node)) m += x;
    return m / N;
  };
  RsdeSpec scalar;
  scalar.drift = [](double, Span, const DriverView&, Out o) { o[0] = 0.0; };
  scalar.brownian = [](double, Span, const DriverView&, Out o) { o[0] = 0.0; };
  scalar.rough = [](double, Span x, const DriverView&, Out o) { o[0] = x[0]; };
  const double m0[] = {mean_at(0)};
  const auto sol = solve_rsde(scalar, rp, sample_brownian(rp.grid(), 1, 1), m0);
  for (std::size_t i = 0; i < rp.grid().nodes(); ++i)
    EXPECT_NEAR(mean_at(i), sol.state(i)[0], 1e-8 * (1 + std::abs(sol.state(i)[0])));
}

TEST(MeanField, ExchangeableUnderSeedPermutation) {
  const auto s = interacting();
  auto seeds = particle_seeds(21, 15);
  auto perm = seeds;
  std::rotate(perm.begin(), perm.begin() + 4, perm.end());
  const auto rp = strat_path(8, 8, 4);
  const auto common = sample_brownian(make_grid(1.0, 8).refine(4), 1, 3);
  const auto a = solve_mkv_rsde_particles(s, rp, seeds, 4), b = solve_mkv_rsde_particles(s, rp, perm, 4);
  const auto c = simulate_common_noise_particles(s, seeds, make_grid(1.0, 8), common);
  const auto d = simulate_common_noise_particles(s, perm, make_grid(1.0, 8), common);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t p = 0; p < 15; ++p) {
      const std::size_t q = (p + 15 - 4) % 15;
      EXPECT_EQ(a.particle(i, p)[0], b.particle(i, q)[0]);
      EXPECT_EQ(c.particle(i, p)[0], d.particle(i, q)[0]);
    }
}

TEST(MeanField, FrozenDynamicsConserveTheMeasure) {
  const auto s = scalar_mkv(constant(0.0), constant(0.0), constant(0.0), {"mean:0", "variance:0"});
  const auto rp = strat_path(2, 8, 2);
  for (const auto& ens : {solve_mkv_rsde_particles(s, rp, 25, 2, 4),
                          simulate_common_noise_particles(s, 25, rp.grid(), 2, 4)})
    for (std::size_t i = 1; i < 9; ++i)
      for (std::size_t p = 0; p < 25; ++p) EXPECT_EQ(ens.particle(i, p)[0], ens.particle(0, p)[0]);
}

TEST(MeanField, ConditionalLawsOfDecoupledGaussianModel) {
  const auto s = scalar_mkv([](Span x, Span, Out o) { o[0] = -x[0]; }, constant(0.5), constant(0.7));
  MkvCheckConfig cfg;
  cfg.particle_ladder = {50, 200, 800};
  cfg.mesh_ladder = {8, 16};
  cfg.outer = 10;
  cfg.fine_factor = 8;
  const auto check = conditional_mkv_check(s, cfg, 13);
  const auto w = check.table.values("median_w1_particles");
  EXPECT_GT(w[0], w[1]);
  EXPECT_GT(w[1], w[2]);
  ASSERT_EQ(check.table.rates.size(), 2u);
  EXPECT_NEAR(check.table.rates[0].fit.rate, 0.5, 0.2);
}

TEST(MeanField, DeterministicConditionalLawIsAPointMass) {
  auto s = scalar_mkv([](Span x, Span, Out o) { o[0] = -x[0]; }, constant(0.0), constant(0.5));
  s.initial = [](Rng&, Out o) { o[0] = 1.0; };
  MkvCheckConfig cfg;
  cfg.particle_ladder = {10, 20};
  cfg.mesh_ladder = {16, 32};
  cfg.outer = 3;
  const auto check = conditional_mkv_check(s, cfg, 2);
  for (const auto& row : check.w1_particles)
    for (double w : row) EXPECT_LE(w, 0.05);
  for (double w : check.w1_mesh[1]) EXPECT_LE(w, 0.05);
}

TEST(MeanField, ErrorsAndCsv) {
  const auto s = interacting();
  EXPECT_THROW(solve_mkv_rsde_particles(s, strat_path(1), 1, 2, 1), InvalidArgument);
  auto bad = s;
  bad.rough = nullptr;
  EXPECT_THROW(simulate_common_noise_particles(bad, 5, make_grid(1.0, 2), 2, 1), InvalidArgument);
  auto runaway = scalar_mkv([](Span x, Span, Out o) { o[0] = x[0] * x[0] * 1e3; }, constant(0.0), constant(0.0));
  runaway.initial = [](Rng&, Out o) { o[0] = 10.0; };
  EXPECT_THROW(simulate_common_noise_particles(runaway, 4, make_grid(1.0, 4), 4, 1), DivergenceError);
  std::ostringstream csv;
  write_ensemble_csv(csv, simulate_common_noise_particles(s, 3, make_grid(1.0, 2), 2, 1));
  std::istringstream lines(csv.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, 1u + 3 * 3);
  EXPECT_EQ(csv.str().substr(0, 18), "time,particle,x0\n0");
}
