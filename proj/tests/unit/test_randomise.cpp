#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "models.hpp"
#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"
#include "roughkit/randomise.hpp"

using namespace roughkit;
using roughkit::testing::linear_rough_spec;
using roughkit::testing::scalar_spec;

namespace {

RandomisationExperiment nonlinear_experiment() {
  RandomisationExperiment e;
  e.rsde = scalar_spec([](double x) { return -x; }, [](double) { return 0.3; },
                       [](double x) { return 0.5 * std::sin(x); });
  e.x0 = {1.0};
  e.intervals = 32;
  e.fine_factor = 4;
  return e;
}

RandomisationExperiment additive_experiment(double sigma, double f) {
  RandomisationExperiment e;
  e.rsde = scalar_spec([](double) { return 0.0; }, [sigma](double) { return sigma; },
                       [f](double) { return f; });
  e.x0 = {0.25};
  e.intervals = 16;
  e.fine_factor = 8;
  return e;
}

ItoDiffusionSpec ou_driver() {
  ItoDiffusionSpec s;
  s.drift = [](double, std::span<const double> x, std::span<double> out) { out[0] = 1.0 - 2.0 * x[0]; };
  s.diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.5; };
  s.initial = {0.3};
  return s;
}

bool same_states(const SolutionPath& a, const SolutionPath& b) { return a.states == b.states; }

}  // namespace

TEST(Randomise, RejectsNonCausalModels) {
  auto e = nonlinear_experiment();
  e.rsde.causal = false;
  EXPECT_THROW(randomised_solution(e, 1, 2), InvalidArgument);
  auto f = nonlinear_experiment();
  f.x0 = {1.0, 2.0};
  EXPECT_THROW(doubly_stochastic_solution(f, 1, 2), InvalidArgument);
}

TEST(Randomise, SeedsDetermineBothRoutes) {
  const auto e = nonlinear_experiment();
  EXPECT_TRUE(same_states(randomised_solution(e, 5, 6), randomised_solution(e, 5, 6)));
  EXPECT_TRUE(same_states(doubly_stochastic_solution(e, 5, 6), doubly_stochastic_solution(e, 5, 6)));
  EXPECT_FALSE(same_states(randomised_solution(e, 5, 6), randomised_solution(e, 5, 7)));
}

TEST(Randomise, CouplingContractSharesFineIncrements) {
  const auto e = nonlinear_experiment();
  const auto driver = sample_driver(e, 11);
  EXPECT_EQ(driver.noise.increments, sample_brownian(e.fine_grid(), 1, 11).increments);
  EXPECT_EQ(sample_inner_noise(e, 12).increments, sample_brownian(e.fine_grid(), 1, 12).increments);
  auto with_diffusion = e;
  with_diffusion.driver = ou_driver();
  EXPECT_EQ(sample_driver(with_diffusion, 11).noise.increments, driver.noise.increments);
}

TEST(Randomise, WithoutRoughTermTheDriverIsIrrelevant) {
  auto e = nonlinear_experiment();
  e.rsde.rough = [](double, std::span<const double>, const DriverView&, std::span<double> out) { out[0] = 0.0; };
  const auto a = randomised_solution(e, 1, 9);
  EXPECT_TRUE(same_states(a, randomised_solution(e, 2, 9)));
  EXPECT_TRUE(same_states(a, randomised_solution(e, 3, 9)));
  // Matched stepping: the two routes coincide bit for bit.
  EXPECT_TRUE(same_states(a, doubly_stochastic_solution(e, 1, 9)));
}

TEST(Randomise, AdditiveRoughTermAddsDriverIncrement) {
  auto e = additive_experiment(0.0, 1.0);
  const auto driver = sample_driver(e, 4);
  const auto x = randomised_solution(e, driver, sample_inner_noise(e, 5));
  for (std::size_t i = 0; i <= e.intervals; ++i)
    EXPECT_NEAR(x.state(i)[0] - 0.25, driver.lift.value(i)[0] - driver.lift.value(0)[0], 1e-14);
  e.driver = ou_driver();
  const auto s = sample_driver(e, 4);
  const auto y = randomised_solution(e, s, sample_inner_noise(e, 5));
  for (std::size_t i = 0; i <= e.intervals; ++i)
    EXPECT_NEAR(y.state(i)[0] - 0.25, s.lift.value(i)[0] - 0.3, 1e-14);
}

TEST(Randomise, AdditiveModelRoutesAgree) {
  for (bool diffusion : {false, true}) {
    auto e = additive_experiment(0.4, 0.7);
    if (diffusion) e.driver = ou_driver();
    const auto driver = sample_driver(e, 21);
    const auto noise = sample_inner_noise(e, 22);
    const auto a = randomised_solution(e, driver, noise);
    const auto b = doubly_stochastic_solution(e, driver, noise);
    double bsum = 0.0;
    for (std::size_t i = 0; i <= e.intervals; ++i) {
      if (i > 0)
        for (std::size_t j = (i - 1) * 8; j < i * 8; ++j) bsum += noise.increments[j];
      const double expected = 0.25 + 0.4 * bsum + 0.7 * (driver.fine_states[i * 8] - driver.fine_states[0]);
      EXPECT_NEAR(a.state(i)[0], expected, 1e-12);
      EXPECT_NEAR(b.state(i)[0], expected, 1e-12);
    }
  }
}

TEST(Randomise, LinearEquationMatchesItoExponential) {
  RandomisationExperiment e;
  e.rsde = linear_rough_spec();
  e.x0 = {1.0};
  std::vector<double> mesh, rms;
  for (std::size_t n : {16, 32, 64, 128}) {
    e.intervals = n;
    e.fine_factor = n;
    std::vector<double> sq(1000);
    parallel_for(sq.size(), [&](std::size_t s) {
      const auto driver = sample_driver(e, derive_seed(3, "outer", {n, s}));
      const auto x = randomised_solution(e, driver, sample_inner_noise(e, 0));
      const double err = x.state(n)[0] - std::exp(driver.lift.value(n)[0] - 0.5);
      sq[s] = err * err;
    });
    mesh.push_back(1.0 / n);
    rms.push_back(std::sqrt(summarize(sq).mean));
  }
  EXPECT_GE(fit_rate(mesh, rms).rate, 0.9);
}

TEST(Randomise, CausalityWitness) {
  // Coefficients read the current driver value; changing the driver after
  // node 5 leaves both routes untouched up to node 5.
  auto e = nonlinear_experiment();
  e.rsde.drift = [](double, std::span<const double> x, const DriverView& y, std::span<double> out) {
    out[0] = -x[0] + 0.2 * y.current()[0];
  };
  e.rsde.rough = [](double, std::span<const double> x, const DriverView& y, std::span<double> out) {
    out[0] = 0.5 * std::sin(x[0]) + 0.1 * y.current()[0];
  };
  e.driver = ou_driver();
  const auto driver = sample_driver(e, 31);
  const auto noise = sample_inner_noise(e, 32);

  auto mutated = driver;
  const std::size_t cut = 5 * e.fine_factor;
  for (std::size_t j = cut; j < mutated.noise.grid.intervals(); ++j) mutated.noise.increments[j] += 1.0;
  std::vector<double> s(mutated.fine_states.begin(), mutated.fine_states.begin() + 1);
  for (std::size_t j = 0; j < mutated.noise.grid.intervals(); ++j) {
    mutated.beta[j] = 1.0 - 2.0 * s[j];
    s.push_back(s[j] + mutated.beta[j] * mutated.noise.grid.step(j) + 0.5 * mutated.noise.increments[j]);
  }
  mutated.fine_states = s;
  mutated.lift = lift_fine_path(e.coarse_grid(), e.fine_factor, 1, s, LiftConvention::ito);
  ASSERT_EQ(mutated.lift.value(5)[0], driver.lift.value(5)[0]);
  ASSERT_NE(mutated.lift.value(6)[0], driver.lift.value(6)[0]);

  const auto a0 = randomised_solution(e, driver, noise), a1 = randomised_solution(e, mutated, noise);
  const auto b0 = doubly_stochastic_solution(e, driver, noise), b1 = doubly_stochastic_solution(e, mutated, noise);
  for (std::size_t i = 0; i <= 5; ++i) {
    EXPECT_EQ(a0.state(i)[0], a1.state(i)[0]);
    EXPECT_EQ(b0.state(i)[0], b1.state(i)[0]);
  }
  EXPECT_NE(a0.state(e.intervals)[0], a1.state(e.intervals)[0]);
  EXPECT_NE(b0.state(e.intervals)[0], b1.state(e.intervals)[0]);
}

TEST(Randomise, PathwiseGapShrinksUnderRefinement) {
  const std::vector<std::size_t> levels{16, 32, 64, 128};
  const auto report = pathwise_coupling_report(nonlinear_experiment(), levels, 500, 7);
  const auto gaps = report.values("sup_gap");
  ASSERT_EQ(gaps.size(), 4u);
  for (std::size_t l = 0; l + 1 < gaps.size(); ++l) EXPECT_LT(gaps[l + 1], gaps[l]);
  ASSERT_EQ(report.rates.size(), 1u);
  EXPECT_GE(report.rates[0].fit.rate, 0.4);
}

TEST(Randomise, PathwiseGapOfDegenerateModels) {
  const std::vector<std::size_t> levels{4, 8, 16};
  auto zero_f = nonlinear_experiment();
  zero_f.rsde.rough = [](double, std::span<const double>, const DriverView&, std::span<double> out) { out[0] = 0.0; };
  for (double g : pathwise_coupling_report(zero_f, levels, 20, 1).values("sup_gap")) EXPECT_LE(g, 1e-12);
  for (double g : pathwise_coupling_report(additive_experiment(0.3, 0.5), levels, 20, 1).values("sup_gap"))
    EXPECT_LE(g, 1e-12);
  EXPECT_THROW(pathwise_coupling_report(zero_f, std::vector<std::size_t>{4, 8}, 20, 1), InvalidArgument);
}

TEST(Randomise, ConstantTestFunctionHasNoGap) {
  const TestFunction one[] = {{"one", [](std::span<const double>) { return 1.0; }}};
  const auto report = conditional_law_report(nonlinear_experiment(), one, 3, 50, 2);
  ASSERT_EQ(report.laws.size(), 1u);
  for (double z : report.laws[0].z) EXPECT_EQ(z, 0.0);
  EXPECT_EQ(report.laws[0].pass_fraction, 1.0);
  for (const auto& row : report.rows)
    if (row.metric.rfind("cond_gap", 0) == 0) EXPECT_EQ(row.value, 0.0);
}

TEST(Randomise, AdditiveConditionalMeans) {
  const TestFunction x[] = {{"x", [](std::span<const double> v) { return v[0]; }}};
  const auto report = conditional_law_report(additive_experiment(0.4, 0.7), x, 20, 1000, 8);
  EXPECT_GE(report.laws[0].pass_fraction, 0.95);
  EXPECT_LE(std::abs(report.laws[0].tower_z), 3.0);
}

TEST(Randomise, NonlinearConditionalLawsAgree) {
  const TestFunction phis[] = {{"x", [](std::span<const double> v) { return v[0]; }},
                               {"x2", [](std::span<const double> v) { return v[0] * v[0]; }}};
  auto e = nonlinear_experiment();
  e.intervals = 64;
  const auto report = conditional_law_report(e, phis, 10, 2000, 12);
  for (const auto& law : report.laws) {
    EXPECT_GE(law.pass_fraction, 0.9) << law.name;
    EXPECT_LE(std::abs(law.tower_z), 3.0) << law.name;
  }
  EXPECT_FALSE(report.exponent_warning);
  std::ostringstream csv, summary;
  write_csv(csv, report);
  write_summary(summary, report);
  EXPECT_EQ(csv.str().substr(0, 24), "mesh,metric,value,stderr");
  EXPECT_NE(summary.str().find("phi x2"), std::string::npos);
}
