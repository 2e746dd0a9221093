#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "roughkit/errors.hpp"
#include "roughkit/stats.hpp"
#include "roughkit/volpricing.hpp"

using namespace roughkit;

namespace {

LsvModel constant_model(double v, double rho) {
  LsvModel m;
  m.rho = [rho](double) { return rho; };
  m.variance = {VarianceKind::constant, v, 0.0, 0.0, 0.0};
  m.x0 = 0.3;
  return m;
}

LsvModel cir_model(double rho) {
  LsvModel m;
  m.rho = [rho](double) { return rho; };
  m.variance = {VarianceKind::cir, 1.0, 2.0, 1.0, 0.5};
  return m;
}

PricingConfig small_config() {
  PricingConfig cfg;
  cfg.intervals = 32;
  cfg.fine_factor = 16;
  cfg.outer = 10;
  cfg.inner = 2000;
  cfg.joint = 20000;
  return cfg;
}

}  // namespace

TEST(VolPricing, Parsing) {
  EXPECT_EQ(parse_variance_kind("lognormal-ou"), VarianceKind::lognormal_ou);
  EXPECT_EQ(to_string(parse_variance_kind("cir")), "cir");
  EXPECT_THROW(parse_variance_kind("heston"), InvalidArgument);
  EXPECT_EQ(parse_payoff("put"), Payoff::put);
  EXPECT_THROW(parse_payoff("digital"), InvalidArgument);
  EXPECT_EQ(payoff_value(Payoff::call, 1.5, 1.0), 0.5);
  EXPECT_EQ(payoff_value(Payoff::put, 1.5, 1.0), 0.0);
  EXPECT_EQ(payoff_value(Payoff::forward, 1.5, 2.0), -0.5);
}

TEST(VolPricing, VarianceSamplers) {
  const auto fine = make_grid(1.0, 512);
  const auto dw = sample_brownian(fine, 1, 3).increments;
  const auto c = simulate_common_factor({VarianceKind::constant, 0.7, 0, 0, 0}, fine, dw);
  for (double v : c.variance) EXPECT_EQ(v, 0.7);
  // Far from the Feller condition the truncated scheme still reports V >= 0.
  const auto cir = simulate_common_factor({VarianceKind::cir, 0.05, 1.0, 0.05, 2.0}, fine, dw);
  for (double v : cir.variance) EXPECT_GE(v, 0.0);
  const auto lou = simulate_common_factor({VarianceKind::lognormal_ou, 0.5, 1.0, 0.0, 1.0}, fine, dw);
  for (double v : lou.variance) EXPECT_GT(v, 0.0);
  EXPECT_EQ(lou.variance[0], 0.5);
  double m = 0.0;
  for (std::size_t j = 0; j < dw.size(); ++j) {
    m += std::sqrt(cir.variance[j]) * dw[j];
    EXPECT_EQ(cir.martingale[j + 1], m);
  }
  EXPECT_THROW(simulate_common_factor({VarianceKind::cir, -1.0, 1, 1, 1}, fine, dw), InvalidArgument);
}

TEST(VolPricing, JointConstantVarianceIsGaussian) {
  const auto x = simulate_lsv_joint(constant_model(0.49, 0.0), make_grid(2.0, 16), 4, 20000, 1).terminal;
  const auto s = summarize(x);
  EXPECT_LE(std::abs(s.mean - 0.3), 3 * s.std_error);
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - 0.3) * (x[i] - 0.3);
  const auto v = summarize(sq);
  EXPECT_LE(std::abs(v.mean - 0.98), 3 * v.std_error);
}

TEST(VolPricing, JointDegenerateCases) {
  auto frozen = cir_model(0.3);
  frozen.x0 = 1.25;
  frozen.local_vol = [](double, double) { return 0.0; };
  for (double x : simulate_lsv_joint(frozen, make_grid(1.0, 8), 4, 50, 2).terminal) EXPECT_EQ(x, 1.25);
  const auto full = simulate_lsv_joint(cir_model(1.0), make_grid(1.0, 8), 4, 50, 2);
  EXPECT_EQ(full.terminal, full.martingale);
  auto bad = cir_model(1.2);
  EXPECT_THROW(simulate_lsv_joint(bad, make_grid(1.0, 8), 4, 5, 2), InvalidArgument);
}

TEST(VolPricing, BachelierFormula) {
  EXPECT_EQ(bachelier(Payoff::call, 1.0, 0.0, 0.4), 0.6);
  EXPECT_EQ(bachelier(Payoff::call, 1.0, 0.0, 1.4), 0.0);
  EXPECT_NEAR(bachelier(Payoff::call, 1.0, 1e-12, 0.4), 0.6, 1e-15);
  const double m = 0.2, s = 0.8;
  EXPECT_NEAR(bachelier(Payoff::call, m, s, m - 10 * s), 10 * s, 1e-6 * s);
  EXPECT_NEAR(bachelier(Payoff::call, m, s, m), s / std::sqrt(2 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(bachelier(Payoff::call, m, s, 0.5) - bachelier(Payoff::put, m, s, 0.5), m - 0.5, 1e-15);
  double last = 1e9;
  for (double k = -2.0; k <= 2.0; k += 0.1) {
    const double c = bachelier(Payoff::call, m, s, k);
    EXPECT_LE(c, last);
    last = c;
  }
}

TEST(VolPricing, MixingOracleReductions) {
  const auto fine = make_grid(1.5, 100);
  const auto dw = sample_brownian(fine, 1, 5).increments;
  const std::vector<double> v(fine.nodes(), 0.36);
  const auto zero = [](double) { return 0.0; };
  EXPECT_NEAR(mixing_formula_oracle(fine, v, dw, zero, 0.1, 0.3),
              bachelier(Payoff::call, 0.1, std::sqrt(0.36 * 1.5), 0.3), 1e-14);
  const auto one = [](double) { return 1.0; };
  const auto mm = mixing_moments(fine, v, dw, one, 0.1);
  EXPECT_EQ(mm.sd, 0.0);
  EXPECT_EQ(mixing_formula_oracle(fine, v, dw, one, 0.1, 0.0), std::max(mm.mean, 0.0));
}

TEST(VolPricing, BracketRecoversConstantVariance) {
  const auto coarse = make_grid(1.0, 16);
  std::vector<double> mesh, rms;
  for (std::size_t ff : {16, 64, 256}) {
    double acc = 0.0;
    const std::size_t paths = 100;
    for (std::size_t p = 0; p < paths; ++p) {
      const auto fine = coarse.refine(ff);
      const auto f = simulate_common_factor({VarianceKind::constant, 0.5, 0, 0, 0}, fine,
                                            sample_brownian(fine, 1, derive_seed(1, "v", {ff, p})).increments);
      const auto est = recover_variance(lift_fine_path(coarse, ff, 1, f.martingale, LiftConvention::ito));
      EXPECT_EQ(est.floored, 0u);
      for (double v : est.values) acc += (v - 0.5) * (v - 0.5);
    }
    mesh.push_back(1.0 / (16.0 * ff));
    rms.push_back(std::sqrt(acc / (paths * 16.0)));
  }
  EXPECT_GT(rms[0], rms[1]);
  EXPECT_GT(rms[1], rms[2]);
  EXPECT_NEAR(fit_rate(mesh, rms).rate, 0.5, 0.1);
}

TEST(VolPricing, NegativeBracketIsFloored) {
  // delta[Y] = dY^2 - 2 YY < 0 on the second interval.
  const RoughPath rp(make_grid(1.0, 2), 1, {0.0, 0.5, 0.6}, {0.125, 0.2});
  const auto est = recover_variance(rp);
  EXPECT_EQ(est.floored, 1u);
  EXPECT_EQ(est.values[1], 0.0);
  EXPECT_NEAR(est.values[0], 0.0, 1e-15);
}

TEST(VolPricing, UncorrelatedConditionalPriceIsBachelier) {
  const double strikes[] = {-0.3, 0.0, 0.3};
  const auto cp = conditional_price_rough(cir_model(0.0), Payoff::call, strikes, small_config(), 6);
  std::size_t passed = 0;
  for (std::size_t i = 0; i < cp.price.size(); ++i)
    passed += std::abs(cp.price[i] - cp.oracle[i]) <= 3 * (cp.std_error[i] + cp.bound[i]);
  EXPECT_GE(passed, cp.price.size() - 1);
}

TEST(VolPricing, ForwardPriceIsConditionalMean) {
  const double strikes[] = {0.0};
  auto model = cir_model(0.6);
  model.x0 = 0.4;
  const auto cp = conditional_price_rough(model, Payoff::forward, strikes, small_config(), 7);
  for (std::size_t k = 0; k < cp.outer; ++k) {
    EXPECT_LE(cp.bound[k], 1e-12);
    EXPECT_LE(std::abs(cp.price[k] - cp.oracle[k]), 3 * cp.std_error[k]);
  }
}

TEST(VolPricing, RoughPricesAreMonotoneInStrike) {
  const double strikes[] = {-0.4, -0.2, 0.0, 0.2, 0.4};
  const auto cp = conditional_price_rough(cir_model(0.7), Payoff::call, strikes, small_config(), 8);
  for (std::size_t k = 0; k < cp.outer; ++k)
    for (std::size_t s = 0; s + 1 < 5; ++s) {
      EXPECT_LE(cp.price[k * 5 + s + 1], cp.price[k * 5 + s]);
      EXPECT_LE(cp.oracle[k * 5 + s + 1], cp.oracle[k * 5 + s]);
    }
}

TEST(VolPricing, ReportTowerAndOracle) {
  const double strikes[] = {-0.4, -0.2, 0.0, 0.2, 0.4};
  const auto report = price_report(cir_model(0.7), Payoff::call, strikes, small_config(), 9);
  EXPECT_GE(report.pass_fraction, 0.9);
  EXPECT_LE(report.max_tower_z, 3.0);
  EXPECT_TRUE(report.oracle_monotone);
  EXPECT_EQ(report.lines.size(), 15u);
  std::ostringstream csv, draws;
  write_csv(csv, report);
  write_draws_csv(draws, report.conditional);
  EXPECT_EQ(csv.str().substr(0, 27), "strike,route,price,stderr,z");
  EXPECT_EQ(draws.str().substr(0, 37), "draw,strike,price,stderr,oracle,bound");
}

TEST(VolPricing, LocalVolatilityDisablesOracle) {
  auto model = cir_model(0.5);
  model.local_vol = [](double, double x) { return 1.0 + 0.1 * std::tanh(x); };
  const double strikes[] = {0.0};
  auto cfg = small_config();
  cfg.outer = 2;
  cfg.inner = 200;
  const auto cp = conditional_price_rough(model, Payoff::call, strikes, cfg, 3);
  EXPECT_TRUE(cp.oracle.empty());
  EXPECT_GT(cp.price[0], 0.0);
}
