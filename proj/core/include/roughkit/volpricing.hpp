#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "roughkit/lift.hpp"
#include "roughkit/rng.hpp"
#include "roughkit/rough_path.hpp"

namespace roughkit {

enum class VarianceKind { constant, cir, lognormal_ou };

// constant:      V = v0
// cir:           dV = kappa (theta - V+) dt + xi sqrt(V+) dW, full truncation, reports V+
// lognormal_ou:  V = v0 exp(Z), dZ = -kappa Z dt + xi dW, Z_0 = 0
struct VarianceModel {
  VarianceKind kind = VarianceKind::constant;
  double v0 = 1.0;
  double kappa = 1.0;
  double theta = 1.0;
  double xi = 0.0;
};

VarianceKind parse_variance_kind(const std::string& name);
std::string to_string(VarianceKind kind);

// dX = l(t, X) sqrt(V) (sqrt(1 - rho^2) dB + rho dW). An empty local_vol means
// l = 1, which is also the case where the mixing formula applies.
struct LsvModel {
  std::function<double(double, double)> local_vol;
  std::function<double(double)> rho;
  VarianceModel variance;
  double x0 = 0.0;
};

// V and M = int sqrt(V) dW at the nodes of `fine`, given the increments of W.
struct CommonFactor {
  std::vector<double> variance;
  std::vector<double> martingale;
};
CommonFactor simulate_common_factor(const VarianceModel& model, const TimeGrid& fine,
                                    std::span<const double> dw);

struct JointSamples {
  std::vector<double> terminal;     // X_T
  std::vector<double> martingale;   // M_T
};

// Joint Euler-Maruyama of (V, X) on grid.refine(fine_factor), M samples.
JointSamples simulate_lsv_joint(const LsvModel& model, const TimeGrid& grid,
                                std::size_t fine_factor, std::size_t samples, Seed seed);

enum class Payoff { call, put, forward };
Payoff parse_payoff(const std::string& name);
std::string to_string(Payoff payoff);
double payoff_value(Payoff payoff, double x, double strike);

// Bachelier value of the payoff for X ~ N(m, s^2); s = 0 gives the intrinsic value.
double bachelier(Payoff payoff, double m, double s, double strike);

// Conditional on (W, V): X_T ~ N(m, s^2), m = x0 + sum rho sqrt(V) dW,
// s^2 = sum (1 - rho^2) V dt over the fine grid.
struct MixingMoments {
  double mean = 0.0;
  double sd = 0.0;
};
MixingMoments mixing_moments(const TimeGrid& fine, std::span<const double> variance,
                             std::span<const double> dw, const std::function<double(double)>& rho,
                             double x0);
double mixing_formula_oracle(const TimeGrid& fine, std::span<const double> variance,
                             std::span<const double> dw, const std::function<double(double)>& rho,
                             double x0, double strike, Payoff payoff = Payoff::call);

// Bracket derivative per coarse interval: delta[Y]_{i,i+1} / (t_{i+1} - t_i),
// negative values floored at zero and counted.
struct VarianceEstimate {
  std::vector<double> values;  // one per interval
  std::size_t floored = 0;
};
VarianceEstimate recover_variance(const RoughPath& rp);

struct PricingConfig {
  double horizon = 1.0;
  std::size_t intervals = 64;
  std::size_t fine_factor = 16;        // common factor and lift
  std::size_t inner_fine_factor = 1;   // Brownian substeps of the rough solve
  std::size_t outer = 50;
  std::size_t inner = 10000;
  std::size_t joint = 100000;
};

// Per outer draw k and strike s (index k * strikes + s).
struct ConditionalPrices {
  std::vector<double> strikes;
  std::size_t outer = 0;
  std::vector<double> price;
  std::vector<double> std_error;
  std::vector<double> oracle;  // empty unless l = 1
  std::vector<double> bound;   // scheme bound, empty unless l = 1
  std::size_t floored = 0;
};

// Rough route: per outer draw of W, lift M (Itô), recover V from the bracket
// and solve dX = l sqrt((1 - rho^2) V) dB + l rho dY with `inner` draws of B.
ConditionalPrices conditional_price_rough(const LsvModel& model, Payoff payoff,
                                          std::span<const double> strikes,
                                          const PricingConfig& cfg, Seed seed);

struct PriceLine {
  double strike = 0.0;
  std::string route;
  double price = 0.0;
  double std_error = 0.0;
  double z = 0.0;
};

struct PriceReport {
  Payoff payoff = Payoff::call;
  ConditionalPrices conditional;
  std::vector<PriceLine> lines;   // rough, joint and (when available) oracle per strike
  std::vector<double> draw_pass;  // per outer draw: 1 if every strike is within tolerance
  double pass_fraction = 0.0;
  bool oracle_monotone = true;
  double max_tower_z = 0.0;
};

PriceReport price_report(const LsvModel& model, Payoff payoff, std::span<const double> strikes,
                         const PricingConfig& cfg, Seed seed);

// CSV: strike,route,price,stderr,z
void write_csv(std::ostream& out, const PriceReport& report);
// CSV: draw,strike,price,stderr,oracle,bound
void write_draws_csv(std::ostream& out, const ConditionalPrices& prices);

}  // namespace roughkit
