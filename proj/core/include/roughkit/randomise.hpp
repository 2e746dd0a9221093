#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roughkit/lift.hpp"
#include "roughkit/rsde.hpp"
#include "roughkit/stats.hpp"

namespace roughkit {

// Two ways of producing the doubly stochastic process:
//  * randomised: sample the driver S from the outer seed, Itô-lift it on the
//    coarse grid and solve the rough SDE against the frozen lift with B from
//    the inner seed;
//  * doubly: joint Euler–Maruyama on the fine grid of
//    dX = (b + f beta) dt + sigma dB + f gamma dW.
// Both consume the same fine increments of W (outer seed) and B (inner seed).
struct RandomisationExperiment {
  RsdeSpec rsde;                          // must be causal
  std::optional<ItoDiffusionSpec> driver;  // empty: S = W, Brownian of dimension rsde.dy
  double horizon = 1.0;
  std::size_t intervals = 64;
  std::size_t fine_factor = 4;
  std::vector<double> x0;

  TimeGrid coarse_grid() const { return TimeGrid::uniform(horizon, intervals); }
  TimeGrid fine_grid() const { return coarse_grid().refine(fine_factor); }
};

void validate(const RandomisationExperiment& exp);

// One draw of the driver: W increments and S on the fine grid, the Itô lift
// of S on the coarse grid, and the coefficients beta, gamma of S at every
// fine node.
struct DriverSample {
  BrownianDraw noise;
  std::vector<double> fine_states;  // fine nodes x d_S
  std::vector<double> beta;         // fine intervals x d_S
  std::vector<double> gamma;        // fine intervals x d_S x d_W
  RoughPath lift;
};

DriverSample sample_driver(const RandomisationExperiment& exp, Seed outer_seed);
BrownianDraw sample_inner_noise(const RandomisationExperiment& exp, Seed inner_seed);

SolutionPath randomised_solution(const RandomisationExperiment& exp, const DriverSample& driver,
                                 const BrownianDraw& inner);
SolutionPath doubly_stochastic_solution(const RandomisationExperiment& exp,
                                        const DriverSample& driver, const BrownianDraw& inner);

SolutionPath randomised_solution(const RandomisationExperiment& exp, Seed outer_seed,
                                 Seed inner_seed);
SolutionPath doubly_stochastic_solution(const RandomisationExperiment& exp, Seed outer_seed,
                                        Seed inner_seed);

struct CouplingRow {
  double mesh = 0.0;
  std::string metric;
  double value = 0.0;
  double std_error = 0.0;
};

struct LawCheck {
  std::string name;
  std::vector<double> z;  // one per outer draw
  double pass_fraction = 0.0;
  double tower_z = 0.0;
};

struct CouplingReport {
  std::vector<CouplingRow> rows;
  std::vector<FittedRate> rates;
  std::vector<LawCheck> laws;
  bool exponent_warning = false;

  std::vector<double> values(const std::string& metric) const;
};

// Sup over coarse nodes of |X_randomised - X_doubly|, RMS over `samples`
// coupled pairs, for each coarse size in `levels` (at least 3). All levels
// share the fine grid horizon / (max(levels) * exp.fine_factor), so the
// doubly stochastic path is the same at every level. Metric "sup_gap".
CouplingReport pathwise_coupling_report(const RandomisationExperiment& exp,
                                        std::span<const std::size_t> levels, std::size_t samples,
                                        Seed master);

struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> phi;
};

// For each of `outer` driver draws, M inner solves per route (independent B
// between routes) estimate E[phi(X_T) | driver]; z-scores of the difference
// and the fraction with |z| <= 3. The tower check compares the average of the
// randomised conditional means with M independent joint draws. Metrics:
// "cond_gap:<phi>:<k>", "pass_fraction:<phi>", "tower_z:<phi>".
CouplingReport conditional_law_report(const RandomisationExperiment& exp,
                                      std::span<const TestFunction> phis, std::size_t outer,
                                      std::size_t inner, Seed master, double p = 8.0);

// CSV `mesh,metric,value,stderr` followed by `0,rate:<metric>,<rate>,<residual>`.
void write_csv(std::ostream& out, const CouplingReport& report);
void write_summary(std::ostream& out, const CouplingReport& report);

}  // namespace roughkit
