#include "roughkit_runner/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "roughkit/errors.hpp"
#include "roughkit/filtering.hpp"
#include "roughkit/lift.hpp"
#include "roughkit/meanfield.hpp"
#include "roughkit/parallel.hpp"
#include "roughkit/randomise.hpp"
#include "roughkit/rough_integral.hpp"
#include "roughkit/rough_path.hpp"
#include "roughkit/rsde.hpp"
#include "roughkit/stats.hpp"
#include "roughkit/volpricing.hpp"

#ifndef ROUGHKIT_VERSION
#define ROUGHKIT_VERSION "unknown"
#endif

namespace roughkit::runner {

namespace {

using Span = std::span<const double>;
using Out = std::span<double>;

constexpr double kExact = 1e-12;

Check make_check(std::string name, double value, std::string relation, double threshold) {
  bool pass = false;
  if (relation == "<=") pass = value <= threshold;
  if (relation == ">=") pass = value >= threshold;
  if (relation == "==") pass = value == threshold;
  return {std::move(name), value, std::move(relation), threshold, pass};
}

LiftConvention convention_of(const ExperimentConfig& c) {
  return c.convention == "ito" ? LiftConvention::ito : LiftConvention::stratonovich;
}

// ---------------------------------------------------------------- lift-stats

ExperimentResult lift_stats(const ExperimentConfig& c) {
  const std::size_t d = c.dim, n = c.intervals, S = c.samples;
  const auto grid = make_grid(c.horizon, static_cast<std::int64_t>(n));
  const auto conv = convention_of(c);
  const std::size_t pairs = d * (d + 1) / 2;
  std::vector<std::vector<double>> inc(d, std::vector<double>(S * n));
  std::vector<std::vector<double>> prod(pairs, std::vector<double>(S * n));
  std::vector<std::vector<double>> br(pairs, std::vector<double>(S));
  parallel_for(S, [&](std::size_t s) {
    const auto rp = sample_bm_lift(d, grid, c.fine_factor, derive_seed(c.seed, "lift", {s}), conv, c.alpha);
    const auto b = bracket(rp);
    for (std::size_t i = 0; i < n; ++i) {
      const double scale = std::sqrt(grid.step(i));
      std::size_t q = 0;
      for (std::size_t a = 0; a < d; ++a) {
        const double da = (rp.value(i + 1)[a] - rp.value(i)[a]) / scale;
        inc[a][s * n + i] = da;
        for (std::size_t e = a; e < d; ++e, ++q)
          prod[q][s * n + i] = da * (rp.value(i + 1)[e] - rp.value(i)[e]) / scale;
      }
    }
    std::size_t q = 0;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t e = a; e < d; ++e, ++q) br[q][s] = b.at(n)[a * d + e];
  });

  ExperimentResult r;
  std::ostringstream csv;
  csv << "statistic,target,mean,stderr,z\n";
  double max_z = 0.0, max_bracket = 0.0;
  auto row = [&](const std::string& name, double target, const std::vector<double>& v, bool scored) {
    const auto sm = summarize(v);
    const double z = scored ? z_score(sm.mean, sm.std_error, target, 0.0) : 0.0;
    if (scored) max_z = std::max(max_z, std::abs(z));
    csv << name << ',' << format_double(target) << ',' << format_double(sm.mean) << ','
        << format_double(sm.std_error) << ',' << format_double(z) << '\n';
  };
  for (std::size_t a = 0; a < d; ++a) row("increment:" + std::to_string(a), 0.0, inc[a], true);
  std::size_t q = 0;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t e = a; e < d; ++e, ++q)
      row("increment_product:" + std::to_string(a) + std::to_string(e), a == e ? 1.0 : 0.0, prod[q], true);
  q = 0;
  const bool ito = conv == LiftConvention::ito;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t e = a; e < d; ++e, ++q) {
      const double target = ito && a == e ? c.horizon : 0.0;
      row("bracket_T:" + std::to_string(a) + std::to_string(e), target, br[q], ito);
      if (!ito)
        for (double x : br[q]) max_bracket = std::max(max_bracket, std::abs(x));
    }
  r.files.emplace_back("lift_stats.csv", csv.str());
  r.checks.push_back(make_check("max_abs_z", max_z, "<=", 3.0));
  if (!ito) r.checks.push_back(make_check("stratonovich_bracket_max_abs", max_bracket, "<=", kExact));
  return r;
}

// ----------------------------------------------------------------- integrate

std::vector<double> random_levels(Rng& rng, std::size_t nodes, std::size_t dim) {
  std::vector<double> first(nodes * dim), second((nodes - 1) * dim * dim);
  for (std::size_t a = 0; a < dim; ++a) first[a] = rng.normal();
  for (std::size_t i = 1; i < nodes; ++i)
    for (std::size_t a = 0; a < dim; ++a) first[i * dim + a] = first[(i - 1) * dim + a] + rng.normal();
  for (auto& x : second) x = rng.normal();
  first.insert(first.end(), second.begin(), second.end());
  return first;
}

// Gaussian first level and unconstrained second level on a random grid.
RoughPath random_path(Rng& rng, const TimeGrid& grid, std::size_t dim, double alpha) {
  auto both = random_levels(rng, grid.nodes(), dim);
  std::vector<double> first(both.begin(), both.begin() + static_cast<std::ptrdiff_t>(grid.nodes() * dim));
  std::vector<double> second(both.begin() + static_cast<std::ptrdiff_t>(grid.nodes() * dim), both.end());
  return RoughPath(grid, dim, std::move(first), std::move(second), alpha);
}

double rel_gap(Span a, Span b) {
  double diff = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return diff / scale;
}

double rel_gap(const Increment& a, const Increment& b) {
  return std::max(rel_gap(a.first, b.first), rel_gap(a.second, b.second));
}

struct AlgebraErrors {
  static constexpr std::size_t count = 9;
  std::array<double, count> e{};
};

const std::array<const char*, AlgebraErrors::count> kAlgebraNames{
    "chen_consistency",     "chen_associativity",  "bracket_symmetry",
    "geometrize_idempotence", "bracket_nulling",   "partition_invariance",
    "distance_identity",    "distance_symmetry",   "distance_triangle"};

AlgebraErrors algebra_errors(const ExperimentConfig& c, std::size_t s) {
  Rng rng(derive_seed(c.seed, "path", {s}));
  const std::size_t dim = 1 + s % c.dim, n = c.intervals;
  std::vector<double> times{0.0};
  for (std::size_t i = 0; i < n; ++i) times.push_back(times.back() + 0.05 + rng.uniform());
  const TimeGrid grid(std::move(times));
  const auto x = random_path(rng, grid, dim, c.alpha);
  const auto y = random_path(rng, grid, dim, c.alpha);
  const auto z = random_path(rng, grid, dim, c.alpha);
  AlgebraErrors out;
  auto& e = out.e;

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k)
      for (std::size_t j = k + 1; j <= n; ++j)
        e[0] = std::max(e[0], rel_gap(chen_increment(x, i, j),
                                      chen_compose(chen_increment(x, i, k), chen_increment(x, k, j))));
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t l = k + 1; l < n; ++l) {
      const auto a = chen_increment(x, 0, k), b = chen_increment(x, k, l), d = chen_increment(x, l, n);
      e[1] = std::max(e[1], rel_gap(chen_compose(chen_compose(a, b), d), chen_compose(a, chen_compose(b, d))));
    }

  const auto bx = bracket(x);
  for (std::size_t i = 0; i <= n; ++i) {
    const auto m = bx.at(i);
    std::vector<double> mt(m.size());
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) mt[a * dim + b] = m[b * dim + a];
    e[2] = std::max(e[2], rel_gap(m, mt));
  }

  const auto g = geometrize(x);
  const auto gg = geometrize(g);
  e[3] = std::max(rel_gap(g.second_level(), gg.second_level()), std::ranges::equal(g.first_level(), x.first_level()) ? 0.0 : 1.0);
  const auto bg = bracket(g);
  for (std::size_t i = 0; i <= n; ++i) {
    double scale = 1.0, worst = 0.0;
    for (double v : bx.at(i)) scale = std::max(scale, std::abs(v));
    for (double v : bg.at(i)) worst = std::max(worst, std::abs(v));
    e[4] = std::max(e[4], worst / scale);
  }

  const auto cp = self_integrand(x);
  const auto whole = chen_increment(x, 0, n);
  std::vector<double> expected(dim * dim);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b)
      expected[a * dim + b] = x.value(0)[a] * whole.first[b] + whole.second[a * dim + b];
  for (std::size_t trial = 0; trial < 5; ++trial) {
    std::vector<std::size_t> partition{0};
    for (std::size_t i = 1; i < n; ++i)
      if (rng.uniform() < 0.5) partition.push_back(i);
    partition.push_back(n);
    e[5] = std::max(e[5], rel_gap(davie_sum(cp, x, partition), expected));
  }

  for (auto metric : {RoughMetric::rho_alpha, RoughMetric::rho_alpha_1}) {
    const double xx = rough_distance(x, x, c.alpha, metric);
    const double xy = rough_distance(x, y, c.alpha, metric), yx = rough_distance(y, x, c.alpha, metric);
    const double yz = rough_distance(y, z, c.alpha, metric), xz = rough_distance(x, z, c.alpha, metric);
    e[6] = std::max(e[6], std::abs(xx));
    e[7] = std::max(e[7], std::abs(xy - yx) / std::max(1.0, xy));
    e[8] = std::max(e[8], std::max(0.0, xz - xy - yz) / std::max(1.0, xz));
  }
  return out;
}

ExperimentResult integrate(const ExperimentConfig& c) {
  std::vector<AlgebraErrors> per(c.samples);
  parallel_for(c.samples, [&](std::size_t s) { per[s] = algebra_errors(c, s); });
  ExperimentResult r;
  std::ostringstream csv;
  csv << "property,max_relative_error,tolerance\n";
  for (std::size_t k = 0; k < AlgebraErrors::count; ++k) {
    double worst = 0.0;
    for (const auto& p : per) worst = std::max(worst, p.e[k]);
    csv << kAlgebraNames[k] << ',' << format_double(worst) << ',' << format_double(kExact) << '\n';
    r.checks.push_back(make_check(kAlgebraNames[k], worst, "<=", kExact));
  }
  r.files.emplace_back("algebra.csv", csv.str());

  const auto rp = sample_bm_lift(c.dim, make_grid(c.horizon, static_cast<std::int64_t>(c.intervals)),
                                 c.fine_factor, derive_seed(c.seed, "trace"), convention_of(c), c.alpha);
  const auto integral = rough_integral(self_integrand(rp), rp, 0, rp.intervals());
  std::ostringstream trace;
  trace << "stride,mesh,component,value\n";
  for (const auto& t : integral.refinement)
    for (std::size_t k = 0; k < t.value.size(); ++k)
      trace << t.stride << ',' << format_double(t.mesh) << ',' << k << ',' << format_double(t.value[k]) << '\n';
  r.files.emplace_back("integral_trace.csv", trace.str());
  return r;
}

// ---------------------------------------------------------------- solve-rsde

ExperimentResult geometric_study(const ExperimentConfig& c) {
  const bool strato = c.preset == "geometric-strato";
  const auto spec = scalar_model(c.preset, c.model);
  const double coef = c.model.at("c"), x0v = c.model.at("x0");
  const std::vector<double> x0{x0v};
  const auto& levels = c.levels;
  const std::size_t finest = levels.back() * c.fine_factor;
  std::vector<std::vector<double>> sq(levels.size(), std::vector<double>(c.samples));
  parallel_for(c.samples, [&](std::size_t s) {
    std::vector<double> shared_path;
    if (strato)
      shared_path = brownian_path(
          sample_brownian(make_grid(c.horizon, static_cast<std::int64_t>(finest)), 1,
                          derive_seed(c.seed, "shared", {s})));
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const std::size_t n = levels[l];
      const auto grid = make_grid(c.horizon, static_cast<std::int64_t>(n));
      std::optional<RoughPath> rp;
      double ref = 0.0;
      if (strato) {
        rp = lift_fine_path(grid, finest / n, 1, shared_path, LiftConvention::stratonovich, c.alpha);
        ref = x0v * std::exp(coef * shared_path.back());
      } else {
        rp = sample_bm_lift(1, grid, n, derive_seed(c.seed, "own", {n, s}), LiftConvention::ito, c.alpha);
        ref = x0v * std::exp(coef * rp->value(n)[0] - 0.5 * coef * coef * c.horizon);
      }
      const auto sol = solve_rsde(spec, *rp, sample_brownian(grid, 1, 0), x0);
      const double e = sol.state(n)[0] - ref;
      sq[l][s] = e * e;
    }
  });
  ConvergenceTable table;
  std::vector<double> mesh, rms;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    mesh.push_back(c.horizon / static_cast<double>(levels[l]));
    rms.push_back(std::sqrt(summarize(sq[l]).mean));
    table.add(mesh.back(), "terminal_rms", rms.back());
  }
  table.rates.push_back({"terminal_rms", fit_rate(mesh, rms)});
  ExperimentResult r;
  std::ostringstream csv;
  write_csv(csv, table);
  r.files.emplace_back("convergence.csv", csv.str());
  r.checks.push_back(make_check("rate:terminal_rms", table.rates[0].fit.rate, ">=", 0.9));
  return r;
}

ExperimentResult single_solve(const ExperimentConfig& c) {
  const auto spec = scalar_model(c.preset, c.model);
  const auto grid = make_grid(c.horizon, static_cast<std::int64_t>(c.intervals));
  const auto rp = sample_bm_lift(1, grid, c.fine_factor, derive_seed(c.seed, "driver"), convention_of(c), c.alpha);
  const auto bm = sample_brownian(grid.refine(c.fine_factor), 1, derive_seed(c.seed, "brownian"));
  const std::vector<double> x0{c.model.at("x0")};
  const auto sol = solve_rsde(spec, rp, bm, x0);
  ExperimentResult r;
  std::ostringstream csv;
  write_solution_csv(csv, sol);
  r.files.emplace_back("solution.csv", csv.str());
  bool finite = true;
  for (double x : sol.states) finite = finite && std::isfinite(x);
  r.checks.push_back(make_check("finite_states", finite ? 1.0 : 0.0, "==", 1.0));
  return r;
}

// ----------------------------------------------------------------- randomise

RandomisationExperiment randomisation(const ExperimentConfig& c) {
  RandomisationExperiment e;
  e.rsde = scalar_model(c.preset, c.model);
  e.horizon = c.horizon;
  e.intervals = c.intervals;
  e.fine_factor = c.fine_factor;
  e.x0 = {c.model.at("x0")};
  return e;
}

ExperimentResult randomise_pathwise(const ExperimentConfig& c) {
  const auto e = randomisation(c);
  const auto report = pathwise_coupling_report(e, c.levels, c.samples, c.seed);
  ExperimentResult r;
  std::ostringstream csv, summary;
  write_csv(csv, report);
  write_summary(summary, report);
  r.files.emplace_back("coupling.csv", csv.str());
  r.files.emplace_back("coupling_summary.txt", summary.str());
  const auto gaps = report.values("sup_gap");
  if (c.preset == "additive") {
    r.checks.push_back(make_check("max_sup_gap", *std::max_element(gaps.begin(), gaps.end()), "<=", kExact));
    return r;
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) decreasing = decreasing && gaps[i] < gaps[i - 1];
  r.checks.push_back(make_check("sup_gap_strictly_decreasing", decreasing ? 1.0 : 0.0, "==", 1.0));
  double rate = 0.0;
  for (const auto& f : report.rates)
    if (f.metric == "sup_gap") rate = f.fit.rate;
  r.checks.push_back(make_check("rate:sup_gap", rate, ">=", 0.4));
  return r;
}

ExperimentResult randomise_law(const ExperimentConfig& c) {
  const auto e = randomisation(c);
  const std::vector<TestFunction> phis{{"x", [](Span x) { return x[0]; }},
                                       {"x2", [](Span x) { return x[0] * x[0]; }}};
  const auto report = conditional_law_report(e, phis, c.outer, c.inner, c.seed, c.p);
  ExperimentResult r;
  std::ostringstream csv, summary;
  write_csv(csv, report);
  write_summary(summary, report);
  r.files.emplace_back("law.csv", csv.str());
  r.files.emplace_back("law_summary.txt", summary.str());
  for (const auto& law : report.laws) {
    r.checks.push_back(make_check("pass_fraction:" + law.name, law.pass_fraction, ">=", 0.95));
    r.checks.push_back(make_check("abs_tower_z:" + law.name, std::abs(law.tower_z), "<=", 3.0));
  }
  return r;
}

// -------------------------------------------------------------------- filter

ExperimentResult filter(const ExperimentConfig& c) {
  const auto params = filter_params(c.model);
  const auto model = linear_filter_model(params);
  const auto grid = make_grid(c.horizon, static_cast<std::int64_t>(c.intervals));
  const std::size_t ff = c.fine_factor;
  const auto obs = simulate_signal_observation(model, grid, ff, derive_seed(c.seed, "observation"), Measure::signal);
  const auto rp = hardwire_bracket(obs.observation, obs.dy, grid, ff, LiftConvention::ito, c.alpha);
  const std::vector<TestFunction> phis{{"x", [](Span x) { return x[0]; }}};
  const auto est = rough_filter(model, rp, phis, c.samples, derive_seed(c.seed, "filter"), c.inner_fine_factor);
  const auto kb = kalman_bucy_oracle(params, obs.grid, obs.observation);
  const auto mass = unit_mass_check(model, grid, ff, c.samples, derive_seed(c.seed, "unit-mass"));

  ExperimentResult r;
  std::ostringstream o, f, post, um;
  write_observation_csv(o, obs.grid, obs.dy, obs.observation);
  write_csv(f, est);
  post << "time,rough_mean,stderr,kalman_mean,kalman_variance,bound,gap\n";
  double sup_gap = 0.0, sup_se = 0.0, sup_bound = 0.0;
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    const std::size_t k = i * ff;
    const double gap = std::abs(est.normalised_at(i, 0) - kb.mean[k]);
    sup_gap = std::max(sup_gap, gap);
    sup_se = std::max(sup_se, est.normalised_se_at(i, 0));
    sup_bound = std::max(sup_bound, kb.mean_bound[k]);
    post << format_double(grid[i]) << ',' << format_double(est.normalised_at(i, 0)) << ','
         << format_double(est.normalised_se_at(i, 0)) << ',' << format_double(kb.mean[k]) << ','
         << format_double(kb.covariance[k]) << ',' << format_double(kb.mean_bound[k]) << ','
         << format_double(gap) << '\n';
  }
  um << "time,mean,stderr,z\n";
  double max_z = 0.0;
  for (const auto& row : mass) {
    um << format_double(row.time) << ',' << format_double(row.mean) << ',' << format_double(row.std_error)
       << ',' << format_double(row.z) << '\n';
    max_z = std::max(max_z, std::abs(row.z));
  }
  r.files.emplace_back("observation.csv", o.str());
  r.files.emplace_back("filter.csv", f.str());
  r.files.emplace_back("posterior_vs_kalman.csv", post.str());
  r.files.emplace_back("unit_mass.csv", um.str());
  r.checks.push_back(make_check("sup_gap", sup_gap, "<=", 3.0 * (sup_se + sup_bound)));
  r.checks.push_back(make_check("unit_mass_max_abs_z", max_z, "<=", 3.0));
  return r;
}

// --------------------------------------------------------------------- price

ExperimentResult price(const ExperimentConfig& c) {
  const auto model = lsv_model(c.preset, c.model);
  PricingConfig pc;
  pc.horizon = c.horizon;
  pc.intervals = c.intervals;
  pc.fine_factor = c.fine_factor;
  pc.inner_fine_factor = c.inner_fine_factor;
  pc.outer = c.outer;
  pc.inner = c.inner;
  pc.joint = c.joint;
  const auto report = price_report(model, parse_payoff(c.payoff), c.strikes, pc, c.seed);
  ExperimentResult r;
  std::ostringstream prices, draws;
  write_csv(prices, report);
  write_draws_csv(draws, report.conditional);
  r.files.emplace_back("prices.csv", prices.str());
  r.files.emplace_back("draws.csv", draws.str());
  if (!report.conditional.oracle.empty()) {
    r.checks.push_back(make_check("oracle_pass_fraction", report.pass_fraction, ">=", 0.95));
    r.checks.push_back(make_check("oracle_monotone", report.oracle_monotone ? 1.0 : 0.0, "==", 1.0));
  }
  r.checks.push_back(make_check("tower_max_abs_z", report.max_tower_z, "<=", 3.0));
  return r;
}

// ----------------------------------------------------------------- meanfield

double decoupled_reduction_gap(const ExperimentConfig& c, const MkvSpec& spec) {
  RsdeSpec single;
  single.drift = [&spec](double, Span x, const DriverView&, Out o) { spec.drift(x, {}, o); };
  single.brownian = [&spec](double, Span x, const DriverView&, Out o) { spec.brownian(x, {}, o); };
  single.rough = [&spec](double, Span x, const DriverView&, Out o) { spec.rough(x, {}, o); };
  const auto grid = make_grid(c.horizon, static_cast<std::int64_t>(c.levels.back()));
  const auto rp = sample_bm_lift(1, grid, c.fine_factor, derive_seed(c.seed, "reduction-driver"),
                                 LiftConvention::ito, c.alpha);
  const auto seeds = particle_seeds(derive_seed(c.seed, "reduction"), c.particles.front());
  const auto ens = solve_mkv_rsde_particles(spec, rp, seeds, c.fine_factor);
  double worst = 0.0;
  for (std::size_t p = 0; p < seeds.size(); ++p) {
    Rng rng(seeds[p]);
    double x0[1];
    spec.initial(rng, x0);
    const auto bm = sample_brownian(grid.refine(c.fine_factor), 1, derive_seed(seeds[p], "brownian"));
    const auto sol = solve_rsde(single, rp, bm, x0);
    for (std::size_t i = 0; i < grid.nodes(); ++i)
      worst = std::max(worst, std::abs(ens.particle(i, p)[0] - sol.state(i)[0]));
  }
  return worst;
}

ExperimentResult meanfield(const ExperimentConfig& c) {
  const auto spec = mkv_model(c.preset, c.model);
  MkvCheckConfig mc;
  mc.particle_ladder = c.particles;
  mc.mesh_ladder = c.levels;
  mc.outer = c.outer;
  mc.fine_factor = c.fine_factor;
  mc.horizon = c.horizon;
  const auto check = conditional_mkv_check(spec, mc, c.seed);
  ExperimentResult r;
  std::ostringstream table, draws;
  write_csv(table, check.table);
  draws << "ladder,level,draw,w1\n";
  for (std::size_t l = 0; l < check.w1_particles.size(); ++l)
    for (std::size_t k = 0; k < check.w1_particles[l].size(); ++k)
      draws << "particles," << c.particles[l] << ',' << k << ',' << format_double(check.w1_particles[l][k]) << '\n';
  for (std::size_t l = 0; l < check.w1_mesh.size(); ++l)
    for (std::size_t k = 0; k < check.w1_mesh[l].size(); ++k)
      draws << "mesh," << c.levels[l] << ',' << k << ',' << format_double(check.w1_mesh[l][k]) << '\n';
  r.files.emplace_back("w1.csv", table.str());
  r.files.emplace_back("w1_draws.csv", draws.str());
  if (c.preset == "mkv-decoupled") {
    r.checks.push_back(make_check("decoupled_reduction_max_abs_diff", decoupled_reduction_gap(c, spec), "==", 0.0));
  } else {
    const auto w = check.table.values("median_w1_particles");
    r.checks.push_back(make_check("median_w1_ratio", w.back() / w.front(), "<=", 0.5));
  }
  return r;
}

}  // namespace

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::string& ExperimentResult::file(const std::string& name) const {
  for (const auto& [n, content] : files)
    if (n == name) return content;
  throw std::out_of_range("no output file '" + name + "'");
}

const Check& ExperimentResult::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no check '" + name + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto& k = cfg.kind;
  if (k == "lift-stats") return lift_stats(cfg);
  if (k == "integrate") return integrate(cfg);
  if (k == "solve-rsde") return cfg.preset.starts_with("geometric") ? geometric_study(cfg) : single_solve(cfg);
  if (k == "randomise-pathwise") return randomise_pathwise(cfg);
  if (k == "randomise-law") return randomise_law(cfg);
  if (k == "filter") return filter(cfg);
  if (k == "price") return price(cfg);
  if (k == "meanfield") return meanfield(cfg);
  throw ConfigError("unknown experiment kind '" + k + "'");
}

std::string summary_text(const ExperimentResult& result) {
  std::ostringstream out;
  for (const auto& c : result.checks)
    out << (c.pass ? "PASS " : "FAIL ") << c.name << ' ' << format_double(c.value) << ' ' << c.relation << ' '
        << format_double(c.threshold) << '\n';
  out << "result " << (result.passed() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

void write_outputs(const std::string& dir, const ExperimentConfig& cfg, const ExperimentResult& result,
                   std::size_t threads, double wall_seconds) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
  };
  put("config.ini", to_ini(cfg));
  for (const auto& [name, content] : result.files) put(name, content);
  std::ostringstream manifest;
  manifest << "roughkit_version = " << ROUGHKIT_VERSION << "\nkind = " << cfg.kind << "\npreset = " << cfg.preset
           << "\nseed = " << cfg.seed << "\nthreads = " << threads << "\nwall_time_seconds = "
           << format_double(wall_seconds) << "\nfiles =";
  for (const auto& f : result.files) manifest << ' ' << f.first;
  manifest << "\n\n" << to_ini(cfg);
  put("manifest.txt", manifest.str());
  put("summary.txt", summary_text(result));
}

}  // namespace roughkit::runner
