#include "roughkit/randomise.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"
#include "roughkit/scheme.hpp"

namespace roughkit {

void validate(const RandomisationExperiment& exp) {
  if (!exp.rsde.causal) throw InvalidArgument("randomisation needs a causal RSDE");
  if (!exp.rsde.drift || !exp.rsde.brownian || !exp.rsde.rough)
    throw InvalidArgument("randomisation: RSDE coefficients are missing");
  if (exp.x0.size() != exp.rsde.dx) throw InvalidArgument("randomisation: x0 has the wrong dimension");
  if (exp.intervals == 0 || exp.fine_factor == 0 || !(exp.horizon > 0.0))
    throw InvalidArgument("randomisation: grid parameters must be positive");
  if (exp.driver) {
    if (exp.driver->dim != exp.rsde.dy)
      throw IncompatibleOperands("randomisation: driver dimension differs from d_Y");
    if (!exp.driver->drift || !exp.driver->diffusion || exp.driver->initial.size() != exp.driver->dim)
      throw InvalidArgument("randomisation: driver diffusion is incomplete");
  }
}

DriverSample sample_driver(const RandomisationExperiment& exp, Seed outer_seed) {
  validate(exp);
  const TimeGrid coarse = exp.coarse_grid();
  const std::size_t ds = exp.rsde.dy;
  if (!exp.driver) {
    BrownianDraw noise = sample_brownian(coarse.refine(exp.fine_factor), ds, outer_seed);
    auto states = brownian_path(noise);
    const std::size_t nf = noise.grid.intervals();
    std::vector<double> gamma(nf * ds * ds, 0.0);
    for (std::size_t j = 0; j < nf; ++j)
      for (std::size_t a = 0; a < ds; ++a) gamma[(j * ds + a) * ds + a] = 1.0;
    RoughPath lift = lift_fine_path(coarse, exp.fine_factor, ds, states, LiftConvention::ito);
    return {std::move(noise), std::move(states), std::vector<double>(nf * ds, 0.0),
            std::move(gamma), std::move(lift)};
  }
  const auto& spec = *exp.driver;
  auto lifted = lift_ito_diffusion(spec, coarse, exp.fine_factor, outer_seed);
  const std::size_t nf = lifted.noise.grid.intervals(), dw = spec.driving_dim;
  std::vector<double> beta(nf * ds), gamma(nf * ds * dw);
  for (std::size_t j = 0; j < nf; ++j) {
    const std::span<const double> s(lifted.fine_states.data() + j * ds, ds);
    spec.drift(lifted.noise.grid[j], s, std::span<double>(beta.data() + j * ds, ds));
    spec.diffusion(lifted.noise.grid[j], s, std::span<double>(gamma.data() + j * ds * dw, ds * dw));
  }
  return {std::move(lifted.noise), std::move(lifted.fine_states), std::move(beta),
          std::move(gamma), std::move(lifted.path)};
}

BrownianDraw sample_inner_noise(const RandomisationExperiment& exp, Seed inner_seed) {
  return sample_brownian(exp.fine_grid(), exp.rsde.db, inner_seed);
}

SolutionPath randomised_solution(const RandomisationExperiment& exp, const DriverSample& driver,
                                 const BrownianDraw& inner) {
  return solve_rsde(exp.rsde, driver.lift, inner, exp.x0);
}

SolutionPath doubly_stochastic_solution(const RandomisationExperiment& exp,
                                        const DriverSample& driver, const BrownianDraw& inner) {
  const auto& spec = exp.rsde;
  const std::size_t dx = spec.dx, ds = spec.dy, dw = driver.noise.dim, ff = exp.fine_factor;
  const TimeGrid& fine = driver.noise.grid;
  if (!(inner.grid == fine)) throw IncompatibleOperands("doubly stochastic route: noise grids differ");
  const TimeGrid& coarse = driver.lift.grid();
  const std::size_t n = coarse.intervals();

  SolutionPath sol{coarse, dx, ds, std::vector<double>((n + 1) * dx), {}, {}};
  std::vector<double> x(exp.x0), b(dx), sigma(dx * spec.db), f(dx * ds), g(ds);
  std::copy(x.begin(), x.end(), sol.states.begin());
  for (std::size_t j = 0; j < fine.intervals(); ++j) {
    const DriverView view(&fine, driver.fine_states.data(), ds, j);
    const double t = fine[j];
    spec.drift(t, x, view, b);
    spec.brownian(t, x, view, sigma);
    spec.rough(t, x, view, f);
    const double* beta = driver.beta.data() + j * ds;
    const double* gamma = driver.gamma.data() + j * ds * dw;
    const auto dW = driver.noise.increment(j);
    for (std::size_t k = 0; k < dx; ++k) {
      double fb = 0.0;
      for (std::size_t a = 0; a < ds; ++a) fb += f[k * ds + a] * beta[a];
      b[k] += fb;
    }
    for (std::size_t a = 0; a < ds; ++a) {
      double s = 0.0;
      for (std::size_t q = 0; q < dw; ++q) s += gamma[a * dw + q] * dW[q];
      g[a] = s;
    }
    scheme::euler_step(x, b, sigma, fine.step(j), inner.increment(j));
    for (std::size_t k = 0; k < dx; ++k) {
      double s = 0.0;
      for (std::size_t a = 0; a < ds; ++a) s += f[k * ds + a] * g[a];
      x[k] += s;
    }
    if ((j + 1) % ff == 0) {
      const std::size_t node = (j + 1) / ff;
      if (scheme::diverged(x, spec.divergence_bound))
        throw DivergenceError("doubly stochastic route diverged at step " + std::to_string(node),
                              node, coarse[node]);
      std::copy(x.begin(), x.end(), sol.states.begin() + node * dx);
    }
  }
  return sol;
}

SolutionPath randomised_solution(const RandomisationExperiment& exp, Seed outer_seed,
                                 Seed inner_seed) {
  return randomised_solution(exp, sample_driver(exp, outer_seed), sample_inner_noise(exp, inner_seed));
}

SolutionPath doubly_stochastic_solution(const RandomisationExperiment& exp, Seed outer_seed,
                                        Seed inner_seed) {
  return doubly_stochastic_solution(exp, sample_driver(exp, outer_seed),
                                    sample_inner_noise(exp, inner_seed));
}

std::vector<double> CouplingReport::values(const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.metric == metric) out.push_back(r.value);
  return out;
}

CouplingReport pathwise_coupling_report(const RandomisationExperiment& exp,
                                        std::span<const std::size_t> levels, std::size_t samples,
                                        Seed master) {
  validate(exp);
  if (levels.size() < 3) throw InvalidArgument("pathwise_coupling_report: need at least 3 mesh levels");
  if (samples < 2) throw InsufficientData("pathwise_coupling_report: need at least 2 samples");
  const std::size_t finest = *std::max_element(levels.begin(), levels.end()) * exp.fine_factor;
  std::vector<RandomisationExperiment> ladder;
  for (std::size_t n : levels) {
    if (n == 0 || finest % n != 0) throw InvalidArgument("pathwise_coupling_report: levels must divide the fine grid");
    auto e = exp;
    e.intervals = n;
    e.fine_factor = finest / n;
    ladder.push_back(std::move(e));
  }

  const std::size_t finest_level =
      static_cast<std::size_t>(std::max_element(levels.begin(), levels.end()) - levels.begin());
  const std::size_t dx = exp.rsde.dx;
  std::vector<std::vector<double>> sq(levels.size(), std::vector<double>(samples));
  parallel_for(samples, [&](std::size_t s) {
    const Seed outer = derive_seed(master, "outer", {s});
    const Seed inner = derive_seed(master, "inner", {s});
    const auto& top = ladder[finest_level];
    const auto doubly = doubly_stochastic_solution(top, sample_driver(top, outer), sample_inner_noise(top, inner));
    for (std::size_t l = 0; l < ladder.size(); ++l) {
      const auto& e = ladder[l];
      const auto rand = randomised_solution(e, sample_driver(e, outer), sample_inner_noise(e, inner));
      const std::size_t step = top.intervals / e.intervals;
      double sup = 0.0;
      for (std::size_t i = 0; i <= e.intervals; ++i)
        for (std::size_t k = 0; k < dx; ++k)
          sup = std::max(sup, std::abs(rand.state(i)[k] - doubly.state(i * step)[k]));
      sq[l][s] = sup * sup;
    }
  });

  CouplingReport report;
  std::vector<double> mesh, rms;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto summary = summarize(sq[l]);
    const double r = std::sqrt(summary.mean);
    const double h = exp.horizon / static_cast<double>(levels[l]);
    report.rows.push_back({h, "sup_gap", r, r > 0.0 ? summary.std_error / (2.0 * r) : 0.0});
    mesh.push_back(h);
    rms.push_back(r);
  }
  if (std::all_of(rms.begin(), rms.end(), [](double v) { return v > 0.0; }))
    report.rates.push_back({"sup_gap", fit_rate(mesh, rms)});
  return report;
}

CouplingReport conditional_law_report(const RandomisationExperiment& exp,
                                      std::span<const TestFunction> phis, std::size_t outer,
                                      std::size_t inner, Seed master, double p) {
  validate(exp);
  if (outer < 2 || inner < 2) throw InsufficientData("conditional_law_report: need at least 2 outer and 2 inner draws");
  const std::size_t nphi = phis.size(), n = exp.intervals;
  const double mesh = exp.horizon / static_cast<double>(n);

  CouplingReport report;
  report.exponent_warning = kDefaultAlpha * p <= 1.0;
  std::vector<LawCheck> laws(nphi);
  std::vector<std::vector<double>> cond_means(nphi, std::vector<double>(outer));
  for (std::size_t q = 0; q < nphi; ++q) laws[q].name = phis[q].name;

  std::vector<double> rand_vals(inner * nphi), doubly_vals(inner * nphi), column(inner);
  for (std::size_t k = 0; k < outer; ++k) {
    const auto driver = sample_driver(exp, derive_seed(master, "outer", {k}));
    parallel_for(inner, [&](std::size_t m) {
      const auto a = randomised_solution(exp, driver, sample_inner_noise(exp, derive_seed(master, "inner", {k, m})));
      const auto b = doubly_stochastic_solution(
          exp, driver, sample_inner_noise(exp, derive_seed(master, "inner-doubly", {k, m})));
      for (std::size_t q = 0; q < nphi; ++q) {
        rand_vals[m * nphi + q] = phis[q].phi(a.state(n));
        doubly_vals[m * nphi + q] = phis[q].phi(b.state(n));
      }
    });
    for (std::size_t q = 0; q < nphi; ++q) {
      for (std::size_t m = 0; m < inner; ++m) column[m] = rand_vals[m * nphi + q];
      const auto ra = summarize(column);
      for (std::size_t m = 0; m < inner; ++m) column[m] = doubly_vals[m * nphi + q];
      const auto db = summarize(column);
      const double z = z_score(ra.mean, ra.std_error, db.mean, db.std_error);
      laws[q].z.push_back(z);
      cond_means[q][k] = ra.mean;
      report.rows.push_back({mesh, "cond_gap:" + phis[q].name + ":" + std::to_string(k), ra.mean - db.mean,
                             std::hypot(ra.std_error, db.std_error)});
    }
  }

  std::vector<double> joint(inner * nphi);
  parallel_for(inner, [&](std::size_t m) {
    const auto x = doubly_stochastic_solution(exp, derive_seed(master, "joint-outer", {m}),
                                              derive_seed(master, "joint-inner", {m}));
    for (std::size_t q = 0; q < nphi; ++q) joint[m * nphi + q] = phis[q].phi(x.state(n));
  });
  for (std::size_t q = 0; q < nphi; ++q) {
    auto& law = laws[q];
    law.pass_fraction = static_cast<double>(std::count_if(law.z.begin(), law.z.end(),
                                                          [](double z) { return std::abs(z) <= 3.0; })) /
                        static_cast<double>(outer);
    for (std::size_t m = 0; m < inner; ++m) column[m] = joint[m * nphi + q];
    const auto uncond = summarize(column);
    const auto tower = summarize(cond_means[q]);
    law.tower_z = z_score(tower.mean, tower.std_error, uncond.mean, uncond.std_error);
    report.rows.push_back({mesh, "pass_fraction:" + law.name, law.pass_fraction, 0.0});
    report.rows.push_back({mesh, "tower_z:" + law.name, law.tower_z, 0.0});
    report.rows.push_back({mesh, "tower_mean:" + law.name, tower.mean, tower.std_error});
    report.rows.push_back({mesh, "joint_mean:" + law.name, uncond.mean, uncond.std_error});
  }
  report.laws = std::move(laws);
  return report;
}

void write_csv(std::ostream& out, const CouplingReport& report) {
  out << "mesh,metric,value,stderr\n";
  for (const auto& r : report.rows)
    out << format_double(r.mesh) << ',' << r.metric << ',' << format_double(r.value) << ','
        << format_double(r.std_error) << '\n';
  for (const auto& r : report.rates)
    out << "0,rate:" << r.metric << ',' << format_double(r.fit.rate) << ','
        << format_double(r.fit.residual_rms) << '\n';
}

void write_summary(std::ostream& out, const CouplingReport& report) {
  for (const auto& r : report.rates)
    out << "rate " << r.metric << " = " << format_double(r.fit.rate)
        << " (regression residual " << format_double(r.fit.residual_rms) << ")\n";
  for (const auto& law : report.laws)
    out << "phi " << law.name << ": |z| <= 3 for " << format_double(law.pass_fraction)
        << " of outer draws, tower z = " << format_double(law.tower_z) << '\n';
  if (report.exponent_warning) out << "warning: alpha * p <= 1\n";
}

}  // namespace roughkit
