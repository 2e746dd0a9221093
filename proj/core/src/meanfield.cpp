#include "roughkit/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"
#include "roughkit/scheme.hpp"

namespace roughkit {

MeasureFeature parse_feature(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw PresetViolation("measure feature '" + text + "' needs a parameter");
  const std::string name = text.substr(0, colon), arg = text.substr(colon + 1);
  MeasureFeature f;
  try {
    std::size_t used = 0;
    if (name == "mean" || name == "variance") {
      f.kind = name == "mean" ? FeatureKind::mean : FeatureKind::variance;
      const long c = std::stol(arg, &used);
      if (c < 0) throw std::invalid_argument(arg);
      f.component = static_cast<std::size_t>(c);
    } else if (name == "gaussian_kernel") {
      f.kind = FeatureKind::gaussian_kernel;
      f.bandwidth = std::stod(arg, &used);
    } else {
      throw PresetViolation("measure interaction '" + name + "' is not in the registry (mean, variance, gaussian_kernel)");
    }
    if (used != arg.size()) throw std::invalid_argument(arg);
  } catch (const PresetViolation&) {
    throw;
  } catch (const std::exception&) {
    throw PresetViolation("bad parameter in measure feature '" + text + "'");
  }
  return f;
}

std::string to_string(const MeasureFeature& f) {
  switch (f.kind) {
    case FeatureKind::mean: return "mean:" + std::to_string(f.component);
    case FeatureKind::variance: return "variance:" + std::to_string(f.component);
    case FeatureKind::gaussian_kernel: return "gaussian_kernel:" + format_double(f.bandwidth);
  }
  return "";
}

void validate(const MkvSpec& spec) {
  if (spec.dx == 0 || spec.db == 0 || spec.dy == 0) throw InvalidArgument("MkvSpec: dimensions must be positive");
  if (!spec.drift || !spec.brownian || !spec.rough || !spec.initial)
    throw InvalidArgument("MkvSpec: drift, Brownian and rough coefficients and the initial law are required");
  for (const auto& f : spec.features) {
    if (f.kind != FeatureKind::gaussian_kernel && f.component >= spec.dx)
      throw PresetViolation("MkvSpec: feature " + to_string(f) + " refers to a missing component");
    if (f.kind == FeatureKind::gaussian_kernel && !(f.bandwidth > 0.0 && std::isfinite(f.bandwidth)))
      throw PresetViolation("MkvSpec: kernel bandwidth must be positive");
  }
}

namespace {

double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  return pairwise_sum(terms);
}

double kernel(std::span<const double> points, std::size_t dx, std::size_t i, std::size_t j, double h) {
  double r2 = 0.0;
  for (std::size_t m = 0; m < dx; ++m) {
    const double d = points[i * dx + m] - points[j * dx + m];
    r2 += d * d;
  }
  return std::exp(-r2 / (2.0 * h * h));
}

double column_mean(std::span<const double> points, std::size_t dx, std::size_t n, std::size_t c,
                   std::vector<double>& terms) {
  terms.resize(n);
  for (std::size_t j = 0; j < n; ++j) terms[j] = points[j * dx + c];
  return sorted_sum(terms) / static_cast<double>(n);
}

// D[i][q][a] = sum_{j,m} d phi_{q,i} / d x_{j,m} F_j[m][a].
std::vector<double> feature_directions(const MkvSpec& spec, std::span<const double> points,
                                       std::size_t n, std::span<const double> F) {
  const std::size_t dx = spec.dx, dy = spec.dy, nq = spec.features.size();
  std::vector<double> D(n * nq * dy);
  std::vector<double> terms(n);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t q = 0; q < nq; ++q) {
    const auto& feat = spec.features[q];
    const std::size_t c = feat.component;
    if (feat.kind == FeatureKind::mean || feat.kind == FeatureKind::variance) {
      const double m = feat.kind == FeatureKind::variance ? column_mean(points, dx, n, c, terms) : 0.0;
      for (std::size_t a = 0; a < dy; ++a) {
        terms.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
          const double fj = F[(j * dx + c) * dy + a];
          terms[j] = feat.kind == FeatureKind::mean ? fj : (points[j * dx + c] - m) * fj;
        }
        const double v = (feat.kind == FeatureKind::mean ? inv : 2.0 * inv) * sorted_sum(terms);
        for (std::size_t i = 0; i < n; ++i) D[(i * nq + q) * dy + a] = v;
      }
    } else {
      const double h2 = feat.bandwidth * feat.bandwidth;
      parallel_for(n, [&](std::size_t i) {
        std::vector<double> local(n);
        for (std::size_t a = 0; a < dy; ++a) {
          for (std::size_t j = 0; j < n; ++j) {
            const double k = kernel(points, dx, i, j, feat.bandwidth);
            double dot = 0.0;
            for (std::size_t m = 0; m < dx; ++m)
              dot += -(points[i * dx + m] - points[j * dx + m]) / h2 * k *
                     (F[(i * dx + m) * dy + a] - F[(j * dx + m) * dy + a]);
            local[j] = dot;
          }
          D[(i * nq + q) * dy + a] = inv * sorted_sum(local);
        }
      });
    }
  }
  return D;
}

void check_seeds(std::span<const Seed> seeds) {
  if (seeds.size() < 2) throw InvalidArgument("particle system: at least two particles are required");
}

void initial_states(const MkvSpec& spec, std::span<const Seed> seeds, std::span<double> x) {
  for (std::size_t p = 0; p < seeds.size(); ++p) {
    Rng rng(seeds[p]);
    spec.initial(rng, x.subspan(p * spec.dx, spec.dx));
  }
}

void check_divergence(const MkvSpec& spec, std::span<const double> x, std::size_t step, double t,
                      const char* who) {
  if (scheme::diverged(x, spec.divergence_bound))
    throw DivergenceError(std::string(who) + ": particles diverged at step " + std::to_string(step), step, t);
}

}  // namespace

std::vector<double> measure_features(const MkvSpec& spec, std::span<const double> points,
                                     std::size_t n) {
  const std::size_t dx = spec.dx, nq = spec.features.size();
  std::vector<double> out(n * nq);
  std::vector<double> terms;
  for (std::size_t q = 0; q < nq; ++q) {
    const auto& feat = spec.features[q];
    if (feat.kind == FeatureKind::gaussian_kernel) {
      parallel_for(n, [&](std::size_t i) {
        std::vector<double> local(n);
        for (std::size_t j = 0; j < n; ++j) local[j] = kernel(points, dx, i, j, feat.bandwidth);
        out[i * nq + q] = sorted_sum(local) / static_cast<double>(n);
      });
      continue;
    }
    const double m = column_mean(points, dx, n, feat.component, terms);
    double v = m;
    if (feat.kind == FeatureKind::variance) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = points[j * dx + feat.component] - m;
        terms[j] = d * d;
      }
      v = sorted_sum(terms) / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) out[i * nq + q] = v;
  }
  return out;
}

std::vector<Seed> particle_seeds(Seed master, std::size_t particles) {
  std::vector<Seed> seeds(particles);
  for (std::size_t p = 0; p < particles; ++p) seeds[p] = derive_seed(master, "particle", {p});
  return seeds;
}

namespace {

Seed brownian_seed(Seed particle_seed) { return derive_seed(particle_seed, "brownian"); }

}  // namespace

ParticleEnsemble simulate_common_noise_particles(const MkvSpec& spec, std::size_t particles,
                                                 const TimeGrid& grid, std::size_t fine_factor,
                                                 Seed seed) {
  if (fine_factor == 0) throw InvalidArgument("simulate_common_noise_particles: fine_factor must be positive");
  const auto common = sample_brownian(grid.refine(fine_factor), spec.dy, derive_seed(seed, "common"));
  return simulate_common_noise_particles(spec, particle_seeds(seed, particles), grid, common);
}

ParticleEnsemble simulate_common_noise_particles(const MkvSpec& spec, std::span<const Seed> seeds,
                                                 const TimeGrid& grid, const BrownianDraw& common) {
  validate(spec);
  check_seeds(seeds);
  if (common.dim != spec.dy) throw IncompatibleOperands("simulate_common_noise_particles: common noise dimension differs from d_Y");
  const std::size_t n = seeds.size(), dx = spec.dx, db = spec.db, dy = spec.dy, nq = spec.features.size();
  const TimeGrid& fine = common.grid;
  if (fine.intervals() % grid.intervals() != 0 || !grid.is_refined_by(fine, fine.intervals() / grid.intervals()))
    throw IncompatibleOperands("simulate_common_noise_particles: noise grid does not refine the grid");
  const std::size_t ff = fine.intervals() / grid.intervals();

  ParticleEnsemble ens{grid, n, dx, std::vector<double>(grid.nodes() * n * dx)};
  std::vector<double> x(n * dx);
  initial_states(spec, seeds, x);
  std::vector<BrownianDraw> noise;
  noise.reserve(n);
  for (std::size_t p = 0; p < n; ++p) noise.push_back(sample_brownian(fine, db, brownian_seed(seeds[p])));
  std::copy(x.begin(), x.end(), ens.states.begin());
  for (std::size_t j = 0; j < fine.intervals(); ++j) {
    const auto phi = measure_features(spec, x, n);
    const double dt = fine.step(j);
    const auto dw = common.increment(j);
    parallel_for(n, [&](std::size_t p) {
      std::vector<double> b(dx), sigma(dx * db), f(dx * dy);
      const std::span<double> xp(x.data() + p * dx, dx);
      const std::span<const double> fp(phi.data() + p * nq, nq);
      spec.drift(xp, fp, b);
      spec.brownian(xp, fp, sigma);
      spec.rough(xp, fp, f);
      // The common-noise term uses the coefficient at the start of the step.
      std::vector<double> r(dx);
      for (std::size_t k = 0; k < dx; ++k) {
        double s = 0.0;
        for (std::size_t a = 0; a < dy; ++a) s += f[k * dy + a] * dw[a];
        r[k] = s;
      }
      scheme::euler_step(xp, b, sigma, dt, noise[p].increment(j));
      scheme::add_rough(xp, r);
    });
    check_divergence(spec, x, j + 1, fine[j + 1], "simulate_common_noise_particles");
    if ((j + 1) % ff == 0) std::copy(x.begin(), x.end(), ens.states.begin() + (j + 1) / ff * n * dx);
  }
  return ens;
}

ParticleEnsemble solve_mkv_rsde_particles(const MkvSpec& spec, const RoughPath& rp,
                                          std::size_t particles, std::size_t fine_factor, Seed seed) {
  return solve_mkv_rsde_particles(spec, rp, particle_seeds(seed, particles), fine_factor);
}

ParticleEnsemble solve_mkv_rsde_particles(const MkvSpec& spec, const RoughPath& rp,
                                          std::span<const Seed> seeds, std::size_t fine_factor) {
  validate(spec);
  check_seeds(seeds);
  if (fine_factor == 0) throw InvalidArgument("solve_mkv_rsde_particles: fine_factor must be positive");
  if (rp.dim() != spec.dy) throw IncompatibleOperands("solve_mkv_rsde_particles: rough path dimension differs from d_Y");
  const std::size_t n = seeds.size(), dx = spec.dx, db = spec.db, dy = spec.dy, nq = spec.features.size();
  const TimeGrid& coarse = rp.grid();
  const TimeGrid fine = coarse.refine(fine_factor);
  const std::size_t N = coarse.intervals();

  ParticleEnsemble ens{coarse, n, dx, std::vector<double>(coarse.nodes() * n * dx)};
  std::vector<double> x(n * dx);
  initial_states(spec, seeds, x);
  std::vector<BrownianDraw> noise;
  noise.reserve(n);
  for (std::size_t p = 0; p < n; ++p) noise.push_back(sample_brownian(fine, db, brownian_seed(seeds[p])));
  std::vector<double> F(n * dx * dy), Fp(n * dx * dy * dy), rough(n * dx), dyv(dy);

  for (std::size_t i = 0;; ++i) {
    std::copy(x.begin(), x.end(), ens.states.begin() + i * n * dx);
    if (i == N) break;
    auto phi = measure_features(spec, x, n);
    parallel_for(n, [&](std::size_t p) {
      spec.rough(std::span<const double>(x.data() + p * dx, dx), std::span<const double>(phi.data() + p * nq, nq),
                 std::span<double>(F.data() + p * dx * dy, dx * dy));
    });
    const auto D = nq > 0 ? feature_directions(spec, x, n, F) : std::vector<double>{};
    const auto y0 = rp.value(i), y1 = rp.value(i + 1);
    for (std::size_t a = 0; a < dy; ++a) dyv[a] = y1[a] - y0[a];
    parallel_for(n, [&](std::size_t p) {
      const std::span<const double> xp(x.data() + p * dx, dx), fp(phi.data() + p * nq, nq);
      const std::span<const double> Fi(F.data() + p * dx * dy, dx * dy);
      const std::span<double> Fpi(Fp.data() + p * dx * dy * dy, dx * dy * dy);
      std::vector<double> jac(dx * dy * dx), scratch(2 * std::max(dx, nq) + 2 * dx * dy);
      scheme::fd_jacobian([&](std::span<const double> xx, std::span<double> out) { spec.rough(xx, fp, out); }, xp,
                          dx * dy, jac, scratch);
      scheme::compose_gubbins(dx, dy, Fi, jac, {}, Fpi);
      if (nq > 0) {
        std::vector<double> jphi(dx * dy * nq);
        scheme::fd_jacobian([&](std::span<const double> pp, std::span<double> out) { spec.rough(xp, pp, out); }, fp,
                            dx * dy, jphi, scratch);
        for (std::size_t k = 0; k < dx; ++k)
          for (std::size_t a = 0; a < dy; ++a)
            for (std::size_t b = 0; b < dy; ++b) {
              double s = 0.0;
              for (std::size_t q = 0; q < nq; ++q) s += jphi[(k * dy + b) * nq + q] * D[(p * nq + q) * dy + a];
              Fpi[(k * dy + a) * dy + b] += s;
            }
      }
      scheme::rough_increment(dx, dy, Fi, Fpi, dyv, rp.area(i), std::span<double>(rough.data() + p * dx, dx));
    });
    for (std::size_t j = i * fine_factor; j < (i + 1) * fine_factor; ++j) {
      if (j > i * fine_factor) phi = measure_features(spec, x, n);
      const double dt = fine.step(j);
      parallel_for(n, [&](std::size_t p) {
        std::vector<double> b(dx), sigma(dx * db);
        const std::span<double> xp(x.data() + p * dx, dx);
        const std::span<const double> fp(phi.data() + p * nq, nq);
        spec.drift(xp, fp, b);
        spec.brownian(xp, fp, sigma);
        scheme::euler_step(xp, b, sigma, dt, noise[p].increment(j));
      });
    }
    for (std::size_t p = 0; p < n; ++p)
      scheme::add_rough(std::span<double>(x.data() + p * dx, dx), std::span<const double>(rough.data() + p * dx, dx));
    check_divergence(spec, x, i + 1, coarse[i + 1], "solve_mkv_rsde_particles");
  }
  return ens;
}

double terminal_distance(const ParticleEnsemble& a, const ParticleEnsemble& b, Seed projection_seed) {
  if (a.dx != b.dx) throw IncompatibleOperands("terminal_distance: dimensions differ");
  return sliced_wasserstein1(a.at(a.grid.intervals()), b.at(b.grid.intervals()), a.dx, 32, projection_seed);
}

MkvCheck conditional_mkv_check(const MkvSpec& spec, const MkvCheckConfig& cfg, Seed seed) {
  validate(spec);
  if (cfg.particle_ladder.size() < 2 || cfg.mesh_ladder.size() < 2)
    throw InvalidArgument("conditional_mkv_check: ladders need at least two levels");
  if (cfg.outer == 0 || cfg.fine_factor == 0) throw InvalidArgument("conditional_mkv_check: outer and fine_factor must be positive");
  const std::size_t finest = *std::max_element(cfg.mesh_ladder.begin(), cfg.mesh_ladder.end());
  const std::size_t largest = *std::max_element(cfg.particle_ladder.begin(), cfg.particle_ladder.end());
  const std::size_t fine_n = finest * cfg.fine_factor;
  for (std::size_t level : cfg.mesh_ladder)
    if (level == 0 || fine_n % level != 0) throw InvalidArgument("conditional_mkv_check: mesh levels must divide the finest level");
  const TimeGrid fine = make_grid(cfg.horizon, static_cast<std::int64_t>(fine_n));
  const Seed projections = derive_seed(seed, "projections");

  MkvCheck out;
  out.w1_particles.assign(cfg.particle_ladder.size(), std::vector<double>(cfg.outer));
  out.w1_mesh.assign(cfg.mesh_ladder.size(), std::vector<double>(cfg.outer));
  for (std::size_t k = 0; k < cfg.outer; ++k) {
    const auto W = sample_brownian(fine, spec.dy, derive_seed(seed, "common", {k}));
    const auto values = brownian_path(W);
    auto route_b = [&](std::size_t level, std::size_t particles) {
      const TimeGrid coarse = make_grid(cfg.horizon, static_cast<std::int64_t>(level));
      const std::size_t ff = fine_n / level;
      const RoughPath rp = lift_fine_path(coarse, ff, spec.dy, values, LiftConvention::ito);
      return solve_mkv_rsde_particles(spec, rp, particles, ff, derive_seed(seed, "route-b", {k, particles, level}));
    };
    const TimeGrid top = make_grid(cfg.horizon, static_cast<std::int64_t>(finest));
    for (std::size_t l = 0; l < cfg.particle_ladder.size(); ++l) {
      const std::size_t N = cfg.particle_ladder[l];
      const auto a = simulate_common_noise_particles(spec, particle_seeds(derive_seed(seed, "route-a", {k, N}), N), top, W);
      out.w1_particles[l][k] = terminal_distance(a, route_b(finest, N), projections);
    }
    const auto a = simulate_common_noise_particles(
        spec, particle_seeds(derive_seed(seed, "route-a", {k, largest}), largest), top, W);
    for (std::size_t l = 0; l < cfg.mesh_ladder.size(); ++l) {
      const std::size_t level = cfg.mesh_ladder[l];
      const auto it = std::find(cfg.particle_ladder.begin(), cfg.particle_ladder.end(), largest);
      out.w1_mesh[l][k] = level == finest ? out.w1_particles[static_cast<std::size_t>(it - cfg.particle_ladder.begin())][k]
                                          : terminal_distance(a, route_b(level, largest), projections);
    }
  }
  for (std::size_t l = 0; l < cfg.particle_ladder.size(); ++l)
    out.table.add(1.0 / static_cast<double>(cfg.particle_ladder[l]), "median_w1_particles", median(out.w1_particles[l]));
  for (std::size_t l = 0; l < cfg.mesh_ladder.size(); ++l)
    out.table.add(cfg.horizon / static_cast<double>(cfg.mesh_ladder[l]), "median_w1_mesh", median(out.w1_mesh[l]));
  for (const char* metric : {"median_w1_particles", "median_w1_mesh"}) {
    const auto s = out.table.scales(metric), v = out.table.values(metric);
    bool positive = true;
    for (double e : v) positive = positive && e > 0.0;
    if (positive) out.table.rates.push_back({metric, fit_rate(s, v)});
  }
  return out;
}

void write_ensemble_csv(std::ostream& out, const ParticleEnsemble& ens) {
  out << "time,particle";
  for (std::size_t k = 0; k < ens.dx; ++k) out << ",x" << k;
  out << '\n';
  for (std::size_t i = 0; i < ens.grid.nodes(); ++i)
    for (std::size_t p = 0; p < ens.particles; ++p) {
      out << format_double(ens.grid[i]) << ',' << p;
      for (double v : ens.particle(i, p)) out << ',' << format_double(v);
      out << '\n';
    }
}

}  // namespace roughkit
