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
#include "roughkit/stats.hpp"

namespace roughkit {

// Measure interactions available to coefficients. For particle i of an
// empirical measure mu = (1/N) sum_j delta_{x_j}:
//   mean:            (1/N) sum_j x_j[c]
//   variance:        (1/N) sum_j (x_j[c] - mean)^2
//   gaussian_kernel: (1/N) sum_j exp(-|x_i - x_j|^2 / (2 h^2))
enum class FeatureKind { mean, variance, gaussian_kernel };

struct MeasureFeature {
  FeatureKind kind = FeatureKind::mean;
  std::size_t component = 0;
  double bandwidth = 1.0;
};

// "mean:<c>", "variance:<c>" or "gaussian_kernel:<h>". Anything else raises
// PresetViolation.
MeasureFeature parse_feature(const std::string& text);
std::string to_string(const MeasureFeature& feature);

// out = coefficient(x, features) where `features` holds the spec's feature
// values for the particle at x.
using MkvCoefficient =
    std::function<void(std::span<const double>, std::span<const double>, std::span<double>)>;

struct MkvSpec {
  std::size_t dx = 1;
  std::size_t db = 1;
  std::size_t dy = 1;
  std::vector<MeasureFeature> features;
  MkvCoefficient drift;     // dx
  MkvCoefficient brownian;  // dx x db
  MkvCoefficient rough;     // dx x dy
  std::function<void(Rng&, std::span<double>)> initial;
  double divergence_bound = 1e12;
};

void validate(const MkvSpec& spec);

// Feature values for every particle (particles x features). Sums run over
// sorted terms, so relabelling the particles permutes the rows bit for bit.
std::vector<double> measure_features(const MkvSpec& spec, std::span<const double> points,
                                     std::size_t particles);

struct ParticleEnsemble {
  TimeGrid grid;
  std::size_t particles = 0;
  std::size_t dx = 0;
  std::vector<double> states;  // nodes x particles x dx

  std::span<const double> at(std::size_t node) const noexcept {
    return {states.data() + node * particles * dx, particles * dx};
  }
  std::span<const double> particle(std::size_t node, std::size_t p) const noexcept {
    return {states.data() + (node * particles + p) * dx, dx};
  }
};

// Particle p owns s_p = derive_seed(master, "particle", {p}): its initial state
// is drawn from Rng(s_p) and its Brownian motion from derive_seed(s_p, "brownian").
std::vector<Seed> particle_seeds(Seed master, std::size_t particles);

// Euler-Maruyama of dX^i = b dt + sigma dB^i + f dW on grid.refine(fine_factor)
// with a common W; states are kept on `grid`.
ParticleEnsemble simulate_common_noise_particles(const MkvSpec& spec, std::size_t particles,
                                                 const TimeGrid& grid, std::size_t fine_factor,
                                                 Seed seed);
ParticleEnsemble simulate_common_noise_particles(const MkvSpec& spec, std::span<const Seed> seeds,
                                                 const TimeGrid& grid, const BrownianDraw& common);

// One-step rough scheme for all particles against the frozen rough path, with
// Brownian noise on rp.grid().refine(fine_factor). The second-level
// coefficient of particle i adds the particle-level measure derivative
// sum_j d f_i / d x_j f_j to D_x f f.
ParticleEnsemble solve_mkv_rsde_particles(const MkvSpec& spec, const RoughPath& rp,
                                          std::size_t particles, std::size_t fine_factor, Seed seed);
ParticleEnsemble solve_mkv_rsde_particles(const MkvSpec& spec, const RoughPath& rp,
                                          std::span<const Seed> seeds, std::size_t fine_factor);

// W1 between the terminal laws (sliced over 32 projections when dx > 1).
double terminal_distance(const ParticleEnsemble& a, const ParticleEnsemble& b, Seed projection_seed);

struct MkvCheckConfig {
  std::vector<std::size_t> particle_ladder{100, 1000};
  std::vector<std::size_t> mesh_ladder{32, 64};  // coarse intervals
  std::size_t outer = 20;
  std::size_t fine_factor = 16;  // relative to the finest mesh level
  double horizon = 1.0;
};

// For each outer draw of W: common-noise particles (route A) against the rough
// particle system driven by the Itô lift of W with fresh idiosyncratic noise
// (route B). w1_particles[l][k] is at the finest mesh, w1_mesh[l][k] at the
// largest particle count.
struct MkvCheck {
  ConvergenceTable table;  // median_w1_particles (scale 1/N), median_w1_mesh (scale mesh)
  std::vector<std::vector<double>> w1_particles;
  std::vector<std::vector<double>> w1_mesh;
};
MkvCheck conditional_mkv_check(const MkvSpec& spec, const MkvCheckConfig& cfg, Seed seed);

// CSV: time,particle,x0,x1,...
void write_ensemble_csv(std::ostream& out, const ParticleEnsemble& ensemble);

}  // namespace roughkit
