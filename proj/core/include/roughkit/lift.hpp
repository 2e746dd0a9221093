#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "roughkit/rng.hpp"
#include "roughkit/rough_path.hpp"

namespace roughkit {

enum class LiftConvention { ito, stratonovich };

// Independent Gaussian increments N(0, (t_{k+1} - t_k) I) on a grid,
// reproducible from the seed.
struct BrownianDraw {
  TimeGrid grid;
  std::size_t dim = 0;
  std::vector<double> increments;  // intervals x dim
  Seed seed = 0;

  std::span<const double> increment(std::size_t k) const noexcept {
    return {increments.data() + k * dim, dim};
  }
};

BrownianDraw sample_brownian(const TimeGrid& grid, std::size_t dim, Seed seed);

// Cumulative sums of the increments, starting at zero: (intervals + 1) x dim.
std::vector<double> brownian_path(const BrownianDraw& draw);

// Lifts a path known on `coarse.refine(fine_factor)` to a rough path on
// `coarse`: left-point (Itô) or trapezoidal (Stratonovich) Riemann sums of
// (Y - Y_{t_i}) (x) dY over the fine points of each coarse interval.
RoughPath lift_fine_path(const TimeGrid& coarse, std::size_t fine_factor, std::size_t dim,
                         std::span<const double> fine_values, LiftConvention convention,
                         double alpha = kDefaultAlpha);

// Canonical lift of a C^1 path through composite quadrature on
// `quadrature_points` sub-intervals per grid interval (exact for linear paths).
RoughPath lift_smooth(const std::function<std::vector<double>(double)>& path,
                      const TimeGrid& grid, std::size_t quadrature_points,
                      double alpha = 0.5);

struct BrownianLift {
  RoughPath path;
  BrownianDraw noise;  // on grid.refine(fine_factor)
};

// Brownian motion started at zero, simulated on the refined grid and lifted.
// Sampled lifts require alpha < 1/2.
BrownianLift sample_bm_lift_with_noise(std::size_t dim, const TimeGrid& grid,
                                       std::size_t fine_factor, Seed seed,
                                       LiftConvention convention, double alpha = kDefaultAlpha);
RoughPath sample_bm_lift(std::size_t dim, const TimeGrid& grid, std::size_t fine_factor,
                         Seed seed, LiftConvention convention, double alpha = kDefaultAlpha);

// dS = beta(t, S) dt + gamma(t, S) dW with gamma of shape dim x driving_dim.
struct ItoDiffusionSpec {
  std::size_t dim = 1;
  std::size_t driving_dim = 1;
  std::function<void(double, std::span<const double>, std::span<double>)> drift;
  std::function<void(double, std::span<const double>, std::span<double>)> diffusion;
  std::vector<double> initial;
};

// One Euler-Maruyama step in place. `beta` and `gamma` are scratch buffers
// that hold the coefficients at (t, state) on return.
void ito_diffusion_step(const ItoDiffusionSpec& spec, double t, double dt,
                        std::span<const double> dw, std::span<double> state,
                        std::span<double> beta, std::span<double> gamma);

struct DiffusionLift {
  RoughPath path;
  BrownianDraw noise;               // W on the refined grid
  std::vector<double> fine_states;  // S on the refined grid, nodes x dim
};

// Euler-Maruyama on grid.refine(fine_factor), then the Itô lift.
DiffusionLift lift_ito_diffusion(const ItoDiffusionSpec& spec, const TimeGrid& grid,
                                 std::size_t fine_factor, Seed seed,
                                 double alpha = kDefaultAlpha);

}  // namespace roughkit
