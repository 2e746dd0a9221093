#include "roughkit/lift.hpp"

#include <cmath>
#include <string>

#include "roughkit/errors.hpp"

namespace roughkit {
namespace {

void check_sampled_alpha(double alpha) {
  if (!(alpha > 1.0 / 3.0 && alpha < 0.5))
    throw InvalidArgument("sampled lifts need alpha in (1/3, 1/2), got " + std::to_string(alpha));
}

}  // namespace

BrownianDraw sample_brownian(const TimeGrid& grid, std::size_t dim, Seed seed) {
  if (dim == 0) throw InvalidArgument("sample_brownian: dimension must be positive");
  BrownianDraw draw{grid, dim, std::vector<double>(grid.intervals() * dim), seed};
  Rng rng(seed);
  for (std::size_t k = 0; k < grid.intervals(); ++k) {
    const double sd = std::sqrt(grid.step(k));
    for (std::size_t j = 0; j < dim; ++j) draw.increments[k * dim + j] = sd * rng.normal();
  }
  return draw;
}

std::vector<double> brownian_path(const BrownianDraw& draw) {
  const std::size_t d = draw.dim, n = draw.grid.intervals();
  std::vector<double> path((n + 1) * d, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < d; ++j)
      path[(k + 1) * d + j] = path[k * d + j] + draw.increments[k * d + j];
  return path;
}

RoughPath lift_fine_path(const TimeGrid& coarse, std::size_t fine_factor, std::size_t dim,
                         std::span<const double> fine_values, LiftConvention convention,
                         double alpha) {
  if (fine_factor == 0) throw InvalidArgument("lift_fine_path: fine_factor must be positive");
  const std::size_t n = coarse.intervals(), d = dim;
  if (fine_values.size() != (n * fine_factor + 1) * d)
    throw InvalidArgument("lift_fine_path: expected (N * fine_factor + 1) * d fine values");
  std::vector<double> first((n + 1) * d), second(n * d * d, 0.0);
  std::vector<double> rel(d), dy(d);
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t a = 0; a < d; ++a) first[i * d + a] = fine_values[i * fine_factor * d + a];
  for (std::size_t i = 0; i < n; ++i) {
    const double* start = &fine_values[i * fine_factor * d];
    double* area = &second[i * d * d];
    for (std::size_t k = i * fine_factor; k < (i + 1) * fine_factor; ++k) {
      for (std::size_t a = 0; a < d; ++a) {
        dy[a] = fine_values[(k + 1) * d + a] - fine_values[k * d + a];
        rel[a] = fine_values[k * d + a] - start[a];
        if (convention == LiftConvention::stratonovich) rel[a] += 0.5 * dy[a];
      }
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) area[a * d + b] += rel[a] * dy[b];
    }
  }
  return RoughPath(coarse, d, std::move(first), std::move(second), alpha);
}

RoughPath lift_smooth(const std::function<std::vector<double>(double)>& path, const TimeGrid& grid,
                      std::size_t quadrature_points, double alpha) {
  if (quadrature_points < 2) throw InvalidArgument("lift_smooth: need at least 2 quadrature points");
  const TimeGrid fine = grid.refine(quadrature_points);
  std::vector<double> values;
  std::size_t dim = 0;
  for (std::size_t k = 0; k < fine.nodes(); ++k) {
    const auto y = path(fine[k]);
    if (k == 0) {
      dim = y.size();
      if (dim == 0) throw InvalidArgument("lift_smooth: path must be at least one-dimensional");
      values.reserve(fine.nodes() * dim);
    } else if (y.size() != dim) {
      throw InvalidArgument("lift_smooth: path changed dimension");
    }
    values.insert(values.end(), y.begin(), y.end());
  }
  return lift_fine_path(grid, quadrature_points, dim, values, LiftConvention::stratonovich, alpha);
}

BrownianLift sample_bm_lift_with_noise(std::size_t dim, const TimeGrid& grid,
                                       std::size_t fine_factor, Seed seed,
                                       LiftConvention convention, double alpha) {
  check_sampled_alpha(alpha);
  if (fine_factor == 0) throw InvalidArgument("sample_bm_lift: fine_factor must be positive");
  BrownianDraw noise = sample_brownian(grid.refine(fine_factor), dim, seed);
  const auto values = brownian_path(noise);
  RoughPath path = lift_fine_path(grid, fine_factor, dim, values, convention, alpha);
  return {std::move(path), std::move(noise)};
}

RoughPath sample_bm_lift(std::size_t dim, const TimeGrid& grid, std::size_t fine_factor, Seed seed,
                         LiftConvention convention, double alpha) {
  return sample_bm_lift_with_noise(dim, grid, fine_factor, seed, convention, alpha).path;
}

void ito_diffusion_step(const ItoDiffusionSpec& spec, double t, double dt,
                        std::span<const double> dw, std::span<double> state,
                        std::span<double> beta, std::span<double> gamma) {
  const std::size_t d = spec.dim, m = spec.driving_dim;
  spec.drift(t, state, beta);
  spec.diffusion(t, state, gamma);
  for (std::size_t k = 0; k < d; ++k) {
    double noise = 0.0;
    for (std::size_t j = 0; j < m; ++j) noise += gamma[k * m + j] * dw[j];
    state[k] = state[k] + beta[k] * dt + noise;
  }
}

DiffusionLift lift_ito_diffusion(const ItoDiffusionSpec& spec, const TimeGrid& grid,
                                 std::size_t fine_factor, Seed seed, double alpha) {
  check_sampled_alpha(alpha);
  if (spec.initial.size() != spec.dim || spec.dim == 0 || spec.driving_dim == 0)
    throw InvalidArgument("lift_ito_diffusion: inconsistent diffusion dimensions");
  if (!spec.drift || !spec.diffusion) throw InvalidArgument("lift_ito_diffusion: missing coefficients");
  BrownianDraw noise = sample_brownian(grid.refine(fine_factor), spec.driving_dim, seed);
  const TimeGrid& fine = noise.grid;
  const std::size_t d = spec.dim;
  std::vector<double> states(fine.nodes() * d);
  std::vector<double> state(spec.initial), beta(d), gamma(d * spec.driving_dim);
  std::copy(state.begin(), state.end(), states.begin());
  for (std::size_t k = 0; k < fine.intervals(); ++k) {
    ito_diffusion_step(spec, fine[k], fine.step(k), noise.increment(k), state, beta, gamma);
    std::copy(state.begin(), state.end(), states.begin() + (k + 1) * d);
  }
  RoughPath path = lift_fine_path(grid, fine_factor, d, states, LiftConvention::ito, alpha);
  return {std::move(path), std::move(noise), std::move(states)};
}

}  // namespace roughkit
