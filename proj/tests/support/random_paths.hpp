#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "roughkit/rng.hpp"
#include "roughkit/rough_path.hpp"

namespace roughkit::testing {

// Rough path with Gaussian first-level increments and arbitrary (non-symmetric,
// non-geometric) second-level entries on a random non-uniform grid.
inline RoughPath random_rough_path(Seed seed, std::size_t dim, std::size_t intervals,
                                   double alpha = kDefaultAlpha) {
  Rng rng(seed);
  std::vector<double> times{0.0};
  for (std::size_t i = 0; i < intervals; ++i) times.push_back(times.back() + 0.05 + rng.uniform());
  std::vector<double> first((intervals + 1) * dim), second(intervals * dim * dim);
  for (std::size_t a = 0; a < dim; ++a) first[a] = rng.normal();
  for (std::size_t i = 1; i <= intervals; ++i)
    for (std::size_t a = 0; a < dim; ++a)
      first[i * dim + a] = first[(i - 1) * dim + a] + rng.normal();
  for (auto& x : second) x = rng.normal();
  return RoughPath(TimeGrid(std::move(times)), dim, std::move(first), std::move(second), alpha);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace roughkit::testing
