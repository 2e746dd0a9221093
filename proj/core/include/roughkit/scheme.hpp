#pragma once

// Building blocks of the one-step rough scheme. The RSDE solver and the
// particle solver both go through these, so a particle with
// measure-independent coefficients reproduces a single solve bit for bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace roughkit::scheme {

inline double fd_step(double x) noexcept {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::abs(x));
}

// Central differences in x of a field with `width` outputs: out[q][m] for
// output q and coordinate m. `scratch` needs 2 * x.size() + 2 * width entries.
template <class Field>
void fd_jacobian(Field&& field, std::span<const double> x, std::size_t width,
                 std::span<double> out, std::span<double> scratch) {
  const std::size_t n = x.size();
  auto xp = scratch.subspan(0, n), xm = scratch.subspan(n, n);
  auto fp = scratch.subspan(2 * n, width), fm = scratch.subspan(2 * n + width, width);
  std::copy(x.begin(), x.end(), xp.begin());
  std::copy(x.begin(), x.end(), xm.begin());
  for (std::size_t m = 0; m < n; ++m) {
    const double h = fd_step(x[m]);
    xp[m] = x[m] + h;
    xm[m] = x[m] - h;
    field(std::span<const double>(xp), fp);
    field(std::span<const double>(xm), fm);
    const double width_m = xp[m] - xm[m];
    for (std::size_t q = 0; q < width; ++q) out[q * n + m] = (fp[q] - fm[q]) / width_m;
    xp[m] = x[m];
    xm[m] = x[m];
  }
}

// F'[k][a][b] = sum_m Df[k][b][m] f[m][a] (+ explicit[k][a][b] when given).
void compose_gubbins(std::size_t dx, std::size_t dy, std::span<const double> f,
                     std::span<const double> jac, std::span<const double> explicit_gubbins,
                     std::span<double> out);

// out[k] = sum_b F[k][b] dY^b + sum_{a,b} F'[k][a][b] YY^{ab}.
void rough_increment(std::size_t dx, std::size_t dy, std::span<const double> f,
                     std::span<const double> fprime, std::span<const double> dy_inc,
                     std::span<const double> area, std::span<double> out);

// x[k] += b[k] dt + sum_j sigma[k][j] dB^j.
void euler_step(std::span<double> x, std::span<const double> b, std::span<const double> sigma,
                double dt, std::span<const double> dB);

// x[k] += r[k].
void add_rough(std::span<double> x, std::span<const double> r);

bool diverged(std::span<const double> x, double bound);

}  // namespace roughkit::scheme
