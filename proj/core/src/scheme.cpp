#include "roughkit/scheme.hpp"

namespace roughkit::scheme {

void compose_gubbins(std::size_t dx, std::size_t dy, std::span<const double> f,
                     std::span<const double> jac, std::span<const double> explicit_gubbins,
                     std::span<double> out) {
  for (std::size_t k = 0; k < dx; ++k)
    for (std::size_t a = 0; a < dy; ++a)
      for (std::size_t b = 0; b < dy; ++b) {
        double s = 0.0;
        for (std::size_t m = 0; m < dx; ++m) s += jac[(k * dy + b) * dx + m] * f[m * dy + a];
        if (!explicit_gubbins.empty()) s += explicit_gubbins[(k * dy + a) * dy + b];
        out[(k * dy + a) * dy + b] = s;
      }
}

void rough_increment(std::size_t dx, std::size_t dy, std::span<const double> f,
                     std::span<const double> fprime, std::span<const double> dy_inc,
                     std::span<const double> area, std::span<double> out) {
  for (std::size_t k = 0; k < dx; ++k) {
    double first = 0.0, second = 0.0;
    for (std::size_t b = 0; b < dy; ++b) first += f[k * dy + b] * dy_inc[b];
    for (std::size_t ab = 0; ab < dy * dy; ++ab) second += fprime[k * dy * dy + ab] * area[ab];
    out[k] = first + second;
  }
}

void euler_step(std::span<double> x, std::span<const double> b, std::span<const double> sigma,
                double dt, std::span<const double> dB) {
  const std::size_t db = dB.size();
  for (std::size_t k = 0; k < x.size(); ++k) {
    double noise = 0.0;
    for (std::size_t j = 0; j < db; ++j) noise += sigma[k * db + j] * dB[j];
    x[k] += b[k] * dt + noise;
  }
}

void add_rough(std::span<double> x, std::span<const double> r) {
  for (std::size_t k = 0; k < x.size(); ++k) x[k] += r[k];
}

bool diverged(std::span<const double> x, double bound) {
  for (double v : x)
    if (!std::isfinite(v) || std::abs(v) > bound) return true;
  return false;
}

}  // namespace roughkit::scheme
