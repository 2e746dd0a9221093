#include "roughkit/rough_integral.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"

namespace roughkit {

ControlledPath::ControlledPath(TimeGrid grid, std::size_t dx, std::size_t dy,
                               std::vector<double> gartner, std::vector<double> gubbins)
    : grid_(std::move(grid)), dx_(dx), dy_(dy), gartner_(std::move(gartner)),
      gubbins_(std::move(gubbins)) {
  if (dx_ == 0 || dy_ == 0) throw InvalidArgument("ControlledPath: dimensions must be positive");
  if (gartner_.size() != grid_.nodes() * dx_ * dy_)
    throw InvalidArgument("ControlledPath: F needs (N+1) * dx * dy entries");
  if (gubbins_.size() != grid_.nodes() * dx_ * dy_ * dy_)
    throw InvalidArgument("ControlledPath: F' needs (N+1) * dx * dy * dy entries");
}

ControlledPath make_controlled(const RoughPath& path, std::size_t dx, const ControlledFunction& fn) {
  const std::size_t dy = path.dim(), n = path.grid().nodes();
  std::vector<double> f(n * dx * dy, 0.0), fp(n * dx * dy * dy, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    fn(path.grid()[i], path.value(i), std::span<double>(f.data() + i * dx * dy, dx * dy),
       std::span<double>(fp.data() + i * dx * dy * dy, dx * dy * dy));
  return ControlledPath(path.grid(), dx, dy, std::move(f), std::move(fp));
}

ControlledPath self_integrand(const RoughPath& path) {
  const std::size_t d = path.dim();
  return make_controlled(path, d * d,
                         [d](double, std::span<const double> y, std::span<double> f,
                             std::span<double> fp) {
                           for (std::size_t a = 0; a < d; ++a)
                             for (std::size_t c = 0; c < d; ++c) {
                               const std::size_t row = a * d + c;
                               f[row * d + c] = y[a];
                               fp[(row * d + a) * d + c] = 1.0;
                             }
                         });
}

namespace {

void check_pair(const ControlledPath& cp, const RoughPath& path) {
  if (cp.dy() != path.dim())
    throw IncompatibleOperands("controlled path and rough path have different d_Y");
  if (!(cp.grid() == path.grid()))
    throw IncompatibleOperands("controlled path and rough path live on different grids");
}

// F_u dY_{u,v} + F'_u : YY_{u,v}, accumulated into out.
void add_davie_term(const ControlledPath& cp, const RoughPath& path, std::size_t u, std::size_t v,
                    std::span<double> out) {
  const std::size_t dx = cp.dx(), dy = cp.dy();
  const auto y0 = path.value(u), y1 = path.value(v);
  const auto f = cp.gartner(u), fp = cp.gubbins(u);
  std::vector<double> area;
  std::span<const double> yy;
  if (v == u + 1) {
    yy = path.area(u);
  } else {
    area = chen_increment(path, u, v).second;
    yy = area;
  }
  for (std::size_t k = 0; k < dx; ++k) {
    double first = 0.0, second = 0.0;
    for (std::size_t b = 0; b < dy; ++b) first += f[k * dy + b] * (y1[b] - y0[b]);
    for (std::size_t ab = 0; ab < dy * dy; ++ab) second += fp[k * dy * dy + ab] * yy[ab];
    out[k] += first + second;
  }
}

}  // namespace

std::vector<double> controlled_remainder(const ControlledPath& cp, const RoughPath& path,
                                         std::size_t i, std::size_t j) {
  check_pair(cp, path);
  if (i >= j || j >= path.grid().nodes())
    throw InvalidArgument("controlled_remainder: need i < j <= N");
  const std::size_t dx = cp.dx(), dy = cp.dy();
  const auto fs = cp.gartner(i), ft = cp.gartner(j), fp = cp.gubbins(i);
  const auto ys = path.value(i), yt = path.value(j);
  std::vector<double> r(dx * dy);
  for (std::size_t k = 0; k < dx; ++k)
    for (std::size_t b = 0; b < dy; ++b) {
      double lin = 0.0;
      for (std::size_t a = 0; a < dy; ++a) lin += fp[(k * dy + a) * dy + b] * (yt[a] - ys[a]);
      r[k * dy + b] = (ft[k * dy + b] - fs[k * dy + b]) - lin;
    }
  return r;
}

std::vector<double> davie_sum(const ControlledPath& cp, const RoughPath& path,
                              std::span<const std::size_t> partition) {
  check_pair(cp, path);
  if (partition.size() < 2) throw InvalidArgument("davie_sum: partition needs at least two points");
  if (partition.back() >= path.grid().nodes())
    throw InvalidArgument("davie_sum: partition point beyond the grid");
  for (std::size_t q = 0; q + 1 < partition.size(); ++q)
    if (partition[q] >= partition[q + 1])
      throw InvalidArgument("davie_sum: partition must be strictly increasing");
  std::vector<double> out(cp.dx(), 0.0);
  for (std::size_t q = 0; q + 1 < partition.size(); ++q)
    add_davie_term(cp, path, partition[q], partition[q + 1], out);
  return out;
}

RoughIntegral rough_integral(const ControlledPath& cp, const RoughPath& path, std::size_t i,
                             std::size_t j) {
  if (i >= j) throw InvalidArgument("rough_integral: need i < j");
  RoughIntegral result;
  for (std::size_t stride = 1;; stride *= 2) {
    std::vector<std::size_t> partition;
    for (std::size_t u = i; u < j; u += stride) partition.push_back(u);
    partition.push_back(j);
    double mesh = 0.0;
    for (std::size_t q = 0; q + 1 < partition.size(); ++q)
      mesh = std::max(mesh, path.grid()[partition[q + 1]] - path.grid()[partition[q]]);
    result.refinement.push_back({stride, mesh, davie_sum(cp, path, partition)});
    if (stride >= j - i) break;
  }
  result.value = result.refinement.front().value;
  return result;
}

std::vector<double> cumulative_integral(const ControlledPath& cp, const RoughPath& path) {
  check_pair(cp, path);
  const std::size_t dx = cp.dx(), n = path.intervals();
  std::vector<double> out((n + 1) * dx, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(out.begin() + i * dx, dx, out.begin() + (i + 1) * dx);
    add_davie_term(cp, path, i, i + 1, std::span<double>(out.data() + (i + 1) * dx, dx));
  }
  return out;
}

namespace {

double frobenius(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

void check_ensemble(const ControlledEnsemble& ens) {
  if (ens.samples.size() < 2) throw InsufficientData("need at least two samples");
  if (ens.drivers.size() != 1 && ens.drivers.size() != ens.samples.size())
    throw InvalidArgument("ensemble needs one shared driver or one driver per sample");
  const auto& first = ens.samples.front();
  for (std::size_t k = 0; k < ens.samples.size(); ++k) {
    const auto& s = ens.samples[k];
    if (s.dx() != first.dx() || s.dy() != first.dy() || !(s.grid() == first.grid()))
      throw IncompatibleOperands("ensemble samples differ in grid or shape");
    check_pair(s, ens.driver(k));
  }
}

// alpha-Hölder L^p seminorm plus sup of L^p norms for a per-node field.
template <class Field>
double lp_holder_norm(const ControlledEnsemble& ens, Field field, std::size_t width, double alpha,
                      double p) {
  const std::size_t m = ens.samples.size();
  const auto& grid = ens.samples.front().grid();
  const std::size_t n = grid.nodes();
  std::vector<double> diff(width);
  double sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) acc += std::pow(frobenius(field(ens.samples[k], i)), p);
    sup = std::max(sup, std::pow(acc / static_cast<double>(m), 1.0 / p));
  }
  double holder = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const auto a = field(ens.samples[k], i), b = field(ens.samples[k], j);
        for (std::size_t q = 0; q < width; ++q) diff[q] = b[q] - a[q];
        acc += std::pow(frobenius(diff), p);
      }
      const double norm = std::pow(acc / static_cast<double>(m), 1.0 / p);
      holder = std::max(holder, norm / std::pow(grid[j] - grid[i], alpha));
    }
  return sup + holder;
}

}  // namespace

SeminormReport estimate_fatnorm(const ControlledEnsemble& ens, double alpha, double p) {
  check_ensemble(ens);
  if (!(p >= 2.0)) throw InvalidArgument("estimate_fatnorm: p must be at least 2");
  if (!(alpha > 0.0 && alpha <= 0.5)) throw InvalidArgument("estimate_fatnorm: alpha out of range");
  const auto& head = ens.samples.front();
  const std::size_t dx = head.dx(), dy = head.dy(), m = ens.samples.size();
  const auto& grid = head.grid();

  SeminormReport report;
  report.p = p;
  report.alpha = alpha;
  report.f_norm = lp_holder_norm(
      ens, [](const ControlledPath& c, std::size_t i) { return c.gartner(i); }, dx * dy, alpha, p);
  report.fprime_norm = lp_holder_norm(
      ens, [](const ControlledPath& c, std::size_t i) { return c.gubbins(i); }, dx * dy * dy, alpha,
      p);

  const std::size_t n = grid.nodes();
  double rem = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      std::vector<double> mean(dx * dy, 0.0);
      for (std::size_t k = 0; k < m; ++k) {
        const auto r = controlled_remainder(ens.samples[k], ens.driver(k), i, j);
        for (std::size_t q = 0; q < mean.size(); ++q) mean[q] += r[q];
      }
      for (auto& v : mean) v /= static_cast<double>(m);
      rem = std::max(rem, frobenius(mean) / std::pow(grid[j] - grid[i], 2.0 * alpha));
    }
  report.conditional_remainder_norm = rem;
  report.fatnorm_total = report.f_norm + report.fprime_norm + report.conditional_remainder_norm;
  return report;
}

void write_report(std::ostream& out, const SeminormReport& r) {
  out << "p=" << format_double(r.p) << '\n'
      << "alpha=" << format_double(r.alpha) << '\n'
      << "f_norm=" << format_double(r.f_norm) << '\n'
      << "fprime_norm=" << format_double(r.fprime_norm) << '\n'
      << "conditional_remainder_norm=" << format_double(r.conditional_remainder_norm) << '\n'
      << "fatnorm_total=" << format_double(r.fatnorm_total) << '\n';
}

MomentCheck increment_moment_check(const ControlledEnsemble& ens, double p, double alpha) {
  check_ensemble(ens);
  if (!(p >= 1.0)) throw InvalidArgument("increment_moment_check: p must be at least 1");
  const std::size_t m = ens.samples.size(), dx = ens.samples.front().dx();
  const auto& grid = ens.samples.front().grid();
  const std::size_t n = grid.intervals();

  std::vector<std::vector<double>> integrals(m);
  parallel_for(m, [&](std::size_t k) {
    integrals[k] = cumulative_integral(ens.samples[k], ens.driver(k));
  });

  MomentCheck check;
  check.exponent_warning = alpha * p <= 1.0;
  std::vector<double> diff(dx), ratios;
  for (std::size_t lo = 1; lo <= n; lo *= 2) {
    const std::size_t hi = std::min(2 * lo, n + 1);
    double best = 0.0, scale = grid.horizon();
    for (std::size_t len = lo; len < hi; ++len)
      for (std::size_t i = 0; i + len <= n; ++i) {
        const std::size_t j = i + len;
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          for (std::size_t q = 0; q < dx; ++q)
            diff[q] = integrals[k][j * dx + q] - integrals[k][i * dx + q];
          acc += std::pow(frobenius(diff), p);
        }
        const double h = grid[j] - grid[i];
        scale = std::min(scale, h);
        best = std::max(best, std::pow(acc / static_cast<double>(m), 1.0 / p) / std::pow(h, alpha));
      }
    check.table.add(scale, "moment_ratio", best);
    ratios.push_back(best);
  }
  check.median_ratio = median(ratios);
  check.bounded = std::all_of(ratios.begin(), ratios.end(), [&](double r) {
    return r <= 2.0 * check.median_ratio && 2.0 * r >= check.median_ratio;
  });
  return check;
}

}  // namespace roughkit
