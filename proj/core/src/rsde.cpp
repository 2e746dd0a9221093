#include "roughkit/rsde.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "roughkit/errors.hpp"
#include "roughkit/scheme.hpp"
#include "roughkit/stats.hpp"

namespace roughkit {

ControlledPath SolutionPath::controlled() const {
  return ControlledPath(grid, dx, dy, gartner, gubbins);
}

namespace {

std::string describe(double t, std::span<const double> x) {
  std::ostringstream out;
  out << "t=" << format_double(t) << ", x=(";
  for (std::size_t k = 0; k < x.size(); ++k) out << (k ? "," : "") << format_double(x[k]);
  out << ')';
  return out.str();
}

template <class Fn>
void guarded(const char* name, double t, std::span<const double> x, Fn&& fn) {
  try {
    fn();
  } catch (const CallbackFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw CallbackFailure(std::string(name) + " failed at " + describe(t, x) + ": " + e.what());
  }
}

std::size_t check_alignment(const RoughPath& rp, const BrownianDraw& bm) {
  const std::size_t n = rp.intervals();
  if (bm.grid.intervals() % n != 0)
    throw IncompatibleOperands("Brownian grid does not refine the rough path grid");
  const std::size_t ff = bm.grid.intervals() / n;
  if (!rp.grid().is_refined_by(bm.grid, ff))
    throw IncompatibleOperands("Brownian grid does not refine the rough path grid");
  return ff;
}

}  // namespace

SolutionPath solve_rsde(const RsdeSpec& spec, const RoughPath& rp, const BrownianDraw& bm,
                        std::span<const double> x0) {
  const std::size_t dx = spec.dx, db = spec.db, dy = spec.dy;
  if (dx == 0 || db == 0 || dy == 0) throw InvalidArgument("solve_rsde: dimensions must be positive");
  if (!spec.drift || !spec.brownian || !spec.rough)
    throw InvalidArgument("solve_rsde: drift, Brownian and rough coefficients are required");
  if (x0.size() != dx) throw InvalidArgument("solve_rsde: initial state has the wrong dimension");
  if (rp.dim() != dy) throw IncompatibleOperands("solve_rsde: rough path dimension differs from d_Y");
  if (bm.dim != db) throw IncompatibleOperands("solve_rsde: Brownian dimension differs from d_B");
  const std::size_t ff = check_alignment(rp, bm);
  const std::size_t n = rp.intervals();
  const TimeGrid& fine = bm.grid;
  const TimeGrid& coarse = rp.grid();

  SolutionPath sol{coarse, dx, dy, std::vector<double>((n + 1) * dx),
                   std::vector<double>((n + 1) * dx * dy), std::vector<double>((n + 1) * dx * dy * dy)};
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> b(dx), sigma(dx * db), jac(dx * dy * dx), explicit_g, rough(dx), dyv(dy);
  std::vector<double> scratch(2 * dx + 2 * dx * dy);
  if (spec.gubbins) explicit_g.resize(dx * dy * dy);
  const DriverView full(&coarse, rp.first_level().data(), dy, n);

  for (std::size_t i = 0;; ++i) {
    const DriverView view = spec.causal ? full.until(i) : full;
    const double t = coarse[i];
    std::copy(x.begin(), x.end(), sol.states.begin() + i * dx);
    std::span<double> f(sol.gartner.data() + i * dx * dy, dx * dy);
    std::span<double> fprime(sol.gubbins.data() + i * dx * dy * dy, dx * dy * dy);
    guarded("rough coefficient", t, x, [&] { spec.rough(t, x, view, f); });
    if (spec.jacobian) {
      guarded("rough coefficient jacobian", t, x, [&] { spec.jacobian(t, x, view, jac); });
    } else {
      guarded("rough coefficient", t, x, [&] {
        scheme::fd_jacobian([&](std::span<const double> xx, std::span<double> out) { spec.rough(t, xx, view, out); },
                            x, dx * dy, jac, scratch);
      });
    }
    if (spec.gubbins) guarded("rough gubbins", t, x, [&] { spec.gubbins(t, x, view, explicit_g); });
    scheme::compose_gubbins(dx, dy, f, jac, explicit_g, fprime);
    if (i == n) break;

    const auto y0 = rp.value(i), y1 = rp.value(i + 1);
    for (std::size_t a = 0; a < dy; ++a) dyv[a] = y1[a] - y0[a];
    scheme::rough_increment(dx, dy, f, fprime, dyv, rp.area(i), rough);
    for (std::size_t j = i * ff; j < (i + 1) * ff; ++j) {
      const double s = fine[j];
      guarded("drift", s, x, [&] { spec.drift(s, x, view, b); });
      guarded("Brownian coefficient", s, x, [&] { spec.brownian(s, x, view, sigma); });
      scheme::euler_step(x, b, sigma, fine.step(j), bm.increment(j));
    }
    scheme::add_rough(x, rough);
    if (scheme::diverged(x, spec.divergence_bound))
      throw DivergenceError("solve_rsde: state diverged at step " + std::to_string(i + 1) + " (" +
                                describe(coarse[i + 1], x) + ")",
                            i + 1, coarse[i + 1]);
  }
  return sol;
}

SolutionPath solve_rough_ito(std::size_t dx, std::size_t db, const ProcessCoefficient& A,
                             const ProcessCoefficient& Sigma, const ControlledFactory& cp,
                             const RoughPath& rp, const BrownianDraw& bm,
                             std::span<const double> x0) {
  if (!A || !Sigma || !cp) throw InvalidArgument("solve_rough_ito: all coefficient processes are required");
  const std::size_t dy = rp.dim();
  RsdeSpec spec;
  spec.dx = dx;
  spec.db = db;
  spec.dy = dy;
  spec.drift = [A](double t, std::span<const double>, const DriverView& y, std::span<double> out) {
    A(t, y, out);
  };
  spec.brownian = [Sigma](double t, std::span<const double>, const DriverView& y, std::span<double> out) {
    Sigma(t, y, out);
  };
  spec.rough = [cp, dx, dy](double t, std::span<const double>, const DriverView& y, std::span<double> out) {
    std::vector<double> unused(dx * dy * dy);
    cp(t, y, out, unused);
  };
  spec.gubbins = [cp, dx, dy](double t, std::span<const double>, const DriverView& y, std::span<double> out) {
    std::vector<double> unused(dx * dy);
    cp(t, y, unused, out);
  };
  spec.jacobian = [](double, std::span<const double>, const DriverView&, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  return solve_rsde(spec, rp, bm, x0);
}

std::vector<double> girsanov_exponent(const ObservationFunction& obs, const SolutionPath& sol,
                                      const RoughPath& rp) {
  if (!obs.h) throw InvalidArgument("girsanov_exponent: observation function is required");
  const std::size_t dx = sol.dx, dy = rp.dim(), n = rp.intervals();
  if (sol.dy != dy || !(sol.grid == rp.grid()))
    throw IncompatibleOperands("girsanov_exponent: solution and rough path do not match");
  if (sol.gartner.size() != (n + 1) * dx * dy)
    throw InvalidArgument("girsanov_exponent: solution carries no rough coefficient record");

  std::vector<double> F((n + 1) * dy), Fp((n + 1) * dy * dy), hx(dy * dx), hy(dy * dy), sq(n + 1);
  std::vector<double> scratch(2 * std::max(dx, dy) + 2 * dy);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = rp.grid()[i];
    const auto x = sol.state(i);
    const auto y = rp.value(i);
    std::span<double> h(F.data() + i * dy, dy);
    guarded("observation function", t, x, [&] { obs.h(t, x, y, h); });
    if (obs.dh_dx) {
      guarded("observation x-jacobian", t, x, [&] { obs.dh_dx(t, x, y, hx); });
    } else {
      scheme::fd_jacobian([&](std::span<const double> xx, std::span<double> out) { obs.h(t, xx, y, out); },
                          x, dy, hx, scratch);
    }
    if (obs.dh_dy) {
      guarded("observation y-jacobian", t, x, [&] { obs.dh_dy(t, x, y, hy); });
    } else {
      scheme::fd_jacobian([&](std::span<const double> yy, std::span<double> out) { obs.h(t, x, yy, out); },
                          y, dy, hy, scratch);
    }
    const auto f = std::span<const double>(sol.gartner).subspan(i * dx * dy, dx * dy);
    for (std::size_t a = 0; a < dy; ++a)
      for (std::size_t b = 0; b < dy; ++b) {
        double s = 0.0;
        for (std::size_t m = 0; m < dx; ++m) s += hx[b * dx + m] * f[m * dy + a];
        Fp[i * dy * dy + a * dy + b] = s + hy[b * dy + a];
      }
    double norm2 = 0.0;
    for (double v : h) norm2 += v * v;
    sq[i] = norm2;
  }
  const ControlledPath cp(rp.grid(), 1, dy, std::move(F), std::move(Fp));
  auto out = cumulative_integral(cp, rp);
  double lebesgue = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    lebesgue += 0.5 * (sq[i - 1] + sq[i]) * rp.grid().step(i - 1);
    out[i] -= 0.5 * lebesgue;
  }
  return out;
}

void write_solution_csv(std::ostream& out, const SolutionPath& sol) {
  out << 't';
  for (std::size_t k = 0; k < sol.dx; ++k) out << ",x" << k;
  out << '\n';
  for (std::size_t i = 0; i < sol.grid.nodes(); ++i) {
    out << format_double(sol.grid[i]);
    for (double v : sol.state(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace roughkit
