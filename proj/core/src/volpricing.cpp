#include "roughkit/volpricing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"
#include "roughkit/rsde.hpp"
#include "roughkit/stats.hpp"

namespace roughkit {

VarianceKind parse_variance_kind(const std::string& name) {
  if (name == "constant") return VarianceKind::constant;
  if (name == "cir") return VarianceKind::cir;
  if (name == "lognormal-ou") return VarianceKind::lognormal_ou;
  throw InvalidArgument("unknown variance model '" + name + "'");
}

std::string to_string(VarianceKind kind) {
  switch (kind) {
    case VarianceKind::constant: return "constant";
    case VarianceKind::cir: return "cir";
    case VarianceKind::lognormal_ou: return "lognormal-ou";
  }
  return "";
}

Payoff parse_payoff(const std::string& name) {
  if (name == "call") return Payoff::call;
  if (name == "put") return Payoff::put;
  if (name == "forward") return Payoff::forward;
  throw InvalidArgument("unknown payoff '" + name + "'");
}

std::string to_string(Payoff payoff) {
  switch (payoff) {
    case Payoff::call: return "call";
    case Payoff::put: return "put";
    case Payoff::forward: return "forward";
  }
  return "";
}

double payoff_value(Payoff payoff, double x, double strike) {
  switch (payoff) {
    case Payoff::call: return std::max(x - strike, 0.0);
    case Payoff::put: return std::max(strike - x, 0.0);
    case Payoff::forward: return x - strike;
  }
  return 0.0;
}

double bachelier(Payoff payoff, double m, double s, double strike) {
  if (payoff == Payoff::forward) return m - strike;
  double call;
  if (s <= 0.0) {
    call = std::max(m - strike, 0.0);
  } else {
    const double d = (m - strike) / s;
    const double cdf = 0.5 * std::erfc(-d / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * d * d) / std::sqrt(2.0 * std::numbers::pi);
    call = (m - strike) * cdf + s * pdf;
  }
  return payoff == Payoff::call ? call : call - (m - strike);
}

namespace {

void validate(const VarianceModel& v) {
  if (!(v.v0 >= 0.0) || !std::isfinite(v.v0)) throw InvalidArgument("variance model: v0 must be nonnegative");
  if (v.kind != VarianceKind::constant) {
    if (!(v.kappa >= 0.0) || !(v.xi >= 0.0)) throw InvalidArgument("variance model: kappa and xi must be nonnegative");
    if (v.kind == VarianceKind::cir && !(v.theta >= 0.0)) throw InvalidArgument("variance model: theta must be nonnegative");
  }
}

void validate(const LsvModel& model, const TimeGrid& fine) {
  validate(model.variance);
  if (!model.rho) throw InvalidArgument("LSV model: correlation is required");
  for (double t : fine.times()) {
    const double r = model.rho(t);
    if (!(std::abs(r) <= 1.0)) throw InvalidArgument("LSV model: correlation outside [-1, 1]");
  }
}

double local_vol(const LsvModel& model, double t, double x) {
  return model.local_vol ? model.local_vol(t, x) : 1.0;
}

}  // namespace

CommonFactor simulate_common_factor(const VarianceModel& v, const TimeGrid& fine,
                                    std::span<const double> dw) {
  validate(v);
  const std::size_t n = fine.intervals();
  if (dw.size() != n) throw InvalidArgument("simulate_common_factor: increments do not match the grid");
  CommonFactor out{std::vector<double>(n + 1), std::vector<double>(n + 1, 0.0)};
  double state = v.kind == VarianceKind::cir ? v.v0 : 0.0;
  auto report = [&] {
    switch (v.kind) {
      case VarianceKind::constant: return v.v0;
      case VarianceKind::cir: return std::max(state, 0.0);
      case VarianceKind::lognormal_ou: return v.v0 * std::exp(state);
    }
    return 0.0;
  };
  for (std::size_t j = 0;; ++j) {
    out.variance[j] = report();
    if (j == n) break;
    const double dt = fine.step(j);
    out.martingale[j + 1] = out.martingale[j] + std::sqrt(out.variance[j]) * dw[j];
    if (v.kind == VarianceKind::cir) {
      const double vp = std::max(state, 0.0);
      state += v.kappa * (v.theta - vp) * dt + v.xi * std::sqrt(vp) * dw[j];
    } else if (v.kind == VarianceKind::lognormal_ou) {
      state += -v.kappa * state * dt + v.xi * dw[j];
    }
  }
  return out;
}

JointSamples simulate_lsv_joint(const LsvModel& model, const TimeGrid& grid,
                                std::size_t fine_factor, std::size_t samples, Seed seed) {
  if (fine_factor == 0 || samples == 0) throw InvalidArgument("simulate_lsv_joint: fine_factor and samples must be positive");
  const TimeGrid fine = grid.refine(fine_factor);
  validate(model, fine);
  const std::size_t n = fine.intervals();
  JointSamples out{std::vector<double>(samples), std::vector<double>(samples)};
  parallel_for(samples, [&](std::size_t m) {
    const BrownianDraw W = sample_brownian(fine, 1, derive_seed(seed, "common", {m}));
    const BrownianDraw B = sample_brownian(fine, 1, derive_seed(seed, "idiosyncratic", {m}));
    const CommonFactor factor = simulate_common_factor(model.variance, fine, W.increments);
    double x = model.x0;
    for (std::size_t j = 0; j < n; ++j) {
      const double t = fine[j], r = model.rho(t);
      x += local_vol(model, t, x) * std::sqrt(factor.variance[j]) *
           (std::sqrt(1.0 - r * r) * B.increments[j] + r * W.increments[j]);
      if (!std::isfinite(x) || std::abs(x) > 1e12)
        throw DivergenceError("simulate_lsv_joint: price diverged", j + 1, fine[j + 1]);
    }
    out.terminal[m] = x;
    out.martingale[m] = factor.martingale[n];
  });
  return out;
}

MixingMoments mixing_moments(const TimeGrid& fine, std::span<const double> variance,
                             std::span<const double> dw, const std::function<double(double)>& rho,
                             double x0) {
  const std::size_t n = fine.intervals();
  if (variance.size() != n + 1 || dw.size() != n) throw InvalidArgument("mixing_moments: paths do not match the grid");
  double m = x0, s2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = rho(fine[j]);
    m += r * std::sqrt(variance[j]) * dw[j];
    s2 += (1.0 - r * r) * variance[j] * fine.step(j);
  }
  return {m, std::sqrt(std::max(s2, 0.0))};
}

double mixing_formula_oracle(const TimeGrid& fine, std::span<const double> variance,
                             std::span<const double> dw, const std::function<double(double)>& rho,
                             double x0, double strike, Payoff payoff) {
  const auto mm = mixing_moments(fine, variance, dw, rho, x0);
  return bachelier(payoff, mm.mean, mm.sd, strike);
}

VarianceEstimate recover_variance(const RoughPath& rp) {
  if (rp.dim() != 1) throw InvalidArgument("recover_variance: scalar rough path expected");
  const BracketPath br = bracket(rp);
  VarianceEstimate out;
  for (std::size_t i = 0; i < rp.intervals(); ++i) {
    double v = (br.at(i + 1)[0] - br.at(i)[0]) / rp.grid().step(i);
    if (v < 0.0) {
      v = 0.0;
      ++out.floored;
    }
    out.values.push_back(v);
  }
  return out;
}

ConditionalPrices conditional_price_rough(const LsvModel& model, Payoff payoff,
                                          std::span<const double> strikes,
                                          const PricingConfig& cfg, Seed seed) {
  if (strikes.empty()) throw InvalidArgument("conditional_price_rough: no strikes");
  if (cfg.outer == 0 || cfg.inner < 2 || cfg.fine_factor == 0 || cfg.inner_fine_factor == 0)
    throw InvalidArgument("conditional_price_rough: invalid Monte Carlo sizes");
  const TimeGrid coarse = make_grid(cfg.horizon, static_cast<std::int64_t>(cfg.intervals));
  const TimeGrid fine = coarse.refine(cfg.fine_factor);
  const TimeGrid inner_grid = coarse.refine(cfg.inner_fine_factor);
  validate(model, fine);
  const std::size_t ns = strikes.size(), n = coarse.intervals();
  const bool oracle = !model.local_vol;
  ConditionalPrices out{std::vector<double>(strikes.begin(), strikes.end()), cfg.outer,
                        std::vector<double>(cfg.outer * ns), std::vector<double>(cfg.outer * ns), {}, {}, 0};
  if (oracle) {
    out.oracle.resize(cfg.outer * ns);
    out.bound.resize(cfg.outer * ns);
  }
  std::vector<std::size_t> floored(cfg.outer);

  for (std::size_t k = 0; k < cfg.outer; ++k) {
    const BrownianDraw W = sample_brownian(fine, 1, derive_seed(seed, "outer", {k}));
    const CommonFactor factor = simulate_common_factor(model.variance, fine, W.increments);
    const RoughPath rp = lift_fine_path(coarse, cfg.fine_factor, 1, factor.martingale, LiftConvention::ito);
    const VarianceEstimate vhat = recover_variance(rp);
    floored[k] = vhat.floored;

    RsdeSpec spec;
    spec.drift = [](double, std::span<const double>, const DriverView&, std::span<double> out) { out[0] = 0.0; };
    spec.brownian = [&](double t, std::span<const double> x, const DriverView& y, std::span<double> out) {
      const double r = model.rho(t), v = vhat.values[std::min(y.now(), n - 1)];
      out[0] = local_vol(model, t, x[0]) * std::sqrt((1.0 - r * r) * v);
    };
    spec.rough = [&](double t, std::span<const double> x, const DriverView&, std::span<double> out) {
      out[0] = local_vol(model, t, x[0]) * model.rho(t);
    };
    if (oracle)
      spec.jacobian = [](double, std::span<const double>, const DriverView&, std::span<double> out) { out[0] = 0.0; };

    std::vector<double> payoffs(cfg.inner * ns);
    parallel_for(cfg.inner, [&](std::size_t m) {
      const BrownianDraw B = sample_brownian(inner_grid, 1, derive_seed(seed, "inner", {k, m}));
      const double x0[] = {model.x0};
      const double xT = solve_rsde(spec, rp, B, x0).state(n)[0];
      for (std::size_t s = 0; s < ns; ++s) payoffs[s * cfg.inner + m] = payoff_value(payoff, xT, strikes[s]);
    });
    for (std::size_t s = 0; s < ns; ++s) {
      const auto summary = summarize(std::span<const double>(payoffs).subspan(s * cfg.inner, cfg.inner));
      out.price[k * ns + s] = summary.mean;
      out.std_error[k * ns + s] = summary.std_error;
    }
    if (oracle) {
      const auto mm = mixing_moments(fine, factor.variance, W.increments, model.rho, model.x0);
      // Law of the rough route given the draw: Gaussian with the coarse mean
      // and the recovered total variance.
      double m_eff = model.x0, s2_eff = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = model.rho(coarse[i]);
        m_eff += r * (rp.value(i + 1)[0] - rp.value(i)[0]);
        s2_eff += (1.0 - r * r) * vhat.values[i] * coarse.step(i);
      }
      for (std::size_t s = 0; s < ns; ++s) {
        const double o = bachelier(payoff, mm.mean, mm.sd, strikes[s]);
        out.oracle[k * ns + s] = o;
        out.bound[k * ns + s] = std::abs(bachelier(payoff, m_eff, std::sqrt(s2_eff), strikes[s]) - o);
      }
    }
  }
  for (std::size_t f : floored) out.floored += f;
  return out;
}

PriceReport price_report(const LsvModel& model, Payoff payoff, std::span<const double> strikes,
                         const PricingConfig& cfg, Seed seed) {
  if (cfg.joint < 2) throw InvalidArgument("price_report: joint sample count must be at least 2");
  PriceReport report;
  report.payoff = payoff;
  report.conditional = conditional_price_rough(model, payoff, strikes, cfg, derive_seed(seed, "rough"));
  const auto& cp = report.conditional;
  const std::size_t ns = strikes.size(), K = cfg.outer;
  const auto joint = simulate_lsv_joint(model, make_grid(cfg.horizon, static_cast<std::int64_t>(cfg.intervals)),
                                        cfg.fine_factor, cfg.joint, derive_seed(seed, "joint"));
  std::vector<double> column(K), pay(cfg.joint);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t m = 0; m < cfg.joint; ++m) pay[m] = payoff_value(payoff, joint.terminal[m], strikes[s]);
    const auto js = summarize(pay);
    for (std::size_t k = 0; k < K; ++k) column[k] = cp.price[k * ns + s];
    const auto rs = summarize(column);
    const double z = K > 1 ? z_score(rs.mean, rs.std_error, js.mean, js.std_error) : 0.0;
    report.max_tower_z = std::max(report.max_tower_z, std::abs(z));
    report.lines.push_back({strikes[s], "rough", rs.mean, rs.std_error, z});
    report.lines.push_back({strikes[s], "joint", js.mean, js.std_error, 0.0});
    if (!cp.oracle.empty()) {
      for (std::size_t k = 0; k < K; ++k) column[k] = cp.oracle[k * ns + s];
      const auto os = summarize(column);
      report.lines.push_back({strikes[s], "oracle", os.mean, os.std_error,
                              K > 1 ? z_score(os.mean, os.std_error, js.mean, js.std_error) : 0.0});
    }
  }
  if (!cp.oracle.empty()) {
    std::size_t passed = 0;
    for (std::size_t k = 0; k < K; ++k) {
      bool ok = true;
      for (std::size_t s = 0; s < ns; ++s) {
        const std::size_t i = k * ns + s;
        ok = ok && std::abs(cp.price[i] - cp.oracle[i]) <= 3.0 * (cp.std_error[i] + cp.bound[i]);
      }
      report.draw_pass.push_back(ok ? 1.0 : 0.0);
      passed += ok;
    }
    report.pass_fraction = static_cast<double>(passed) / static_cast<double>(K);
    // Strikes are checked in the order given; monotonicity is judged on the
    // sorted ladder.
    std::vector<std::size_t> order(ns);
    for (std::size_t s = 0; s < ns; ++s) order[s] = s;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return strikes[a] < strikes[b]; });
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t s = 0; s + 1 < ns; ++s) {
        const double lo = cp.oracle[k * ns + order[s]], hi = cp.oracle[k * ns + order[s + 1]];
        if (payoff == Payoff::put ? hi < lo : hi > lo) report.oracle_monotone = false;
      }
  }
  return report;
}

void write_csv(std::ostream& out, const PriceReport& report) {
  out << "strike,route,price,stderr,z\n";
  for (const auto& l : report.lines)
    out << format_double(l.strike) << ',' << l.route << ',' << format_double(l.price) << ','
        << format_double(l.std_error) << ',' << format_double(l.z) << '\n';
}

void write_draws_csv(std::ostream& out, const ConditionalPrices& p) {
  out << "draw,strike,price,stderr,oracle,bound\n";
  const std::size_t ns = p.strikes.size();
  for (std::size_t k = 0; k < p.outer; ++k)
    for (std::size_t s = 0; s < ns; ++s) {
      const std::size_t i = k * ns + s;
      out << k << ',' << format_double(p.strikes[s]) << ',' << format_double(p.price[i]) << ','
          << format_double(p.std_error[i]) << ',';
      if (p.oracle.empty()) out << ",\n";
      else out << format_double(p.oracle[i]) << ',' << format_double(p.bound[i]) << '\n';
    }
}

}  // namespace roughkit
