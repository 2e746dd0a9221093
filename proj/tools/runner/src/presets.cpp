#include "roughkit_runner/presets.hpp"

#include <cmath>
#include <sstream>

#include "roughkit/stats.hpp"
#include "roughkit_runner/config.hpp"

namespace roughkit::runner {

namespace {

using Span = std::span<const double>;
using Out = std::span<double>;

RsdeSpec scalar(std::function<double(double)> b, std::function<double(double)> sigma,
                std::function<double(double)> f, std::function<double(double)> df) {
  RsdeSpec spec;
  spec.drift = [b](double, Span x, const DriverView&, Out out) { out[0] = b(x[0]); };
  spec.brownian = [sigma](double, Span x, const DriverView&, Out out) { out[0] = sigma(x[0]); };
  spec.rough = [f](double, Span x, const DriverView&, Out out) { out[0] = f(x[0]); };
  spec.jacobian = [df](double, Span x, const DriverView&, Out out) { out[0] = df(x[0]); };
  return spec;
}

double get(const Params& p, const std::string& key) {
  const auto it = p.find(key);
  if (it == p.end()) throw ConfigError("missing model parameter '" + key + "'");
  return it->second;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> registry{
      {"additive",
       "dX = b dt + sigma dB + f dY with constant coefficients",
       {"solve-rsde", "randomise-pathwise", "randomise-law"},
       {{"b", 0.2, "drift"}, {"sigma", 0.4, "Brownian coefficient"}, {"f", 0.7, "rough coefficient"},
        {"x0", 0.25, "initial state"}}},
      {"brownian",
       "Brownian driver lifted on the coarse grid; dimension and convention from [grid]",
       {"lift-stats", "integrate"},
       {}},
      {"geometric-ito",
       "dX = c X dY against the Ito Brownian lift; reference x0 exp(c W_T - c^2 T / 2)",
       {"solve-rsde"},
       {{"c", 1.0, "rough coefficient"}, {"x0", 1.0, "initial state"}}},
      {"geometric-strato",
       "dX = c X dY against the Stratonovich Brownian lift; reference x0 exp(c W_T)",
       {"solve-rsde"},
       {{"c", 1.0, "rough coefficient"}, {"x0", 1.0, "initial state"}}},
      {"linear-filter",
       "signal dX = A X dt + sigma dB + f dY, observation h = H x, X_0 ~ N(m0, P0)",
       {"filter"},
       {{"A", -1.0, "signal drift"}, {"H", 1.0, "observation gain"}, {"sigma", 0.5, "signal noise"},
        {"f", 0.3, "observation feedback"}, {"m0", 0.0, "prior mean"}, {"P0", 1.0, "prior variance"}}},
      {"lsv-cir",
       "l = 1, dV = kappa (theta - V+) dt + xi sqrt(V+) dW",
       {"price"},
       {{"rho", 0.7, "correlation"}, {"v0", 1.0, "initial variance"}, {"kappa", 2.0, "mean reversion"},
        {"theta", 1.0, "long-run variance"}, {"xi", 0.5, "vol of variance"}, {"x0", 0.0, "initial price"}}},
      {"lsv-const",
       "l = 1, V = v0",
       {"price"},
       {{"rho", 0.7, "correlation"}, {"v0", 1.0, "variance"}, {"x0", 0.0, "initial price"}}},
      {"lsv-lognormal",
       "l = 1, V = v0 exp(Z), dZ = -kappa Z dt + xi dW",
       {"price"},
       {{"rho", 0.7, "correlation"}, {"v0", 1.0, "initial variance"}, {"kappa", 1.0, "mean reversion"},
        {"xi", 0.5, "vol of log-variance"}, {"x0", 0.0, "initial price"}}},
      {"mkv-decoupled",
       "dX = -kappa X dt + sigma dB + f X dY without measure dependence",
       {"meanfield"},
       {{"kappa", 1.0, "mean reversion"}, {"sigma", 0.5, "idiosyncratic noise"},
        {"f", 0.7, "common-noise coefficient"}, {"m0", 0.5, "initial mean"}, {"s0", 0.5, "initial sd"}}},
      {"mkv-interacting",
       "dX = a (mean - X) dt + sigma dB + (c1 + c2 mean) dY",
       {"meanfield"},
       {{"a", 1.0, "attraction to the mean"}, {"sigma", 0.5, "idiosyncratic noise"},
        {"c1", 0.3, "common-noise level"}, {"c2", 0.5, "common-noise mean sensitivity"},
        {"m0", 0.5, "initial mean"}, {"s0", 0.5, "initial sd"}}},
      {"nonlinear-test",
       "dX = -kappa X dt + sigma dB + c sin(X) dY",
       {"solve-rsde", "randomise-pathwise", "randomise-law"},
       {{"kappa", 1.0, "mean reversion"}, {"sigma", 0.3, "Brownian coefficient"},
        {"c", 0.5, "rough coefficient"}, {"x0", 1.0, "initial state"}}},
  };
  return registry;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw ConfigError("unknown preset '" + name + "'");
}

Params default_params(const Preset& preset) {
  Params out;
  for (const auto& p : preset.params) out[p.name] = p.default_value;
  return out;
}

std::string list_presets() {
  std::ostringstream out;
  for (const auto& p : presets()) {
    out << p.name << "\n  " << p.description << "\n  kinds:";
    for (const auto& k : p.kinds) out << ' ' << k;
    out << '\n';
    for (const auto& q : p.params)
      out << "  " << q.name << " = " << format_double(q.default_value) << "  (" << q.doc << ")\n";
  }
  return out.str();
}

RsdeSpec scalar_model(const std::string& preset, const Params& p) {
  if (preset == "additive") {
    const double b = get(p, "b"), s = get(p, "sigma"), f = get(p, "f");
    return scalar([b](double) { return b; }, [s](double) { return s; }, [f](double) { return f; },
                  [](double) { return 0.0; });
  }
  if (preset == "nonlinear-test") {
    const double k = get(p, "kappa"), s = get(p, "sigma"), c = get(p, "c");
    return scalar([k](double x) { return -k * x; }, [s](double) { return s; },
                  [c](double x) { return c * std::sin(x); }, [c](double x) { return c * std::cos(x); });
  }
  if (preset == "geometric-ito" || preset == "geometric-strato") {
    const double c = get(p, "c");
    return scalar([](double) { return 0.0; }, [](double) { return 0.0; }, [c](double x) { return c * x; },
                  [c](double) { return c; });
  }
  throw ConfigError("preset '" + preset + "' is not a scalar rough SDE");
}

LinearFilterParams filter_params(const Params& p) {
  return scalar_linear_params(get(p, "A"), get(p, "H"), get(p, "sigma"), get(p, "f"), get(p, "m0"),
                              get(p, "P0"));
}

LsvModel lsv_model(const std::string& preset, const Params& p) {
  LsvModel m;
  const double rho = get(p, "rho");
  m.rho = [rho](double) { return rho; };
  m.x0 = get(p, "x0");
  m.variance.v0 = get(p, "v0");
  if (preset == "lsv-const") {
    m.variance.kind = VarianceKind::constant;
  } else if (preset == "lsv-cir") {
    m.variance = {VarianceKind::cir, get(p, "v0"), get(p, "kappa"), get(p, "theta"), get(p, "xi")};
  } else if (preset == "lsv-lognormal") {
    m.variance = {VarianceKind::lognormal_ou, get(p, "v0"), get(p, "kappa"), 0.0, get(p, "xi")};
  } else {
    throw ConfigError("preset '" + preset + "' is not a pricing model");
  }
  return m;
}

MkvSpec mkv_model(const std::string& preset, const Params& p) {
  MkvSpec s;
  const double m0 = get(p, "m0"), s0 = get(p, "s0"), sigma = get(p, "sigma");
  s.initial = [m0, s0](Rng& rng, Out out) { out[0] = m0 + s0 * rng.normal(); };
  s.brownian = [sigma](Span, Span, Out out) { out[0] = sigma; };
  if (preset == "mkv-interacting") {
    const double a = get(p, "a"), c1 = get(p, "c1"), c2 = get(p, "c2");
    s.features = {parse_feature("mean:0")};
    s.drift = [a](Span x, Span mu, Out out) { out[0] = a * (mu[0] - x[0]); };
    s.rough = [c1, c2](Span, Span mu, Out out) { out[0] = c1 + c2 * mu[0]; };
  } else if (preset == "mkv-decoupled") {
    const double k = get(p, "kappa"), f = get(p, "f");
    s.drift = [k](Span x, Span, Out out) { out[0] = -k * x[0]; };
    s.rough = [f](Span x, Span, Out out) { out[0] = f * x[0]; };
  } else {
    throw ConfigError("preset '" + preset + "' is not a mean-field model");
  }
  return s;
}

}  // namespace roughkit::runner
