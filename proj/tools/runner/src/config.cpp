#include "roughkit_runner/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "roughkit/stats.hpp"
#include "roughkit/volpricing.hpp"

namespace roughkit::runner {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"experiment", {"kind", "preset", "seed"}},
      {"grid", {"horizon", "intervals", "fine_factor", "inner_fine_factor", "levels", "dim", "convention"}},
      {"mc", {"samples", "outer", "inner", "joint", "particles", "p", "alpha"}},
      {"model", {}},
      {"price", {"strikes", "payoff"}},
      {"output", {"dir"}},
  };
  return s;
}

std::string where(const std::string& section, const std::string& key) { return section + "." + key; }

double parse_real(const std::string& text, const std::string& at) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError(at + ": expected a finite number, got '" + text + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& text, const std::string& at) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(at + ": expected a non-negative integer, got '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const std::string& at) {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(text)) out.push_back(parse_unsigned(s, at));
  if (out.empty()) throw ConfigError(at + ": empty list");
  return out;
}

std::vector<double> parse_reals(const std::string& text, const std::string& at) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(parse_real(s, at));
  if (out.empty()) throw ConfigError(at + ": empty list");
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>)
      out += format_double(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool strictly_increasing(const std::vector<std::size_t>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"lift-stats", "integrate", "solve-rsde",
                                              "randomise-pathwise", "randomise-law", "filter",
                                              "price", "meanfield"};
  return kinds;
}

ExperimentConfig default_config(const std::string& kind) {
  ExperimentConfig c;
  c.kind = kind;
  if (kind == "lift-stats") {
    c.preset = "brownian";
    c.intervals = 16;
    c.fine_factor = 256;
    c.samples = 10000;
  } else if (kind == "integrate") {
    c.preset = "brownian";
    c.intervals = 12;
    c.fine_factor = 64;
    c.samples = 100;
    c.dim = 3;
  } else if (kind == "solve-rsde") {
    c.preset = "geometric-strato";
    c.fine_factor = 16;
    c.levels = {16, 32, 64, 128, 256, 512};
  } else if (kind == "randomise-pathwise") {
    c.preset = "nonlinear-test";
    c.levels = {16, 32, 64, 128};
  } else if (kind == "randomise-law") {
    c.preset = "nonlinear-test";
    c.intervals = 128;
    c.fine_factor = 2;
  } else if (kind == "filter") {
    c.preset = "linear-filter";
    c.fine_factor = 64;
    c.inner_fine_factor = 64;
    c.samples = 10000;
  } else if (kind == "price") {
    c.preset = "lsv-cir";
    c.fine_factor = 16;
    c.strikes = {-0.4, -0.2, 0.0, 0.2, 0.4};
  } else if (kind == "meanfield") {
    c.preset = "mkv-interacting";
    c.fine_factor = 16;
    c.outer = 20;
    c.levels = {32, 64};
    c.particles = {100, 1000};
  } else {
    throw ConfigError("unknown experiment kind '" + kind + "'");
  }
  c.model = default_params(find_preset(c.preset));
  return c;
}

ExperimentConfig parse_config(std::istream& in, const std::string& kind) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("unknown section or top-level key '" + section + "'");
    if (body.empty()) continue;
    if (section == "model") continue;
    for (const auto& [key, value] : body) {
      (void)value;
      if (!it->second.contains(key)) throw ConfigError("unknown key '" + where(section, key) + "'");
    }
  }

  std::string file_kind = tree.get<std::string>("experiment.kind", "");
  if (!kind.empty() && !file_kind.empty() && file_kind != kind)
    throw ConfigError("config is for kind '" + file_kind + "', not '" + kind + "'");
  const std::string chosen = kind.empty() ? file_kind : kind;
  if (chosen.empty()) throw ConfigError("experiment.kind is required");
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), chosen) == experiment_kinds().end())
    throw ConfigError("unknown experiment kind '" + chosen + "'");

  ExperimentConfig c = default_config(chosen);
  if (auto preset = tree.get_optional<std::string>("experiment.preset")) {
    c.preset = *preset;
    c.model = default_params(find_preset(c.preset));
  }

  auto text = [&](const char* path) { return tree.get_optional<std::string>(path); };
  auto size = [&](const char* path, std::size_t& target) {
    if (auto v = text(path)) target = parse_unsigned(*v, path);
  };
  auto real = [&](const char* path, double& target) {
    if (auto v = text(path)) target = parse_real(*v, path);
  };

  if (auto v = text("experiment.seed")) c.seed = parse_unsigned(*v, "experiment.seed");
  real("grid.horizon", c.horizon);
  size("grid.intervals", c.intervals);
  size("grid.fine_factor", c.fine_factor);
  size("grid.inner_fine_factor", c.inner_fine_factor);
  if (auto v = text("grid.levels")) c.levels = parse_sizes(*v, "grid.levels");
  size("grid.dim", c.dim);
  if (auto v = text("grid.convention")) c.convention = *v;
  size("mc.samples", c.samples);
  size("mc.outer", c.outer);
  size("mc.inner", c.inner);
  size("mc.joint", c.joint);
  if (auto v = text("mc.particles")) c.particles = parse_sizes(*v, "mc.particles");
  real("mc.p", c.p);
  real("mc.alpha", c.alpha);
  if (auto v = text("price.strikes")) c.strikes = parse_reals(*v, "price.strikes");
  if (auto v = text("price.payoff")) c.payoff = *v;
  if (auto v = text("output.dir")) c.out_dir = *v;

  if (auto model = tree.get_child_optional("model")) {
    for (const auto& [key, value] : *model) {
      if (!c.model.contains(key))
        throw ConfigError("unknown key '" + where("model", key) + "' for preset '" + c.preset + "'");
      c.model[key] = parse_real(value.data(), where("model", key));
    }
  }
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  const auto& preset = find_preset(c.preset);
  require(std::find(preset.kinds.begin(), preset.kinds.end(), c.kind) != preset.kinds.end(),
          "preset '" + c.preset + "' does not support kind '" + c.kind + "'");
  for (const auto& [key, value] : c.model) {
    (void)value;
    bool known = false;
    for (const auto& p : preset.params) known = known || p.name == key;
    require(known, "unknown key 'model." + key + "' for preset '" + c.preset + "'");
  }
  require(c.model.size() == preset.params.size(), "model parameters incomplete for '" + c.preset + "'");
  require(c.horizon > 0.0, "grid.horizon must be positive");
  require(c.intervals >= 1, "grid.intervals must be positive");
  require(c.fine_factor >= 1, "grid.fine_factor must be positive");
  require(c.inner_fine_factor >= 1, "grid.inner_fine_factor must be positive");
  require(c.dim >= 1 && c.dim <= 8, "grid.dim must lie in [1, 8]");
  require(c.convention == "ito" || c.convention == "stratonovich",
          "grid.convention must be 'ito' or 'stratonovich'");
  require(c.samples >= 2, "mc.samples must be at least 2");
  require(c.outer >= 1, "mc.outer must be positive");
  require(c.inner >= 2, "mc.inner must be at least 2");
  require(c.joint >= 2, "mc.joint must be at least 2");
  require(c.p >= 1.0, "mc.p must be at least 1");
  require(c.alpha > 1.0 / 3.0 && c.alpha < 0.5, "mc.alpha must lie in (1/3, 1/2)");
  for (std::size_t n : c.levels) require(n >= 1, "grid.levels entries must be positive");
  require(strictly_increasing(c.levels), "grid.levels must be strictly increasing");
  require(strictly_increasing(c.particles), "mc.particles must be strictly increasing");
  for (std::size_t n : c.particles) require(n >= 2, "mc.particles entries must be at least 2");

  const bool study = c.kind == "randomise-pathwise" ||
                     (c.kind == "solve-rsde" && c.preset.starts_with("geometric"));
  if (study) {
    require(c.levels.size() >= 3, "grid.levels needs at least 3 entries");
    for (std::size_t n : c.levels)
      require(c.levels.back() % n == 0, "grid.levels entries must divide the finest level");
  }
  if (c.kind == "meanfield") {
    require(!c.levels.empty(), "grid.levels is required");
    require(c.particles.size() >= 2, "mc.particles needs at least 2 entries");
    for (std::size_t n : c.levels)
      require(c.levels.back() % n == 0, "grid.levels entries must divide the finest level");
  }
  if (c.kind == "price") {
    require(!c.strikes.empty(), "price.strikes is required");
    try {
      parse_payoff(c.payoff);
    } catch (const std::exception&) {
      throw ConfigError("price.payoff must be call, put or forward");
    }
    const double rho = c.model.at("rho");
    require(rho >= -1.0 && rho <= 1.0, "model.rho must lie in [-1, 1]");
    require(c.model.at("v0") >= 0.0, "model.v0 must be non-negative");
  }
  if (c.kind == "filter") require(c.model.at("P0") >= 0.0, "model.P0 must be non-negative");
  if (c.kind == "meanfield") require(c.model.at("s0") >= 0.0, "model.s0 must be non-negative");
}

std::string to_ini(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\nkind = " << c.kind << "\npreset = " << c.preset << "\nseed = " << c.seed << "\n\n";
  out << "[grid]\nhorizon = " << format_double(c.horizon) << "\nintervals = " << c.intervals
      << "\nfine_factor = " << c.fine_factor << "\ninner_fine_factor = " << c.inner_fine_factor << '\n';
  if (!c.levels.empty()) out << "levels = " << join(c.levels) << '\n';
  out << "dim = " << c.dim << "\nconvention = " << c.convention << "\n\n";
  out << "[mc]\nsamples = " << c.samples << "\nouter = " << c.outer << "\ninner = " << c.inner
      << "\njoint = " << c.joint << '\n';
  if (!c.particles.empty()) out << "particles = " << join(c.particles) << '\n';
  out << "p = " << format_double(c.p) << "\nalpha = " << format_double(c.alpha) << "\n\n";
  out << "[model]\n";
  for (const auto& [k, v] : c.model) out << k << " = " << format_double(v) << '\n';
  out << "\n[price]\n";
  if (!c.strikes.empty()) out << "strikes = " << join(c.strikes) << '\n';
  out << "payoff = " << c.payoff << "\n\n[output]\ndir = " << c.out_dir << '\n';
  return out.str();
}

}  // namespace roughkit::runner
