#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughkit/rng.hpp"
#include "roughkit_runner/presets.hpp"

namespace roughkit::runner {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& experiment_kinds();

struct ExperimentConfig {
  std::string kind;
  std::string preset;
  Seed seed = 1;
  // [grid]
  double horizon = 1.0;
  std::size_t intervals = 64;
  std::size_t fine_factor = 8;
  std::size_t inner_fine_factor = 1;
  std::vector<std::size_t> levels;
  std::size_t dim = 2;
  std::string convention = "ito";
  // [mc]
  std::size_t samples = 1000;
  std::size_t outer = 50;
  std::size_t inner = 10000;
  std::size_t joint = 100000;
  std::vector<std::size_t> particles;
  double p = 8.0;
  double alpha = 0.4;
  // [model]
  Params model;
  // [price]
  std::vector<double> strikes;
  std::string payoff = "call";
  // [output]
  std::string out_dir = "out";
};

// Desk-scale defaults for a kind, including its default preset.
ExperimentConfig default_config(const std::string& kind);

// INI text with sections [experiment] [grid] [mc] [model] [price] [output].
// Unknown sections or keys, malformed values and presets that do not serve
// the kind raise ConfigError. `kind` overrides or supplies experiment.kind.
ExperimentConfig parse_config(std::istream& in, const std::string& kind = "");

void validate(const ExperimentConfig& cfg);

// Canonical INI echo; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const ExperimentConfig& cfg);

}  // namespace roughkit::runner
