#pragma once

#include <map>
#include <string>
#include <vector>

#include "roughkit/filtering.hpp"
#include "roughkit/meanfield.hpp"
#include "roughkit/rsde.hpp"
#include "roughkit/volpricing.hpp"

namespace roughkit::runner {

struct PresetParam {
  std::string name;
  double default_value = 0.0;
  std::string doc;
};

struct Preset {
  std::string name;
  std::string description;
  std::vector<std::string> kinds;
  std::vector<PresetParam> params;
};

using Params = std::map<std::string, double>;

const std::vector<Preset>& presets();
// Throws ConfigError for unknown names.
const Preset& find_preset(const std::string& name);
Params default_params(const Preset& preset);

// Deterministic listing with parameter schemas.
std::string list_presets();

// Scalar models: additive, nonlinear-test, geometric-ito, geometric-strato.
RsdeSpec scalar_model(const std::string& preset, const Params& p);
// linear-filter
LinearFilterParams filter_params(const Params& p);
// lsv-cir, lsv-const, lsv-lognormal
LsvModel lsv_model(const std::string& preset, const Params& p);
// mkv-interacting, mkv-decoupled
MkvSpec mkv_model(const std::string& preset, const Params& p);

}  // namespace roughkit::runner
