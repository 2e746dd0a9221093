#pragma once

#include <string>
#include <utility>
#include <vector>

#include "roughkit_runner/config.hpp"

namespace roughkit::runner {

struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=" or "=="
  double threshold = 0.0;
  bool pass = false;
};

struct ExperimentResult {
  std::vector<std::pair<std::string, std::string>> files;  // name, CSV content
  std::vector<Check> checks;

  bool passed() const;
  const std::string& file(const std::string& name) const;
  const Check& check(const std::string& name) const;
};

// Runs the experiment named by cfg.kind. Library errors propagate.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Text block: one `PASS|FAIL name value relation threshold` line per check.
std::string summary_text(const ExperimentResult& result);

// Writes config.ini, the CSV files, manifest.txt and summary.txt.
void write_outputs(const std::string& dir, const ExperimentConfig& cfg, const ExperimentResult& result,
                   std::size_t threads, double wall_seconds);

}  // namespace roughkit::runner
