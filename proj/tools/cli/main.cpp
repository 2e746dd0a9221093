#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "roughkit/errors.hpp"
#include "roughkit/parallel.hpp"
#include "roughkit_runner/config.hpp"
#include "roughkit_runner/experiments.hpp"
#include "roughkit_runner/presets.hpp"

namespace {

enum Exit : int { ok = 0, other = 1, config_error = 2, divergence = 3, acceptance_failure = 4 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string out;
};

int run(const std::string& kind, const Options& opt) {
  using namespace roughkit;
  using namespace roughkit::runner;
  try {
    ExperimentConfig cfg;
    if (opt.config.empty()) {
      cfg = default_config(kind);
    } else {
      std::ifstream in(opt.config);
      if (!in) throw ConfigError("cannot open config file " + opt.config);
      cfg = parse_config(in, kind);
    }
    if (opt.seed) cfg.seed = *opt.seed;
    if (!opt.out.empty()) cfg.out_dir = opt.out;
    validate(cfg);

    const std::size_t threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    set_thread_count(threads);
    const auto start = std::chrono::steady_clock::now();
    const auto result = run_experiment(cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_outputs(cfg.out_dir, cfg, result, threads, wall);
    std::cout << summary_text(result);
    return result.passed() ? ok : acceptance_failure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const PresetViolation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence at step " << e.step() << " (t = " << e.time() << "): " << e.what() << '\n';
    return divergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return other;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roughkit: rough-path experiments"};
  app.require_subcommand(1);
  Options opt;
  std::string chosen;
  for (const auto& kind : roughkit::runner::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", opt.config, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "master seed (overrides the config)");
    sub->add_option("--threads", opt.threads, "worker threads (default: hardware threads)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "output directory (overrides the config)");
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  auto* list = app.add_subcommand("list-presets", "list model presets and their parameters");
  list->callback([&chosen] { chosen = "list-presets"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }
  if (chosen == "list-presets") {
    std::cout << roughkit::runner::list_presets();
    return ok;
  }
  return run(chosen, opt);
}
