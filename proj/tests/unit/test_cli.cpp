#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "roughkit_runner/config.hpp"
#include "roughkit_runner/experiments.hpp"
#include "roughkit_runner/presets.hpp"

using namespace roughkit::runner;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text, const std::string& kind = "") {
  std::istringstream in(text);
  return parse_config(in, kind);
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(ROUGHKIT_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("roughkit_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, DefaultsFollowTheKind) {
  const auto c = parse("[experiment]\nkind = filter\n");
  EXPECT_EQ(c.preset, "linear-filter");
  EXPECT_EQ(c.intervals, 64u);
  EXPECT_EQ(c.fine_factor, 64u);
  EXPECT_EQ(c.model.at("A"), -1.0);
}

TEST(Config, OverridesAndLists) {
  const auto c = parse(
      "[experiment]\nkind = randomise-pathwise\npreset = additive\nseed = 42\n"
      "[grid]\nlevels = 8, 16,32\nfine_factor = 2\n[model]\nf = 1.5\n");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.levels, (std::vector<std::size_t>{8, 16, 32}));
  EXPECT_EQ(c.model.at("f"), 1.5);
  EXPECT_EQ(c.model.at("sigma"), 0.4);
}

TEST(Config, StrictParsingRejectsUnknownOrMalformedInput) {
  EXPECT_THROW(parse("[experiment]\nkind = filter\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = filter\n[extra]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = filter\n[model]\nkappa = 1\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = filter\n[grid]\nintervals = 6.5\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = filter\n[grid]\nintervals = 0\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = filter\n[mc]\nalpha = 0.6\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = filter\npreset = lsv-cir\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = nope\n"), ConfigError);
  EXPECT_THROW(parse("[grid]\nintervals = 4\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = filter\n", "price"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = filter\nkind = price\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = price\n[price]\npayoff = digital\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nkind = solve-rsde\n[grid]\nlevels = 16, 24, 32\n"), ConfigError);
}

TEST(Config, IniEchoRoundTrips) {
  for (const auto& kind : experiment_kinds()) {
    auto c = default_config(kind);
    c.seed = 987654321987654321ull;
    c.horizon = 0.1;
    const auto again = parse(to_ini(c));
    EXPECT_EQ(to_ini(again), to_ini(c)) << kind;
    EXPECT_EQ(again.seed, c.seed);
    EXPECT_EQ(again.horizon, 0.1);
  }
}

TEST(Presets, ListingIsStableAndComplete) {
  const auto text = list_presets();
  EXPECT_EQ(text, list_presets());
  EXPECT_NE(text.find("linear-filter"), std::string::npos);
  EXPECT_NE(text.find("lsv-cir"), std::string::npos);
  for (const auto& p : presets()) EXPECT_NE(text.find(p.name), std::string::npos);
  for (const auto& kind : experiment_kinds()) EXPECT_NO_THROW(validate(default_config(kind))) << kind;
}

TEST(Runner, SmallExperimentsAreDeterministic) {
  auto c = default_config("randomise-pathwise");
  c.levels = {4, 8, 16};
  c.samples = 20;
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  EXPECT_EQ(a.files, b.files);
  c.seed = 2;
  EXPECT_NE(run_experiment(c).files, a.files);
  EXPECT_EQ(a.file("coupling.csv").substr(0, 23), "mesh,metric,value,stder");
}

TEST(Runner, SummaryReportsEveryCheck) {
  auto c = default_config("integrate");
  c.samples = 5;
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.passed());
  const auto text = summary_text(r);
  for (const auto& ch : r.checks) EXPECT_NE(text.find("PASS " + ch.name), std::string::npos);
  EXPECT_NE(text.find("result PASS"), std::string::npos);
}

TEST(Cli, ListPresets) {
  const auto dir = scratch("list");
  const auto file = dir / "list.txt";
  ASSERT_EQ(std::system((std::string(ROUGHKIT_CLI) + " list-presets > " + file.string()).c_str()), 0);
  std::ifstream in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), list_presets());
}

TEST(Cli, UnknownKeyIsAConfigErrorWithoutOutputs) {
  const auto dir = scratch("unknown");
  const auto cfg = dir / "bad.ini";
  std::ofstream(cfg) << "[experiment]\nkind = integrate\n[grid]\nwidth = 3\n";
  const auto out = dir / "out";
  EXPECT_EQ(run_cli("integrate --config " + cfg.string() + " --out " + out.string()), 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, RunWritesManifestConfigAndCsv) {
  const auto dir = scratch("run");
  const auto cfg = dir / "small.ini";
  std::ofstream(cfg) << "[experiment]\nkind = integrate\nseed = 5\n[mc]\nsamples = 4\n";
  const auto out = dir / "out";
  ASSERT_EQ(run_cli("integrate --config " + cfg.string() + " --threads 2 --out " + out.string()), 0);
  for (const char* f : {"config.ini", "manifest.txt", "summary.txt", "algebra.csv", "integral_trace.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  std::ifstream in(out / "config.ini");
  const auto echoed = parse_config(in);
  EXPECT_EQ(echoed.seed, 5u);
  EXPECT_EQ(echoed.samples, 4u);
  EXPECT_EQ(run_cli("integrate --config " + cfg.string() + " --seed 7 --threads 1 --out " + (dir / "o2").string()), 0);
  std::ifstream in2(dir / "o2" / "config.ini");
  EXPECT_EQ(parse_config(in2).seed, 7u);
}

TEST(Cli, ExitCodeFollowsTheChecks) {
  const auto dir = scratch("checks");
  const auto cfg = dir / "tiny.ini";
  const std::string text = "[experiment]\nkind = randomise-pathwise\nseed = 3\n[grid]\nlevels = 1, 2, 4\n"
                           "fine_factor = 1\n[mc]\nsamples = 2\n";
  std::ofstream(cfg) << text;
  const bool passed = run_experiment(parse(text)).passed();
  EXPECT_EQ(run_cli("randomise-pathwise --config " + cfg.string() + " --out " + (dir / "out").string()),
            passed ? 0 : 4);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli("no-such-command"), 2);
  EXPECT_EQ(run_cli("filter --threads 0"), 2);
}
