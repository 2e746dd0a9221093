#include <benchmark/benchmark.h>

#include <cmath>

#include "roughkit/filtering.hpp"
#include "roughkit/lift.hpp"
#include "roughkit/meanfield.hpp"
#include "roughkit/parallel.hpp"
#include "roughkit/rough_integral.hpp"
#include "roughkit/rsde.hpp"
#include "roughkit/volpricing.hpp"

using namespace roughkit;

namespace {

using Span = std::span<const double>;
using Out = std::span<double>;

RsdeSpec nonlinear_spec() {
  RsdeSpec s;
  s.drift = [](double, Span x, const DriverView&, Out o) { o[0] = -x[0]; };
  s.brownian = [](double, Span, const DriverView&, Out o) { o[0] = 0.3; };
  s.rough = [](double, Span x, const DriverView&, Out o) { o[0] = 0.5 * std::sin(x[0]); };
  return s;
}

void BM_SampleItoLift(benchmark::State& state) {
  const auto grid = make_grid(1.0, state.range(0));
  Seed seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_bm_lift(2, grid, 16, ++seed, LiftConvention::ito));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 16);
}
BENCHMARK(BM_SampleItoLift)->Arg(64)->Arg(512);

void BM_ChenIncrement(benchmark::State& state) {
  const auto rp = sample_bm_lift(3, make_grid(1.0, state.range(0)), 4, 1, LiftConvention::ito);
  for (auto _ : state) benchmark::DoNotOptimize(chen_increment(rp, 0, rp.intervals()));
}
BENCHMARK(BM_ChenIncrement)->Arg(64)->Arg(1024);

void BM_DavieSelfIntegral(benchmark::State& state) {
  const auto rp = sample_bm_lift(2, make_grid(1.0, state.range(0)), 4, 2, LiftConvention::ito);
  const auto cp = self_integrand(rp);
  for (auto _ : state) benchmark::DoNotOptimize(rough_integral(cp, rp, 0, rp.intervals()));
}
BENCHMARK(BM_DavieSelfIntegral)->Arg(64)->Arg(1024);

void BM_SolveRsde(benchmark::State& state) {
  const std::size_t ff = 4;
  const auto rp = sample_bm_lift(1, make_grid(1.0, state.range(0)), ff, 3, LiftConvention::ito);
  const auto bm = sample_brownian(rp.grid().refine(ff), 1, 4);
  const auto spec = nonlinear_spec();
  const double x0[] = {1.0};
  for (auto _ : state) benchmark::DoNotOptimize(solve_rsde(spec, rp, bm, x0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SolveRsde)->Arg(64)->Arg(512);

void BM_RoughFilter(benchmark::State& state) {
  set_thread_count(1);
  const auto params = scalar_linear_params(-1.0, 1.0, 0.5, 0.3, 0.0, 1.0);
  const auto model = linear_filter_model(params);
  const auto grid = make_grid(1.0, 64);
  const auto obs = simulate_signal_observation(model, grid, 8, 5, Measure::signal);
  const auto rp = hardwire_bracket(obs.observation, 1, grid, 8);
  const TestFunction phis[] = {{"x", [](Span x) { return x[0]; }}};
  for (auto _ : state) benchmark::DoNotOptimize(rough_filter(model, rp, phis, state.range(0), 6));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RoughFilter)->Arg(1000);

void BM_LsvJoint(benchmark::State& state) {
  set_thread_count(1);
  LsvModel model;
  model.rho = [](double) { return 0.7; };
  model.variance = {VarianceKind::cir, 1.0, 2.0, 1.0, 0.5};
  const auto grid = make_grid(1.0, 64);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_lsv_joint(model, grid, 4, state.range(0), 7));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LsvJoint)->Arg(1000);

void BM_MkvParticles(benchmark::State& state) {
  set_thread_count(1);
  MkvSpec s;
  s.features = {parse_feature("mean:0")};
  s.drift = [](Span x, Span m, Out o) { o[0] = m[0] - x[0]; };
  s.brownian = [](Span, Span, Out o) { o[0] = 0.5; };
  s.rough = [](Span, Span m, Out o) { o[0] = 0.3 + 0.5 * m[0]; };
  s.initial = [](Rng& r, Out o) { o[0] = 0.5 + 0.5 * r.normal(); };
  const auto rp = sample_bm_lift(1, make_grid(1.0, 64), 4, 8, LiftConvention::ito);
  for (auto _ : state) benchmark::DoNotOptimize(solve_mkv_rsde_particles(s, rp, state.range(0), 1, 9));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MkvParticles)->Arg(100)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();
