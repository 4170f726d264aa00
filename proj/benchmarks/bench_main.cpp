#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "seqmon/experiments.hpp"
#include "seqmon/limits.hpp"
#include "seqmon/lrv.hpp"
#include "seqmon/monitor.hpp"

namespace {

using namespace seqmon;

std::vector<param_vector> gaussian_scores(std::size_t n, Eigen::Index p,
                                          std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<param_vector> out(n, param_vector(p));
  for (auto& z : out)
    for (Eigen::Index i = 0; i < p; ++i) z(i) = gauss(gen);
  return out;
}

void bm_qs_kernel(benchmark::State& state) {
  double x = 0.0;
  for (auto _ : state) {
    x += 1e-6;
    benchmark::DoNotOptimize(qs_kernel(x));
  }
}
BENCHMARK(bm_qs_kernel);

void bm_lrv_estimate(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto p = static_cast<Eigen::Index>(state.range(1));
  const auto scores = gaussian_scores(m, p, 7);
  const lrv_config cfg{bandwidth_rule(m, bandwidth_strength::weak), true};
  for (auto _ : state) benchmark::DoNotOptimize(lrv_estimate(scores, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_lrv_estimate)->Args({100, 1})->Args({1000, 1})->Args({100, 2})->Args({1000, 2});

void bm_monitor_stream(benchmark::State& state) {
  const std::size_t m = 100;
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = static_cast<Eigen::Index>(state.range(1));
  const auto scores = gaussian_scores(m + n, p, 11);

  monitor_config cfg;
  cfg.m = m;
  cfg.weight = weight_function(0.25);
  cfg.detectors = {detector_kind::E, detector_kind::Q, detector_kind::P};
  cfg.critical_values = {1e9, 1e9, 1e9};
  const lrv_config lrv{bandwidth_rule(m, bandwidth_strength::weak), true};

  for (auto _ : state) {
    monitor mon({scores.data(), m}, cfg, lrv);
    double sink = 0.0;
    for (std::size_t r = m; r < scores.size(); ++r) sink += mon.step(scores[r]).weight;
    benchmark::DoNotOptimize(sink);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(bm_monitor_stream)->Args({1000, 1})->Args({3000, 1})->Args({1000, 2});

void bm_simulate_limit(benchmark::State& state) {
  const limit_spec spec{detector_kind::E, 0.25, static_cast<int>(state.range(0))};
  const mc_settings mc{64, static_cast<std::size_t>(state.range(1)), 42};
  for (auto _ : state) benchmark::DoNotOptimize(simulate_limit(spec, mc, 1));
}
BENCHMARK(bm_simulate_limit)->Args({1, 1000})->Args({1, 5000})->Args({2, 500});

void bm_borodin_quantile(benchmark::State& state) {
  double prob = 0.90;
  for (auto _ : state) {
    prob = prob == 0.90 ? 0.95 : 0.90;
    benchmark::DoNotOptimize(borodin_quantile(prob));
  }
}
BENCHMARK(bm_borodin_quantile);

void bm_generate_ar(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(generate(data_model::m3, 100, n, std::nullopt, ++seed));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(bm_generate_ar)->Arg(1000)->Arg(3000);

}  // namespace

BENCHMARK_MAIN();
