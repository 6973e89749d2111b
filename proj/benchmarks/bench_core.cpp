#include <benchmark/benchmark.h>

#include "risopt/optimizer.hpp"

using namespace risopt;

namespace {

SystemModel default_system() {
  return {synthesize_components(default_scene()).components, default_varactor(), 1.0,
          noise_power(900.0, 40e6)};
}

RisConfiguration layout(std::size_t columns_per_group, ControlMode mode) {
  return uniform_configuration(column_grouping(20, 1, columns_per_group), 20, 0.38e-12, mode);
}

void BM_SceneSynthesis(benchmark::State& state) {
  const auto scene = default_scene();
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_components(scene));
}
BENCHMARK(BM_SceneSynthesis)->Unit(benchmark::kMillisecond);

void BM_ChannelAssembly(benchmark::State& state) {
  const auto system = default_system();
  const auto config = layout(1, ControlMode::ContinuousPerColumn);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_effective_channel(system.components, system.varactor, config));
  }
}
BENCHMARK(BM_ChannelAssembly);

void BM_DualityBeamformer(benchmark::State& state) {
  const auto system = default_system();
  const auto h = assemble_effective_channel(system.components, system.varactor,
                                            layout(1, ControlMode::ContinuousPerColumn));
  for (auto _ : state) benchmark::DoNotOptimize(duality_beamformer(h, system.p_bs, system.sigma2));
}
BENCHMARK(BM_DualityBeamformer);

void BM_MinSinrGradient(benchmark::State& state) {
  const auto system = default_system();
  const auto config = layout(1, ControlMode::ContinuousPerColumn);
  const auto h = assemble_effective_channel(system.components, system.varactor, config);
  const auto w = duality_beamformer(h, system.p_bs, system.sigma2).beamformer;
  std::size_t g = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_sinr_gradient(h, config, w, system.sigma2, g));
    g = (g + 1) % config.groups.size();
  }
}
BENCHMARK(BM_MinSinrGradient);

void BM_AlternatingOptimize(benchmark::State& state) {
  const auto system = default_system();
  BcdSettings s;
  s.objective = state.range(0) == 0 ? LineSearchObjective::ReoptimizedBeamformer
                                    : LineSearchObjective::FixedBeamformer;
  for (auto _ : state) {
    benchmark::DoNotOptimize(alternating_optimize(system, layout(1, ControlMode::ContinuousPerColumn), s));
  }
}
BENCHMARK(BM_AlternatingOptimize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Exhaustive1Bit(benchmark::State& state) {
  const auto system = default_system();
  SearchOptions options;
  options.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        exhaustive_1bit_search(system, layout(2, ControlMode::ColumnPairedOneBit), options));
  }
}
BENCHMARK(BM_Exhaustive1Bit)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
