// Copyright 2026 The timebin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "timebin/experiment.hpp"
#include "timebin/protocol.hpp"

namespace {

using namespace timebin;

void BM_ApplyChannelDepolarizing(benchmark::State& state) {
    const DensityOperator rho = run_protocol(ProtocolConfig::full());
    const KrausChannel ch = depolarizing_atom_photon(0.9);
    for (auto _ : state) benchmark::DoNotOptimize(apply_channel(rho, ch));
}
BENCHMARK(BM_ApplyChannelDepolarizing);

void BM_RunProtocolIdeal(benchmark::State& state) {
    const auto cfg = ProtocolConfig::full();
    for (auto _ : state) benchmark::DoNotOptimize(run_protocol(cfg));
}
BENCHMARK(BM_RunProtocolIdeal);

void BM_RunProtocolNoisy(benchmark::State& state) {
    auto cfg = ProtocolConfig::full();
    cfg.noise.rydberg_dephasing = 0.03;
    cfg.noise.blockade_leakage = 0.01;
    cfg.noise.werner_visibility = 0.95;
    for (auto _ : state) benchmark::DoNotOptimize(run_protocol(cfg));
}
BENCHMARK(BM_RunProtocolNoisy);

void BM_SampleCounts(benchmark::State& state) {
    const Preset p = preset("paper-calibrated");
    const auto plan = chsh_plan(p.noise, p.losses, p.detector, ChshAngles{});
    const auto dists = scan_distributions(plan, {0.0});
    const SeedPolicy seeds{7, 1};
    const auto shots = std::uint64_t(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sample_counts(dists.front().front(), shots, p.detector, seeds));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleCounts)->Arg(10000)->Arg(1000000);

void BM_ScanThreads(benchmark::State& state) {
    auto c = parse_config({{"scenario", "entangle-scan"}, {"preset", "paper-calibrated"}, {"shots", 200000}});
    c.threads = unsigned(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_scenario(c));
}
BENCHMARK(BM_ScanThreads)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
