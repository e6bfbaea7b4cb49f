// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "videominer/synth.hpp"

namespace videominer {
namespace {

void BM_BuildTree(benchmark::State& state) {
  const auto suite = make_suite(1, 3);
  Clients clients = synthetic_clients(
      std::make_shared<SurrogatePolicy>(SurrogatePolicy::random_init(1, 1.0)));
  clients.captioner = std::make_shared<ScriptedCaptioner>(suite[0].captions);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_tree(suite[0].frames, suite[0].question, clients, PipelineConfig{}, seed++));
  }
}
BENCHMARK(BM_BuildTree);

}  // namespace
}  // namespace videominer
