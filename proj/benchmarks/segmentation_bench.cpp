// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "videominer/segmentation.hpp"
#include "videominer/synth.hpp"

namespace videominer {
namespace {

void BM_SegmentScenes(benchmark::State& state) {
  SyntheticSpec spec;
  spec.total_frames = static_cast<std::size_t>(state.range(0));
  spec.width = 64;
  spec.height = 64;
  const SyntheticInstance inst = generate(spec);
  SegmentationConfig cfg;
  cfg.k_scenes = 8;
  for (auto _ : state) benchmark::DoNotOptimize(segment_scenes(inst.frames, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SegmentScenes)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace
}  // namespace videominer
