#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "wmatch/baselines.hpp"
#include "wmatch/benchmark_gen.hpp"
#include "wmatch/handcrafted.hpp"
#include "wmatch/match.hpp"
#include "wmatch/mining.hpp"
#include "wmatch/synth.hpp"

using namespace wmatch;

namespace {

FeatureMap random_map(Rng& rng, std::uint32_t h, std::uint32_t w, std::uint32_t dim, std::uint32_t scale_id = 0) {
  std::vector<float> v(static_cast<std::size_t>(h) * w * dim);
  for (auto& x : v) x = static_cast<float>(uniform(rng, -1.0, 1.0));
  return normalize_features(FeatureMap(h, w, dim, std::move(v), scale_id));
}

FeaturePyramid random_pyramid(Rng& rng, std::uint32_t dim) {
  FeaturePyramid p;
  const ScaleSet scales;
  for (std::uint32_t s = 0; s < scales.grid_sizes.size(); ++s) {
    p.maps.push_back(random_map(rng, scales.grid_sizes[s], scales.grid_sizes[s], dim, s));
  }
  return p;
}

Image watermark(std::uint64_t seed) {
  Rng rng(seed);
  return randomized_synthetic(random_pattern(256, rng), SynthConfig{}, seed);
}

}  // namespace

// Query grid 22 against the default 5-scale pyramid.
void BM_ScorePair(benchmark::State& state) {
  Rng rng(1);
  const auto dim = static_cast<std::uint32_t>(state.range(0));
  const auto q = random_map(rng, 22, 22, dim);
  const auto p = random_pyramid(rng, dim);
  for (auto _ : state) benchmark::DoNotOptimize(score_pair(q, p, kDefaultSigmaCells).total);
}
BENCHMARK(BM_ScorePair)->Arg(9)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

// Flat backgrounds: many exact ties in the rescoring pass.
void BM_ScorePairTies(benchmark::State& state) {
  Rng rng(2);
  const Image img = plain_synthetic(random_pattern(256, rng));
  const HandcraftedExtractor ex;
  const ScaleSet scales;
  const auto q = extract_query_map(img, ex, scales);
  const auto p = extract_pyramid(img, ex, scales, OrientationId(0));
  for (auto _ : state) benchmark::DoNotOptimize(score_pair(q, p, kDefaultSigmaCells).total);
}
BENCHMARK(BM_ScorePairTies)->Unit(benchmark::kMillisecond);

void BM_ExtractPyramid(benchmark::State& state) {
  const Image img = watermark(3);
  const HandcraftedExtractor ex;
  const ScaleSet scales;
  for (auto _ : state) benchmark::DoNotOptimize(extract_pyramid(img, ex, scales, OrientationId(5)));
}
BENCHMARK(BM_ExtractPyramid)->Unit(benchmark::kMillisecond);

// Stage-1 comparison of one query baseline map against one reference.
void BM_Stage1(benchmark::State& state) {
  Rng rng(4);
  const auto kind = static_cast<GlobalSimilarity>(state.range(0));
  const auto a = random_map(rng, 14, 14, 64), b = random_map(rng, 14, 14, 64);
  for (auto _ : state) benchmark::DoNotOptimize(global_similarity(kind, a, b));
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_Stage1)->DenseRange(0, 2);

void BM_HardNegative(benchmark::State& state) {
  Rng rng(5);
  std::vector<FeaturePyramid> set;
  for (int i = 0; i < state.range(0); ++i) set.push_back(random_pyramid(rng, 9));
  const auto anchor = random_map(rng, 1, 1, 9);
  for (auto _ : state) benchmark::DoNotOptimize(mine_hard_negative(anchor.cell(0), set).fs);
}
BENCHMARK(BM_HardNegative)->Arg(8)->Arg(64);

void BM_RandomizedSynthetic(benchmark::State& state) {
  Rng rng(6);
  const auto pattern = random_pattern(256, rng);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(randomized_synthetic(pattern, SynthConfig{}, ++seed).pixels.data());
}
BENCHMARK(BM_RandomizedSynthetic)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
