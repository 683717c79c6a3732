#include <benchmark/benchmark.h>

#include "latentforge/augment.hpp"
#include "latentforge/compose.hpp"
#include "latentforge/dbgd.hpp"
#include "latentforge/generator.hpp"
#include "latentforge/perceptual.hpp"
#include "latentforge/poisson.hpp"
#include "latentforge/rng.hpp"
#include "latentforge/scorer.hpp"

namespace {

using namespace latentforge;

BlobGenerator make_gen() {
  BlobGenerator::Settings s;
  return BlobGenerator(s);
}

LatentCode make_code(std::uint64_t seed) {
  RngStream rng(seed, 0);
  LatentCode code;
  code.z.resize(16);
  code.y.resize(8);
  for (double& v : code.z) v = rng.normal();
  for (double& v : code.y) v = rng.normal();
  return truncate_z(std::move(code));
}

void BM_GeneratorForward(benchmark::State& state) {
  BlobGenerator gen = make_gen();
  LatentCode code = make_code(1);
  for (auto _ : state) benchmark::DoNotOptimize(gen.forward(code));
}
BENCHMARK(BM_GeneratorForward);

void BM_GeneratorVjp(benchmark::State& state) {
  BlobGenerator gen = make_gen();
  LatentCode code = make_code(1);
  ImageGrid cot(64, 64, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(gen.vjp(code, cot));
}
BENCHMARK(BM_GeneratorVjp);

void BM_AugmentedScore(benchmark::State& state) {
  BlobGenerator gen = make_gen();
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("benchmark");
  ImageGrid image = gen.forward(make_code(1));
  AugSpec spec;
  spec.n_draws = static_cast<int>(state.range(0));
  spec.stream = RngStream(3, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(augmented_score(scorer, e, image, spec));
}
BENCHMARK(BM_AugmentedScore)->Arg(4)->Arg(16);

void BM_DbgdDirection(benchmark::State& state) {
  RngStream rng(5, 5);
  std::vector<double> gl(state.range(0)), gs(state.range(0));
  for (double& v : gl) v = rng.normal();
  for (double& v : gs) v = rng.normal();
  BarrierSettings settings;
  for (auto _ : state)
    benchmark::DoNotOptimize(dbgd_direction(gl, gs, settings));
}
BENCHMARK(BM_DbgdDirection)->Arg(64)->Arg(4096);

void BM_PerceptualLoss(benchmark::State& state) {
  BlobGenerator gen = make_gen();
  ImageGrid a = gen.forward(make_code(1));
  ImageGrid b = gen.forward(make_code(2));
  PerceptualSettings settings;
  for (auto _ : state)
    benchmark::DoNotOptimize(perceptual_loss_vjp(a, b, settings));
}
BENCHMARK(BM_PerceptualLoss);

void BM_PoissonBlend(benchmark::State& state) {
  BlobGenerator gen = make_gen();
  ImageGrid bg = gen.forward(make_code(1));
  CompositionParams params{0.5, {HAnchor::Center, VAnchor::Center}};
  PasteRegion r = paste_region(params, bg.height(), bg.width());
  ImageGrid fg = downscale_bilinear(gen.forward(make_code(2)), r.height, r.width);
  for (auto _ : state)
    benchmark::DoNotOptimize(poisson_blend(fg, bg, params));
}
BENCHMARK(BM_PoissonBlend);

}  // namespace

BENCHMARK_MAIN();
