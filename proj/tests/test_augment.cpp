#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latentforge/augment.hpp"
#include "latentforge/generator.hpp"
#include "test_support.hpp"

using namespace latentforge;
using testsupport::rel_err;

namespace {

ImageGrid gray_image(int h, int w, double value) { return ImageGrid(h, w, value); }

}  // namespace

TEST_CASE("identity params leave the image unchanged") {
  RngStream rng(1, 0);
  ImageGrid image = testsupport::random_image(16, 16, rng);
  AugmentationParams identity = AugmentationParams::identity();
  CHECK(max_abs_diff(apply(identity, image), image) == 0.0);

  // Neutral values with the stages switched on are also exact identities.
  AugmentationParams neutral;
  neutral.color = true;
  neutral.contrast = 1.0;
  neutral.translate = true;
  neutral.resize = true;
  neutral.scale = 1.0;
  CHECK(max_abs_diff(apply(neutral, image), image) == 0.0);
}

TEST_CASE("brightness shifts one channel on a gray image") {
  ImageGrid image = gray_image(8, 8, 0.5);
  AugmentationParams p;
  p.color = true;
  p.brightness[0] = 0.1;
  p.contrast = 1.0;
  ImageGrid out = apply(p, image);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      CHECK(out.at(y, x, 0) == doctest::Approx(0.6));
      CHECK(out.at(y, x, 1) == doctest::Approx(0.5));
      CHECK(out.at(y, x, 2) == doctest::Approx(0.5));
    }
}

TEST_CASE("contrast scales around mid-gray") {
  ImageGrid image = gray_image(4, 4, 0.75);
  AugmentationParams p;
  p.color = true;
  p.contrast = 1.5;
  ImageGrid out = apply(p, image);
  CHECK(out.at(0, 0, 0) == doctest::Approx(0.875));  // (0.75-0.5)*1.5+0.5
}

TEST_CASE("cutout covering the whole image zeroes it") {
  RngStream rng(2, 0);
  ImageGrid image = testsupport::random_image(12, 12, rng);
  AugmentationParams p;
  p.cutout = true;
  p.cut_size = 12;
  ImageGrid out = apply(p, image);
  for (double v : out.pixels()) CHECK(v == 0.0);
}

TEST_CASE("translation zero-fills vacated pixels and shifts content") {
  ImageGrid image(4, 4);
  image.at(1, 1, 0) = 1.0;
  AugmentationParams p;
  p.translate = true;
  p.dx = 2;
  p.dy = 1;
  ImageGrid out = apply(p, image);
  CHECK(out.at(2, 3, 0) == 1.0);
  CHECK(out.at(1, 1, 0) == 0.0);
  CHECK(out.at(0, 0, 0) == 0.0);
}

TEST_CASE("sampled params respect the configured ranges") {
  AugRanges ranges;
  RngStream rng(3, 0);
  for (int trial = 0; trial < 200; ++trial) {
    AugmentationParams p = sample_params(AugSet::all(), ranges, 32, 32, rng);
    for (double b : p.brightness) {
      CHECK(b >= -0.2);
      CHECK(b <= 0.2);
    }
    CHECK(p.contrast >= 0.5);
    CHECK(p.contrast <= 1.5);
    CHECK(std::abs(p.dx) <= 4);  // floor(0.125 * 32)
    CHECK(std::abs(p.dy) <= 4);
    CHECK(p.scale >= 0.75);
    CHECK(p.scale <= 1.25);
    CHECK(p.cut_size == 8);  // floor(0.25 * 32)
    CHECK(p.cut_y >= 0);
    CHECK(p.cut_y + p.cut_size <= 32);
    CHECK(p.cut_x >= 0);
    CHECK(p.cut_x + p.cut_size <= 32);
  }
}

TEST_CASE("apply vjp matches finite differences per stage and composed") {
  RngStream rng(4, 0);
  AugRanges ranges;
  std::vector<AugSet> sets = {
      {true, false, false, false}, {false, true, false, false},
      {false, false, true, false}, {false, false, false, true},
      AugSet::all()};
  for (const AugSet& set : sets) {
    for (int probe = 0; probe < 4; ++probe) {
      AugmentationParams p = sample_params(set, ranges, 16, 16, rng);
      ImageGrid image = testsupport::random_image(16, 16, rng);
      ImageGrid direction = testsupport::random_image(16, 16, rng, -1.0, 1.0);
      ImageGrid cot = testsupport::random_image(16, 16, rng, -1.0, 1.0);
      double analytic = dot(apply_vjp(p, cot), direction);
      double fd = testsupport::fd_image_directional(
          [&](const ImageGrid& img) { return apply(p, img); }, image,
          direction, cot);
      // Every stage is linear in the pixels, so the tolerance is generous.
      CHECK(rel_err(analytic, fd) < 1e-3);
    }
  }
}

TEST_CASE("augmented score with no stages equals the plain score exactly") {
  BlobGenerator::Settings gs;
  gs.z_dim = 5;
  gs.y_dim = 3;
  gs.height = 16;
  gs.width = 16;
  gs.blobs = 2;
  BlobGenerator gen(gs);
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("plain");
  RngStream rng(5, 0);
  ImageGrid image = gen.forward(testsupport::random_latent(5, 3, rng));
  double plain = scorer.score(e, image);
  for (int n : {1, 3, 16}) {
    AugSpec spec;
    spec.enabled = AugSet::none();
    spec.n_draws = n;
    spec.stream = RngStream(9, static_cast<std::uint64_t>(n));
    CHECK(augmented_score(scorer, e, image, spec).score == plain);
  }
}

TEST_CASE("single draw with a pinned stream equals scoring that draw") {
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("one draw");
  RngStream rng(6, 0);
  ImageGrid image = testsupport::random_image(16, 16, rng);

  AugSpec spec;
  spec.n_draws = 1;
  spec.stream = RngStream(42, 7);
  double estimated = augmented_score(scorer, e, image, spec).score;

  RngStream replay(42, 7);
  AugmentationParams p =
      sample_params(spec.enabled, spec.ranges, 16, 16, replay);
  CHECK(estimated == scorer.score(e, apply(p, image)));
}

TEST_CASE("augmented score is deterministic for a fixed stream") {
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("determinism");
  RngStream rng(7, 0);
  ImageGrid image = testsupport::random_image(16, 16, rng);
  AugSpec spec;
  spec.n_draws = 8;
  spec.stream = RngStream(1234, 5);
  AugScore a = augmented_score(scorer, e, image, spec);
  AugScore b = augmented_score(scorer, e, image, spec);
  CHECK(a.score == b.score);
  CHECK(max_abs_diff(a.gradient, b.gradient) == 0.0);

  // Thread count must not change the reduction.
  AugScore c = augmented_score(scorer, e, image, spec, 4);
  CHECK(c.score == a.score);
  CHECK(max_abs_diff(c.gradient, a.gradient) == 0.0);
}

TEST_CASE("value-only estimator agrees with the full estimator exactly") {
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("value path");
  RngStream rng(10, 0);
  ImageGrid image = testsupport::random_image(16, 16, rng);
  for (int n : {1, 5, 16}) {
    AugSpec spec;
    spec.n_draws = n;
    spec.stream = RngStream(321, static_cast<std::uint64_t>(n));
    CHECK(augmented_score_value(scorer, e, image, spec) ==
          augmented_score(scorer, e, image, spec).score);
  }
  AugSpec none;
  none.enabled = AugSet::none();
  CHECK(augmented_score_value(scorer, e, image, none) ==
        scorer.score(e, image));
}

TEST_CASE("estimator gradient matches finite differences of the estimate") {
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("gradient");
  RngStream rng(8, 0);
  ImageGrid image = testsupport::random_image(16, 16, rng, 0.1, 0.9);
  AugSpec spec;
  spec.n_draws = 6;
  spec.stream = RngStream(77, 3);

  AugScore est = augmented_score(scorer, e, image, spec);
  for (int probe = 0; probe < 5; ++probe) {
    ImageGrid direction = testsupport::random_image(16, 16, rng, -1.0, 1.0);
    double analytic = dot(est.gradient, direction);
    auto f = [&](const ImageGrid& img) {
      return augmented_score(scorer, e, img, spec).score;
    };
    ImageGrid plus = image, minus = image;
    axpy(plus, direction, 1e-4);
    axpy(minus, direction, -1e-4);
    double fd = (f(plus) - f(minus)) / 2e-4;
    CHECK(rel_err(analytic, fd) < 1e-3);
  }
}

TEST_CASE("estimator variance halves when draws double") {
  BlobGenerator::Settings gs;
  gs.z_dim = 5;
  gs.y_dim = 3;
  gs.height = 16;
  gs.width = 16;
  gs.blobs = 2;
  BlobGenerator gen(gs);
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("variance");
  RngStream rng(9, 0);
  ImageGrid image = gen.forward(testsupport::random_latent(5, 3, rng));

  auto variance_at = [&](int draws, std::uint64_t salt) {
    AugSpec spec;
    spec.n_draws = draws;
    double sum = 0.0, sum_sq = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
      spec.stream = RngStream(1000 + salt, 0).substream(r);
      double s = augmented_score(scorer, e, image, spec).score;
      sum += s;
      sum_sq += s * s;
    }
    double mean = sum / reps;
    return (sum_sq / reps - mean * mean) * reps / (reps - 1);
  };

  double v16 = variance_at(16, 1);
  double v32 = variance_at(32, 2);
  CHECK(v16 > 0.0);
  double ratio = v16 / v32;
  CHECK(ratio > 2.0 / 1.25);
  CHECK(ratio < 2.0 * 1.25);
}
