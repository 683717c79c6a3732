#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latentforge/attack.hpp"
#include "latentforge/generator.hpp"
#include "test_support.hpp"

using namespace latentforge;

namespace {

ScoreEval constant_gradient(double g) {
  return [g](const ImageGrid& image) {
    return std::make_pair(0.0, ImageGrid(image.height(), image.width(), g));
  };
}

BlobGenerator small_generator() {
  BlobGenerator::Settings s;
  s.z_dim = 6;
  s.y_dim = 4;
  s.height = 16;
  s.width = 16;
  s.blobs = 3;
  s.seed = 7;
  return BlobGenerator(s);
}

}  // namespace

TEST_CASE("epsilon zero leaves the image unchanged") {
  RngStream rng(1, 0);
  ImageGrid image = testsupport::random_image(8, 8, rng);
  ImageGrid out = fgsm(constant_gradient(1.0), image, 0.0);
  CHECK(max_abs_diff(out, image) == 0.0);
}

TEST_CASE("uniform positive gradient raises every interior pixel by epsilon") {
  ImageGrid image(4, 4, 0.5);
  ImageGrid out = fgsm(constant_gradient(2.5), image, 0.03);
  for (double v : out.pixels()) CHECK(v == doctest::Approx(0.53));
}

TEST_CASE("saturated pixels stay clamped") {
  ImageGrid image(2, 2, 1.0);
  ImageGrid up = fgsm(constant_gradient(1.0), image, 0.1);
  for (double v : up.pixels()) CHECK(v == 1.0);
  ImageGrid zero(2, 2, 0.0);
  ImageGrid down = fgsm(constant_gradient(-1.0), zero, 0.1);
  for (double v : down.pixels()) CHECK(v == 0.0);
}

TEST_CASE("sign of zero gradient is zero") {
  ImageGrid image(2, 2, 0.5);
  ImageGrid out = fgsm(constant_gradient(0.0), image, 0.1);
  CHECK(max_abs_diff(out, image) == 0.0);
}

TEST_CASE("perturbation is bounded by epsilon in the infinity norm") {
  BlobGenerator gen = small_generator();
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("bounded");
  RngStream rng(2, 0);
  double epsilon = 4.0 / 255.0;
  for (int trial = 0; trial < 5; ++trial) {
    ImageGrid image = gen.forward(testsupport::random_latent(6, 4, rng));
    ScoreEval eval = [&](const ImageGrid& img) {
      return std::make_pair(scorer.score(e, img),
                            scorer.image_vjp(e, img, 1.0));
    };
    ImageGrid attacked = fgsm(eval, image, epsilon);
    CHECK(max_abs_diff(attacked, image) <= epsilon + 1e-15);
  }
}

TEST_CASE("zero epsilon yields zero gains") {
  BlobGenerator gen = small_generator();
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("zero eps");
  RngStream rng(3, 0);
  ImageGrid image = gen.forward(testsupport::random_latent(6, 4, rng));
  AugSpec aug;
  aug.n_draws = 4;
  aug.stream = RngStream(5, 5);
  AttackGains gains = attack_gain_report(scorer, aug, e, image, 0.0);
  CHECK(gains.plain == 0.0);
  CHECK(gains.augmented == 0.0);
}

TEST_CASE("gains are deterministic for a fixed augmentation stream") {
  BlobGenerator gen = small_generator();
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("determinism");
  RngStream rng(4, 0);
  ImageGrid image = gen.forward(testsupport::random_latent(6, 4, rng));
  AugSpec aug;
  aug.n_draws = 6;
  aug.stream = RngStream(6, 6);
  AttackGains a = attack_gain_report(scorer, aug, e, image, 4.0 / 255.0);
  AttackGains b = attack_gain_report(scorer, aug, e, image, 4.0 / 255.0);
  CHECK(a.plain == b.plain);
  CHECK(a.augmented == b.augmented);
}

TEST_CASE("plain attack gain is first-order positive") {
  BlobGenerator gen = small_generator();
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("gain sign");
  RngStream rng(5, 0);
  AugSpec aug;
  aug.n_draws = 4;
  for (int trial = 0; trial < 10; ++trial) {
    ImageGrid image = gen.forward(testsupport::random_latent(6, 4, rng));
    aug.stream = RngStream(7, 7).substream(trial);
    AttackGains gains = attack_gain_report(scorer, aug, e, image, 4.0 / 255.0);
    CHECK(gains.plain >= -1e-9);
    CHECK(gains.augmented >= -1e-9);
  }
}

TEST_CASE("averaged score is harder to attack than the plain score") {
  // Small-sample version of the robustness ordering; the 50-seed run lives in
  // the acceptance suite.
  BlobGenerator::Settings gs;
  gs.height = 32;
  gs.width = 32;
  gs.seed = 7;
  BlobGenerator gen(gs);
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("robustness");
  AugSpec aug;
  aug.n_draws = 16;
  int plain_wins = 0;
  const int trials = 10;
  RngStream rng(8, 0);
  for (int trial = 0; trial < trials; ++trial) {
    ImageGrid image = gen.forward(testsupport::random_latent(16, 8, rng));
    aug.stream = RngStream(9, 9).substream(trial);
    AttackGains gains = attack_gain_report(scorer, aug, e, image, 4.0 / 255.0);
    if (gains.plain > gains.augmented) ++plain_wins;
  }
  CHECK(plain_wins >= (trials * 6) / 10);
}

TEST_CASE("non-finite gradients are rejected") {
  ImageGrid image(2, 2, 0.5);
  ScoreEval bad = [](const ImageGrid& img) {
    ImageGrid g(img.height(), img.width(),
                std::numeric_limits<double>::quiet_NaN());
    return std::make_pair(0.0, g);
  };
  CHECK_THROWS(fgsm(bad, image, 0.1));
}
