#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latentforge/generator.hpp"
#include "latentforge/scorer.hpp"
#include "test_support.hpp"

using namespace latentforge;
using testsupport::rel_err;

namespace {

BlobGenerator small_generator(std::uint64_t seed = 7) {
  BlobGenerator::Settings s;
  s.z_dim = 6;
  s.y_dim = 4;
  s.height = 24;
  s.width = 24;
  s.blobs = 3;
  s.seed = seed;
  return BlobGenerator(s);
}

}  // namespace

TEST_CASE("cosine_score on reference vectors") {
  std::vector<double> e{1.0, 0.0};
  CHECK(cosine_score(e, std::vector<double>{1.0, 0.0}) == doctest::Approx(1.0));
  CHECK(cosine_score(e, std::vector<double>{0.0, 1.0}) == doctest::Approx(0.0));
  CHECK(cosine_score(e, std::vector<double>{1.0, 1.0}) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("cosine_score rejects zero-norm inputs") {
  std::vector<double> e{1.0, 0.0}, zero{0.0, 0.0};
  CHECK_THROWS(cosine_score(zero, e));
  CHECK_THROWS(cosine_score(e, zero));
}

TEST_CASE("cosine_score is scale invariant for positive scales") {
  RngStream rng(31, 0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> e(8), f(8);
    for (double& v : e) v = rng.normal();
    for (double& v : f) v = rng.normal();
    double c = rng.uniform(0.1, 10.0);
    std::vector<double> scaled = e;
    for (double& v : scaled) v *= c;
    CHECK(rel_err(cosine_score(scaled, f), cosine_score(e, f)) < 1e-12);
  }
}

TEST_CASE("softclip stays in [0,1] and tracks the hard clamp") {
  for (double v : {-5.0, -0.3, 0.0, 0.2, 0.5, 0.9, 1.0, 1.4, 6.0}) {
    double s = softclip(v, 0.01);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(std::abs(s - std::clamp(v, 0.0, 1.0)) <= 0.01 * std::log(2.0) + 1e-12);
  }
  // interior values pass through essentially unchanged
  CHECK(softclip(0.5, 0.01) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("zero class vector gives a uniform image at the softclip floor") {
  BlobGenerator gen = small_generator();
  LatentCode code;
  code.z.assign(6, 0.5);
  code.y.assign(4, 0.0);  // linear color map -> all blob colors zero
  ImageGrid image = generate(gen, code);
  double floor = softclip(0.0, gen.settings().clip_width);
  CHECK(floor < 0.01);
  for (double v : image.pixels()) CHECK(v == doctest::Approx(floor).epsilon(1e-12));
}

TEST_CASE("generator forward is deterministic") {
  BlobGenerator gen = small_generator();
  RngStream rng(3, 0);
  LatentCode code = testsupport::random_latent(6, 4, rng);
  ImageGrid a = gen.forward(code);
  ImageGrid b = gen.forward(code);
  CHECK(max_abs_diff(a, b) == 0.0);
}

TEST_CASE("generator output stays in [0,1]") {
  BlobGenerator gen = small_generator();
  RngStream rng(4, 0);
  for (int trial = 0; trial < 5; ++trial) {
    ImageGrid image = gen.forward(testsupport::random_latent(6, 4, rng, 1.5));
    for (double v : image.pixels()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("generate validates latent dims") {
  BlobGenerator gen = small_generator();
  LatentCode bad;
  bad.z.assign(2, 0.0);
  bad.y.assign(4, 0.0);
  CHECK_THROWS(generate(gen, bad));
}

TEST_CASE("generator vjp matches central finite differences") {
  BlobGenerator gen = small_generator();
  RngStream rng(11, 0);
  for (int probe = 0; probe < 10; ++probe) {
    LatentCode code = testsupport::random_latent(6, 4, rng);
    CHECK(testsupport::generator_fd_error(gen, code, rng) < 1e-4);
  }
}

TEST_CASE("planted scorer is maximal and stationary at the target") {
  BlobGenerator gen = small_generator();
  RngStream rng(13, 0);
  LatentCode target = testsupport::random_latent(6, 4, rng);
  PlantedScorer scorer(gen, target);
  std::vector<double> e = scorer.embed_text("anything");

  CHECK(scorer.score(e, scorer.target()) == doctest::Approx(1.0));
  LatentScore at_target = score_gradient_wrt_latent(gen, scorer, e, target);
  CHECK(at_target.score == doctest::Approx(1.0));
  double gnorm = 0.0;
  for (double v : at_target.gradient.z) gnorm += v * v;
  for (double v : at_target.gradient.y) gnorm += v * v;
  CHECK(std::sqrt(gnorm) < 1e-8);

  // Any other image scores strictly below the planted maximum.
  for (int trial = 0; trial < 10; ++trial) {
    ImageGrid other = gen.forward(testsupport::random_latent(6, 4, rng));
    if (max_abs_diff(other, scorer.target()) > 0.0)
      CHECK(scorer.score(e, other) < 1.0);
  }
}

TEST_CASE("scorer image vjps match finite differences") {
  BlobGenerator gen = small_generator();
  RngStream rng(17, 0);
  LatentCode target = testsupport::random_latent(6, 4, rng);
  PlantedScorer planted(gen, target);
  HashEmbedScorer hashed(11);
  TwoBasinScorer::Settings basin_settings;
  TwoBasinScorer basins(gen, testsupport::random_latent(6, 4, rng),
                        testsupport::random_latent(6, 4, rng), basin_settings);

  const Scorer* scorers[] = {&planted, &hashed, &basins};
  for (const Scorer* scorer : scorers) {
    std::vector<double> e = scorer->embed_text("query");
    for (int probe = 0; probe < 5; ++probe) {
      ImageGrid image = testsupport::random_image(24, 24, rng, 0.05, 0.95);
      ImageGrid direction = testsupport::random_image(24, 24, rng, -1.0, 1.0);
      ImageGrid grad = scorer->image_vjp(e, image, 1.0);
      double analytic = dot(grad, direction);
      auto f = [&](const ImageGrid& img) { return scorer->score(e, img); };
      ImageGrid plus = image, minus = image;
      axpy(plus, direction, 1e-4);
      axpy(minus, direction, -1e-4);
      double fd = (f(plus) - f(minus)) / 2e-4;
      CHECK(rel_err(analytic, fd) < 1e-4);
    }
  }
}

TEST_CASE("image vjp is linear in the cotangent") {
  BlobGenerator gen = small_generator();
  RngStream rng(19, 0);
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("query");
  ImageGrid image = testsupport::random_image(24, 24, rng);
  ImageGrid g1 = scorer.image_vjp(e, image, 1.0);
  ImageGrid g3 = scorer.image_vjp(e, image, 3.0);
  ImageGrid scaled = g1;
  for (double& v : scaled.pixels()) v *= 3.0;
  CHECK(max_abs_diff(g3, scaled) < 1e-12);
}

TEST_CASE("score_gradient_wrt_latent matches finite differences") {
  BlobGenerator gen = small_generator();
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("a scene");
  RngStream rng(23, 0);
  for (int probe = 0; probe < 10; ++probe) {
    LatentCode code = testsupport::random_latent(6, 4, rng);
    LatentScore ls = score_gradient_wrt_latent(gen, scorer, e, code);

    LatentCode u = testsupport::random_latent(6, 4, rng);
    double analytic = 0.0;
    for (std::size_t i = 0; i < code.z.size(); ++i)
      analytic += ls.gradient.z[i] * u.z[i];
    for (std::size_t i = 0; i < code.y.size(); ++i)
      analytic += ls.gradient.y[i] * u.y[i];

    const double h = 1e-4;
    LatentCode plus = code, minus = code;
    for (std::size_t i = 0; i < code.z.size(); ++i) {
      plus.z[i] += h * u.z[i];
      minus.z[i] -= h * u.z[i];
    }
    for (std::size_t i = 0; i < code.y.size(); ++i) {
      plus.y[i] += h * u.y[i];
      minus.y[i] -= h * u.y[i];
    }
    double fd = (scorer.score(e, gen.forward(plus)) -
                 scorer.score(e, gen.forward(minus))) /
                (2.0 * h);
    CHECK(rel_err(analytic, fd) < 1e-4);
  }
}

TEST_CASE("query overload embeds the text itself") {
  BlobGenerator gen = small_generator();
  HashEmbedScorer scorer(11);
  RngStream rng(37, 0);
  LatentCode code = testsupport::random_latent(6, 4, rng);
  LatentScore by_query = score_gradient_wrt_latent(gen, scorer, "a query", code);
  std::vector<double> e = scorer.embed_text("a query");
  LatentScore by_embedding = score_gradient_wrt_latent(gen, scorer, e, code);
  CHECK(by_query.score == by_embedding.score);
  CHECK(by_query.gradient.z == by_embedding.gradient.z);
}

TEST_CASE("embed_text is unit norm and stable per query") {
  HashEmbedScorer scorer(11);
  std::vector<double> a = scorer.embed_text("a blue dog");
  std::vector<double> b = scorer.embed_text("a blue dog");
  std::vector<double> c = scorer.embed_text("a red cat");
  CHECK(a == b);
  CHECK(a != c);
  double n = 0.0;
  for (double v : a) n += v * v;
  CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-basin scorer labels basins by the nearer target") {
  BlobGenerator gen = small_generator();
  RngStream rng(29, 0);
  LatentCode wrong = testsupport::random_latent(6, 4, rng);
  LatentCode right = testsupport::random_latent(6, 4, rng);
  TwoBasinScorer scorer(gen, wrong, right, {});
  CHECK(scorer.basin_of(scorer.wrong_target()) == 0);
  CHECK(scorer.basin_of(scorer.right_target()) == 1);
}
