// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// fails. Each criterion pins its tolerances and runtime budget in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "latentforge/attack.hpp"
#include "latentforge/bench.hpp"
#include "latentforge/commands.hpp"
#include "latentforge/compose.hpp"
#include "latentforge/dbgd.hpp"
#include "latentforge/optimize.hpp"
#include "latentforge/poisson.hpp"
#include "latentforge/ppm.hpp"
#include "poisson_oracle.hpp"
#include "test_support.hpp"

using namespace latentforge;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

// --------------------------------------------------------------------------
// 1. Barrier identity on random gradient pairs.
Check criterion_barrier_identity() {
  Check check;
  BarrierSettings settings;
  RngStream rng(1001, 0);
  double worst = 1e9;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> gl(10), gs(10);
    for (double& v : gl) v = rng.normal();
    for (double& v : gs) v = rng.normal();
    Direction d = dbgd_direction(gl, gs, settings);
    double ns2 = 0.0, lhs = 0.0;
    for (int i = 0; i < 10; ++i) {
      ns2 += gs[i] * gs[i];
      lhs += -d.v[i] * gs[i];
    }
    worst = std::min(worst, lhs - settings.beta * ns2);
    check.expect(lhs >= settings.beta * ns2 - 1e-12, "identity violated");
    check.expect(d.lambda >= 0.0, "negative lambda");
  }
  check.note("worst margin " + std::to_string(worst));
  return check;
}

// --------------------------------------------------------------------------
// 2. Quadratic bi-level oracle, forward and inverse.
Check criterion_bilevel_oracle() {
  Check check;
  QuadraticOracleResult oracle = run_quadratic_oracle(2000, 2e-3);
  check.expect(oracle.dist_dbgd < 1e-2,
               "dbgd endpoint off by " + std::to_string(oracle.dist_dbgd));
  check.expect(oracle.dist_inverse < 1e-2,
               "inverse endpoint off by " + std::to_string(oracle.dist_inverse));
  check.expect(oracle.s_dbgd - oracle.s_inverse >= 0.5,
               "score gap " + std::to_string(oracle.s_dbgd - oracle.s_inverse));
  check.note("dist_dbgd " + std::to_string(oracle.dist_dbgd) + ", s_gap " +
             std::to_string(oracle.s_dbgd - oracle.s_inverse));
  return check;
}

// --------------------------------------------------------------------------
// 3. Planted fuse toy problem: barrier descent cuts the perceptual loss by
//    >= 30% at a fused score within 2% of pure ascent, 64x64.
Check criterion_fuse_tradeoff() {
  Check check;
  BlobGenerator::Settings gs;  // 64x64 defaults
  BlobGenerator gen(gs);
  RngStream rng(3001, 0);

  LatentCode fg_star = truncate_z(testsupport::random_latent(16, 8, rng));
  LatentCode bg_star = truncate_z(testsupport::random_latent(16, 8, rng));
  CompositionParams params{0.5, {HAnchor::Center, VAnchor::Center}};
  PasteRegion region = paste_region(params, 64, 64);
  ImageGrid target =
      fuse(downscale_bilinear(gen.forward(fg_star), region.height, region.width),
           gen.forward(bg_star), params);
  PlantedScorer scorer(std::move(target));
  std::vector<double> e = scorer.embed_text("fuse toy");

  std::vector<LatentCode> init_fg{truncate_z(testsupport::random_latent(16, 8, rng)),
                                  truncate_z(testsupport::random_latent(16, 8, rng))};
  std::vector<LatentCode> init_bg{truncate_z(testsupport::random_latent(16, 8, rng)),
                                  truncate_z(testsupport::random_latent(16, 8, rng))};

  AugSpec no_aug;
  no_aug.enabled = AugSet::none();
  OptimSettings opt;
  opt.lr = 0.01;
  opt.iterations = 400;
  PerceptualSettings perceptual;

  BarrierSettings dbgd;
  ComposeResult with_barrier = compose_optimize(
      gen, scorer, e, init_fg, init_bg, params, dbgd, opt, no_aug, perceptual);

  BarrierSettings ascent_only;
  ascent_only.variant = BarrierSettings::Variant::Linear;
  ascent_only.lambda_fixed = 1.0;  // v = -grad s
  ComposeResult pure_ascent =
      compose_optimize(gen, scorer, e, init_fg, init_bg, params, ascent_only,
                       opt, no_aug, perceptual);

  double l_dbgd = with_barrier.trace.rows().back().loss;
  double l_only = pure_ascent.trace.rows().back().loss;
  double s_dbgd = with_barrier.trace.rows().back().score;
  double s_only = pure_ascent.trace.rows().back().score;
  check.expect(l_dbgd <= 0.7 * l_only,
               "loss reduction " + std::to_string(1.0 - l_dbgd / l_only));
  check.expect(s_dbgd >= s_only - 0.02 * std::abs(s_only),
               "score sacrificed: " + std::to_string(s_only - s_dbgd));
  check.note("l " + std::to_string(l_only) + " -> " + std::to_string(l_dbgd) +
             ", s " + std::to_string(s_only) + " vs " + std::to_string(s_dbgd));
  return check;
}

// --------------------------------------------------------------------------
// 4. FGSM gains: plain beats averaged on >= 80% of 50 seeds at eps = 4/255.
Check criterion_attack_robustness() {
  Check check;
  BlobGenerator::Settings gs;  // 64x64 defaults
  BlobGenerator gen(gs);
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("attack robustness");
  auto table = make_class_table(7, 32, 8);

  AugSpec aug;
  aug.n_draws = 16;
  int plain_wins = 0;
  const int seeds = 50;
  for (int i = 0; i < seeds; ++i) {
    LatentCode code = sample_latent(gen.dims(), table,
                                    RngStream(4001, 0).substream(i));
    ImageGrid image = generate(gen, code);
    AugSpec fixed = aug.with_stream(RngStream(4002, 0).substream(i));
    AttackGains gains =
        attack_gain_report(scorer, fixed, e, image, 4.0 / 255.0);
    if (gains.plain > gains.augmented) ++plain_wins;
  }
  check.expect(plain_wins >= 40, "plain won only " + std::to_string(plain_wins) +
                                     "/50");
  check.note(std::to_string(plain_wins) + "/50 seeds");
  return check;
}

// --------------------------------------------------------------------------
// 5. Two-basin stagnation: the averaged objective escapes on at least twice
//    as many seeds as the plain score.
Check criterion_stagnation() {
  Check check;
  RunConfig config = parse_config_text(R"({
    "seed": 5001,
    "generator": {"height": 32, "width": 32, "z_dim": 8, "y_dim": 4, "blobs": 3},
    "init": {"classes": 8},
    "bench": {"seeds": 20, "iters": 150, "lr": 0.02, "n_draws": 8}
  })");
  StagnationResult result = run_stagnation_benchmark(config, 1);
  check.expect(result.augmented_escapes >= 2 * result.plain_escapes,
               "aug " + std::to_string(result.augmented_escapes) + " vs plain " +
                   std::to_string(result.plain_escapes));
  check.expect(result.augmented_escapes >= 1, "no escapes at all");
  check.note("aug " + std::to_string(result.augmented_escapes) + "/20, plain " +
             std::to_string(result.plain_escapes) + "/20");
  return check;
}

// --------------------------------------------------------------------------
// 6. k-ablation: selection and over-parameterization help monotonically.
Check criterion_k_ablation() {
  Check check;
  RunConfig config = parse_config_text(R"({
    "seed": 6001,
    "generator": {"height": 32, "width": 32, "z_dim": 8, "y_dim": 4, "blobs": 3},
    "scorer": {"kind": "planted", "planted_target_seed": 9},
    "init": {"classes": 8},
    "bench": {"seeds": 20, "iters": 150, "lr": 0.02}
  })");
  KAblationResult result = run_k_ablation(config, 1);
  check.expect(result.success_m1000_k5 >= result.success_m1_k1,
               "success " + std::to_string(result.success_m1000_k5) + " < " +
                   std::to_string(result.success_m1_k1));
  check.expect(result.success_m1000_k5 >= result.success_m1000_k1,
               "k5 success below k1 at matched init pool");
  check.expect(result.mean_k1 <= result.mean_k5 + 1e-12 &&
                   result.mean_k5 <= result.mean_k10 + 1e-12,
               "means not monotone");
  check.note("success m1k1 " + std::to_string(result.success_m1_k1) +
             "/20, m1000k5 " + std::to_string(result.success_m1000_k5) +
             "/20; means " + std::to_string(result.mean_k1) + " <= " +
             std::to_string(result.mean_k5) + " <= " +
             std::to_string(result.mean_k10));
  return check;
}

// --------------------------------------------------------------------------
// 7. Finite-difference checks for every vjp.
Check criterion_gradient_checks() {
  Check check;
  BlobGenerator::Settings gs;
  gs.z_dim = 8;
  gs.y_dim = 4;
  gs.height = 24;
  gs.width = 24;
  gs.blobs = 3;
  BlobGenerator gen(gs);
  RngStream rng(7001, 0);

  for (int probe = 0; probe < 10; ++probe) {
    LatentCode code = testsupport::random_latent(8, 4, rng);
    double err = testsupport::generator_fd_error(gen, code, rng);
    check.expect(err < 1e-4, "generator fd " + std::to_string(err));
  }

  PlantedScorer planted(gen, truncate_z(testsupport::random_latent(8, 4, rng)));
  HashEmbedScorer hashed(11);
  TwoBasinScorer basins(gen, testsupport::random_latent(8, 4, rng),
                        testsupport::random_latent(8, 4, rng), {});
  const Scorer* scorers[] = {&planted, &hashed, &basins};
  const char* scorer_names[] = {"planted", "hash", "two-basin"};
  for (int s = 0; s < 3; ++s) {
    std::vector<double> e = scorers[s]->embed_text("fd");
    for (int probe = 0; probe < 10; ++probe) {
      ImageGrid image = testsupport::random_image(24, 24, rng, 0.05, 0.95);
      ImageGrid dir = testsupport::random_image(24, 24, rng, -1.0, 1.0);
      double analytic = dot(scorers[s]->image_vjp(e, image, 1.0), dir);
      ImageGrid plus = image, minus = image;
      axpy(plus, dir, 1e-4);
      axpy(minus, dir, -1e-4);
      double fd =
          (scorers[s]->score(e, plus) - scorers[s]->score(e, minus)) / 2e-4;
      check.expect(testsupport::rel_err(analytic, fd) < 1e-4,
                   std::string(scorer_names[s]) + " scorer fd");
    }
  }

  AugRanges ranges;
  std::vector<std::pair<const char*, AugSet>> stages = {
      {"color", {true, false, false, false}},
      {"translate", {false, true, false, false}},
      {"resize", {false, false, true, false}},
      {"cutout", {false, false, false, true}}};
  for (auto& [name, set] : stages)
    for (int probe = 0; probe < 10; ++probe) {
      AugmentationParams p = sample_params(set, ranges, 24, 24, rng);
      ImageGrid image = testsupport::random_image(24, 24, rng);
      ImageGrid dir = testsupport::random_image(24, 24, rng, -1.0, 1.0);
      ImageGrid cot = testsupport::random_image(24, 24, rng, -1.0, 1.0);
      double analytic = dot(apply_vjp(p, cot), dir);
      double fd = testsupport::fd_image_directional(
          [&](const ImageGrid& img) { return apply(p, img); }, image, dir, cot);
      check.expect(testsupport::rel_err(analytic, fd) < 1e-3,
                   std::string(name) + " fd");
    }

  PerceptualSettings perceptual;
  for (int probe = 0; probe < 10; ++probe) {
    ImageGrid a = testsupport::random_image(24, 24, rng, 0.1, 0.9);
    ImageGrid b = testsupport::random_image(24, 24, rng, 0.1, 0.9);
    ImageGrid dir = testsupport::random_image(24, 24, rng, -1.0, 1.0);
    PerceptualVjp vjp = perceptual_loss_vjp(a, b, perceptual);
    ImageGrid plus = a, minus = a;
    axpy(plus, dir, 1e-4);
    axpy(minus, dir, -1e-4);
    double fd = (perceptual_loss(plus, b, perceptual) -
                 perceptual_loss(minus, b, perceptual)) /
                2e-4;
    check.expect(testsupport::rel_err(dot(vjp.grad_a, dir), fd) < 1e-4,
                 "perceptual fd");
  }

  CompositionParams params{0.6, {HAnchor::Left, VAnchor::Bottom}};
  for (int probe = 0; probe < 10; ++probe) {
    ImageGrid fg = testsupport::random_image(24, 24, rng);
    ImageGrid bg = testsupport::random_image(24, 24, rng);
    ImageGrid cot = testsupport::random_image(24, 24, rng, -1.0, 1.0);
    ImageGrid dir = testsupport::random_image(24, 24, rng, -1.0, 1.0);
    FuseVjp vjp = fuse_vjp(params, 24, 24, cot);
    double fd_fg = testsupport::fd_image_directional(
        [&](const ImageGrid& img) { return fuse(img, bg, params); }, fg, dir,
        cot);
    check.expect(testsupport::rel_err(dot(vjp.fg_cotangent, dir), fd_fg) < 1e-3,
                 "fuse fg fd");
    double fd_bg = testsupport::fd_image_directional(
        [&](const ImageGrid& img) { return fuse(fg, img, params); }, bg, dir,
        cot);
    check.expect(testsupport::rel_err(dot(vjp.bg_cotangent, dir), fd_bg) < 1e-3,
                 "fuse bg fd");
  }
  return check;
}

// --------------------------------------------------------------------------
// 8. Monte Carlo estimator: variance halves when draws double.
Check criterion_estimator_variance() {
  Check check;
  BlobGenerator::Settings gs;
  gs.z_dim = 8;
  gs.y_dim = 4;
  gs.height = 32;
  gs.width = 32;
  gs.blobs = 3;
  BlobGenerator gen(gs);
  HashEmbedScorer scorer(11);
  std::vector<double> e = scorer.embed_text("variance");
  RngStream rng(8001, 0);
  ImageGrid image = gen.forward(testsupport::random_latent(8, 4, rng));

  auto variance_at = [&](int draws, std::uint64_t salt) {
    AugSpec spec;
    spec.n_draws = draws;
    const int reps = 200;
    double sum = 0.0, sum_sq = 0.0;
    for (int r = 0; r < reps; ++r) {
      spec.stream = RngStream(8100 + salt, 0).substream(r);
      double s = augmented_score(scorer, e, image, spec).score;
      sum += s;
      sum_sq += s * s;
    }
    double mean = sum / reps;
    return (sum_sq / reps - mean * mean) * reps / (reps - 1);
  };
  double v16 = variance_at(16, 1);
  double v32 = variance_at(32, 2);
  double ratio = v16 / v32;
  check.expect(ratio > 2.0 / 1.25 && ratio < 2.0 * 1.25,
               "ratio " + std::to_string(ratio));
  check.note("var16/var32 = " + std::to_string(ratio));
  return check;
}

// --------------------------------------------------------------------------
// 9. Poisson blending against the dense direct solve.
Check criterion_poisson() {
  Check check;
  RngStream rng(9001, 0);
  CompositionParams params{0.5, {HAnchor::Center, VAnchor::Center}};
  for (int size : {8, 16}) {
    ImageGrid bg = testsupport::random_image(size, size, rng);
    PasteRegion r = paste_region(params, size, size);
    ImageGrid fg = testsupport::random_image(r.height, r.width, rng);
    PoissonResult cg = poisson_blend(fg, bg, params);
    check.expect(cg.converged && cg.residual_inf < 1e-6,
                 "residual " + std::to_string(cg.residual_inf));
    ImageGrid direct = testsupport::dense_poisson_oracle(fg, bg, params);
    double diff = max_abs_diff(cg.image, direct);
    check.expect(diff < 1e-5, "dense mismatch " + std::to_string(diff));
  }
  // Identical source: background restored bit-exactly after clamping.
  ImageGrid bg = testsupport::random_image(16, 16, rng);
  ImageGrid patch = crop(bg, params);
  PoissonResult same = poisson_blend(patch, bg, params);
  check.expect(max_abs_diff(same.image, bg) == 0.0, "identical-source not exact");
  return check;
}

// --------------------------------------------------------------------------
// 10. Reference constants in the resolved default config.
Check criterion_default_constants() {
  Check check;
  RunConfig defaults = parse_config_text("{}");
  nlohmann::json j = nlohmann::json::parse(resolved_config_json(defaults));
  check.expect(j["init"]["M"] == 10000, "init.M");
  check.expect(j["init"]["batch"] == 10, "init.batch");
  check.expect(j["opt"]["lr"] == 5e-3, "opt.lr");
  check.expect(j["opt"]["iters"] == 1000, "opt.iters");
  check.expect(j["dbgd"]["beta"] == 1.0, "dbgd.beta");
  check.expect(kDefaultZBound == 2.0, "z bound constant");
  BasisEnsemble probe({LatentCode{{5.0, -5.0}, {}}}, {1.0});
  LatentCode truncated = effective_code(probe);
  check.expect(truncated.z[0] == 2.0 && truncated.z[1] == -2.0, "z truncation");
  check.expect(composition_grid_from(defaults).size() == 18, "grid size");
  return check;
}

// --------------------------------------------------------------------------
// 11. Byte-identical artifacts across reruns and thread counts.
Check criterion_determinism() {
  Check check;
  auto config_text = R"({
    "query": "determinism",
    "seed": 1101,
    "generator": {"height": 16, "width": 16, "z_dim": 6, "y_dim": 4, "blobs": 2},
    "aug": {"n_draws": 2},
    "opt": {"lr": 0.01, "iters": 4},
    "init": {"M": 6, "k": 2, "batch": 2, "classes": 4},
    "compose": {"alphas": [0.5], "positions": ["center-center", "right-bottom"]}
  })";

  fs::path opt1 = fresh_dir("lf_acc_opt1"), opt2 = fresh_dir("lf_acc_opt2");
  RunConfig c = parse_config_text(config_text);
  c.out = opt1.string();
  check.expect(run_optimize(c, 1) == 0, "optimize run 1");
  RunConfig c2 = parse_config_text(slurp(opt1 / "resolved_config.json"));
  c2.out = opt2.string();
  check.expect(run_optimize(c2, 4) == 0, "optimize run 2");
  for (const char* name : {"final.ppm", "trace.csv", "init_topk.csv"})
    check.expect(slurp(opt1 / name) == slurp(opt2 / name),
                 std::string("optimize artifact ") + name);

  fs::path cmp1 = fresh_dir("lf_acc_cmp1"), cmp2 = fresh_dir("lf_acc_cmp2");
  RunConfig d = parse_config_text(config_text);
  d.out = cmp1.string();
  check.expect(run_compose(d, 1) == 0, "compose run 1");
  RunConfig d2 = parse_config_text(slurp(cmp1 / "resolved_config.json"));
  d2.out = cmp2.string();
  check.expect(run_compose(d2, 4) == 0, "compose run 2");
  for (const char* name : {"fused.ppm", "blended.ppm", "grid_results.csv"})
    check.expect(slurp(cmp1 / name) == slurp(cmp2 / name),
                 std::string("compose artifact ") + name);
  for (int j = 0; j < 2; ++j) {
    std::string rel = "cand_" + std::to_string(j) + "/trace.csv";
    check.expect(slurp(cmp1 / rel) == slurp(cmp2 / rel),
                 "compose artifact " + rel);
  }
  return check;
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Check()> body;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "dbgd barrier identity (1000 pairs, dim 10)", 1.0,
       criterion_barrier_identity},
      {2, "quadratic bi-level oracle, forward and inverse", 5.0,
       criterion_bilevel_oracle},
      {3, "fuse trade-off: loss down 30% at matched score (64x64)", 120.0,
       criterion_fuse_tradeoff},
      {4, "fgsm gain ordering on 50 seeds (64x64, n_draws=16)", 60.0,
       criterion_attack_robustness},
      {5, "two-basin escape ratio (20 seeds)", 120.0, criterion_stagnation},
      {6, "k-ablation success and monotone means (20 seeds)", 300.0,
       criterion_k_ablation},
      {7, "finite-difference checks for every vjp", 30.0,
       criterion_gradient_checks},
      {8, "estimator variance halves when draws double", 30.0,
       criterion_estimator_variance},
      {9, "poisson blend matches the dense direct solve", 10.0,
       criterion_poisson},
      {10, "resolved default config carries the reference constants", 1.0,
       criterion_default_constants},
      {11, "byte-identical artifacts across reruns and threads", 60.0,
       criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = criterion.body();
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail = std::string("exception: ") + e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    bool in_budget = elapsed < criterion.budget_seconds;
    bool pass = check.ok && in_budget;
    if (!pass) ++failures;
    std::printf("[%s] criterion %2d: %s (%.2fs / %.0fs budget)%s%s\n",
                pass ? "PASS" : "FAIL", criterion.id, criterion.name.c_str(),
                elapsed, criterion.budget_seconds,
                check.detail.empty() ? "" : " -- ", check.detail.c_str());
    std::fflush(stdout);
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
