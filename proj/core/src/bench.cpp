#include "latentforge/bench.hpp"

#include <cmath>

#include "latentforge/parallel.hpp"

namespace latentforge {

namespace {

constexpr std::uint64_t kStagnationInitStream = 501;
constexpr std::uint64_t kStagnationAugStream = 502;
constexpr std::uint64_t kAblationStream = 503;
constexpr std::uint64_t kAblationAugStream = 504;

}  // namespace

StagnationResult run_stagnation_benchmark(const RunConfig& config,
                                          int threads) {
  auto generator = make_generator(config.generator);
  auto table = class_table_for(config);
  LatentCode wrong =
      latent_from_seed(config.scorer.basin.wrong_seed, generator->dims(), table);
  LatentCode right =
      latent_from_seed(config.scorer.basin.right_seed, generator->dims(), table);
  TwoBasinScorer::Settings basin;
  basin.sigma_narrow = config.scorer.basin.sigma_narrow;
  basin.sigma_broad = config.scorer.basin.sigma_broad;
  basin.amp_narrow = config.scorer.basin.amp_narrow;
  basin.amp_broad = config.scorer.basin.amp_broad;
  basin.seed = config.scorer.seed;
  TwoBasinScorer scorer(*generator, wrong, right, basin);
  std::vector<double> embedding =
      scorer.embed_text(config.query.empty() ? "bench" : config.query);

  OptimSettings opt;
  opt.lr = config.bench.lr;
  opt.iterations = config.bench.iters;

  AugSpec plain_spec;
  plain_spec.enabled = AugSet::none();

  AugSpec aug_spec;
  aug_spec.enabled = parse_aug_set(config.aug.enabled);
  aug_spec.n_draws = config.bench.n_draws;
  aug_spec.ranges = config.aug.ranges;

  const int n = config.bench.seeds;
  StagnationResult out;
  out.plain.resize(n);
  out.augmented.resize(n);

  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    RngStream init_rng =
        RngStream(config.seed, kStagnationInitStream).substream(i);
    LatentCode init = wrong;
    for (double& v : init.z) v += config.bench.init_noise * init_rng.normal();
    init = truncate_z(std::move(init));

    SingleRunResult plain = optimize_single(*generator, scorer, embedding,
                                            {init}, opt, plain_spec);
    out.plain[i] = {static_cast<int>(i), plain.trace.rows().back().score,
                    scorer.basin_of(plain.image)};

    AugSpec seeded = aug_spec.with_stream(
        RngStream(config.seed, kStagnationAugStream).substream(i));
    SingleRunResult augmented =
        optimize_single(*generator, scorer, embedding, {init}, opt, seeded);
    out.augmented[i] = {static_cast<int>(i),
                        augmented.trace.rows().back().score,
                        scorer.basin_of(augmented.image)};
  });

  for (const StagnationRun& r : out.plain) out.plain_escapes += r.basin;
  for (const StagnationRun& r : out.augmented) out.augmented_escapes += r.basin;
  return out;
}

QuadraticOracleResult run_quadratic_oracle(long steps, double lr) {
  BiObjective objective = [](std::span<const double> x) {
    BiObjectiveEval e;
    e.score = -x[0] * x[0];
    e.grad_score = {-2.0 * x[0], 0.0};
    e.loss = (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 1.0) * (x[1] - 1.0);
    e.grad_loss = {2.0 * (x[0] - 1.0), 2.0 * (x[1] - 1.0)};
    return e;
  };

  OptimSettings opt;
  opt.lr = lr;
  opt.iterations = steps;

  BarrierSettings forward;
  DbgdResult r_fwd = dbgd_optimize(objective, {0.5, 0.0}, forward, opt);

  BarrierSettings inverse;
  inverse.variant = BarrierSettings::Variant::Inverse;
  DbgdResult r_inv = dbgd_optimize(objective, {0.5, 0.0}, inverse, opt);

  QuadraticOracleResult out;
  out.x_dbgd = r_fwd.x;
  out.x_inverse = r_inv.x;
  out.s_dbgd = -r_fwd.x[0] * r_fwd.x[0];
  out.s_inverse = -r_inv.x[0] * r_inv.x[0];
  out.dist_dbgd = std::hypot(r_fwd.x[0] - 0.0, r_fwd.x[1] - 1.0);
  out.dist_inverse = std::hypot(r_inv.x[0] - 1.0, r_inv.x[1] - 1.0);
  out.steps = steps;
  return out;
}

KAblationResult run_k_ablation(const RunConfig& config, int threads) {
  auto generator = make_generator(config.generator);
  auto table = class_table_for(config);
  LatentCode target = latent_from_seed(config.scorer.planted_target_seed,
                                       generator->dims(), table);
  PlantedScorer scorer(*generator, target, config.scorer.seed);
  std::vector<double> embedding =
      scorer.embed_text(config.query.empty() ? "bench" : config.query);

  OptimSettings opt;
  opt.lr = config.bench.lr;
  opt.iterations = config.bench.iters;

  AugSpec plain_spec;
  plain_spec.enabled = AugSet::none();

  InitSettings base_init;
  base_init.batch = config.init.batch;
  base_init.y_mode = config.init.y_mode == "gaussian"
                         ? InitSettings::YMode::Gaussian
                         : InitSettings::YMode::ClassTable;
  base_init.class_table = table;

  const int n = config.bench.seeds;
  const double success_bar = 0.99;  // 0.99 of the planted maximum (1.0)
  struct PerSeed {
    bool success_m1_k1 = false;
    double final_k1 = 0.0, final_k5 = 0.0, final_k10 = 0.0;
  };
  std::vector<PerSeed> rows(n);

  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    RngStream seed_rng = RngStream(config.seed, kAblationStream).substream(i);
    AugSpec spec = plain_spec.with_stream(
        RngStream(config.seed, kAblationAugStream).substream(i));

    auto run_topk = [&](const std::vector<ScoredCandidate>& ranked, int k) {
      std::vector<LatentCode> basis;
      for (int j = 0; j < k; ++j) basis.push_back(ranked[j].code);
      SingleRunResult r = optimize_single(*generator, scorer, embedding,
                                          std::move(basis), opt, spec);
      return r.trace.rows().back().score;
    };

    InitSettings single = base_init;
    single.num_candidates = 1;
    single.top_k = 1;
    auto lone = init_search(*generator, scorer, embedding, single, spec,
                            seed_rng.substream(0));
    double score_m1 = run_topk(lone, 1);
    rows[i].success_m1_k1 = score_m1 >= success_bar;

    InitSettings wide = base_init;
    wide.num_candidates = 1000;
    wide.top_k = 10;
    auto ranked = init_search(*generator, scorer, embedding, wide, spec,
                              seed_rng.substream(1));
    rows[i].final_k1 = run_topk(ranked, 1);
    rows[i].final_k5 = run_topk(ranked, 5);
    rows[i].final_k10 = run_topk(ranked, 10);
  });

  KAblationResult out;
  out.seeds = n;
  for (const PerSeed& r : rows) {
    out.success_m1_k1 += r.success_m1_k1;
    out.success_m1000_k1 += r.final_k1 >= success_bar;
    out.success_m1000_k5 += r.final_k5 >= success_bar;
    out.success_m1000_k10 += r.final_k10 >= success_bar;
    out.mean_k1 += r.final_k1;
    out.mean_k5 += r.final_k5;
    out.mean_k10 += r.final_k10;
  }
  out.mean_k1 /= n;
  out.mean_k5 /= n;
  out.mean_k10 /= n;
  return out;
}

}  // namespace latentforge
