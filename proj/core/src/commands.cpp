#include "latentforge/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include "latentforge/attack.hpp"
#include "latentforge/bench.hpp"
#include "latentforge/csv.hpp"
#include "latentforge/parallel.hpp"
#include "latentforge/ppm.hpp"

namespace latentforge {

namespace {

namespace fs = std::filesystem;

// Stream ids partition the global seed between phases so no two consumers
// ever share a stream.
constexpr std::uint64_t kOptInitStream = 10;
constexpr std::uint64_t kOptInitAugStream = 11;
constexpr std::uint64_t kOptAugStream = 12;
constexpr std::uint64_t kFgInitStream = 20;
constexpr std::uint64_t kFgInitAugStream = 21;
constexpr std::uint64_t kBgInitStream = 22;
constexpr std::uint64_t kBgInitAugStream = 23;
constexpr std::uint64_t kComposeAugStream = 24;
constexpr std::uint64_t kAttackLatentStream = 30;
constexpr std::uint64_t kAttackAugStream = 31;

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

fs::path prepare_out_dir(const RunConfig& config) {
  require(!config.out.empty(), "output directory not set (config.out or --out)");
  fs::path dir(config.out);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_topk_csv(const fs::path& path,
                    const std::vector<ScoredCandidate>& ranked) {
  std::string text = "index,score\n";
  for (const ScoredCandidate& c : ranked)
    text += std::to_string(c.index) + "," + format_double(c.score) + "\n";
  write_text(path, text);
}

}  // namespace

int run_optimize(const RunConfig& config, int threads) {
  require(!config.query.empty(), "query must be non-empty");
  require(!config.out.empty(), "output directory not set (config.out or --out)");
  auto generator = make_generator(config.generator);
  auto scorer = make_scorer(config, *generator);
  std::vector<double> embedding = scorer->embed_text(config.query);

  AugSpec aug = aug_spec_from(config);
  InitSettings init = init_settings_from(config);
  OptimSettings opt = optim_settings_from(config);

  auto ranked = init_search(
      *generator, *scorer, embedding, init,
      aug.with_stream(RngStream(config.seed, kOptInitAugStream)),
      RngStream(config.seed, kOptInitStream), threads);

  std::vector<LatentCode> basis;
  basis.reserve(ranked.size());
  for (const ScoredCandidate& c : ranked) basis.push_back(c.code);
  SingleRunResult result = optimize_single(
      *generator, *scorer, embedding, std::move(basis), opt,
      aug.with_stream(RngStream(config.seed, kOptAugStream)), threads);

  fs::path dir = prepare_out_dir(config);
  write_topk_csv(dir / "init_topk.csv", ranked);
  write_trace_csv(result.trace, dir / "trace.csv");
  write_ppm(clamp01(result.image), dir / "final.ppm");
  write_latent_json(effective_code(result.ensemble), dir / "final_latent.json");
  write_text(dir / "resolved_config.json", resolved_config_json(config));
  return 0;
}

int run_compose(const RunConfig& config, int threads) {
  require(!config.query.empty(), "query must be non-empty");
  require(!config.out.empty(), "output directory not set (config.out or --out)");
  auto generator = make_generator(config.generator);
  auto scorer = make_scorer(config, *generator);
  std::vector<double> embedding = scorer->embed_text(config.query);

  AugSpec aug = aug_spec_from(config);
  InitSettings init = init_settings_from(config);
  OptimSettings opt = optim_settings_from(config);
  BarrierSettings barrier = barrier_settings_from(config);
  PerceptualSettings perceptual = perceptual_settings_from(config);

  auto init_codes = [&](std::uint64_t latent_stream, std::uint64_t aug_stream) {
    auto ranked = init_search(
        *generator, *scorer, embedding, init,
        aug.with_stream(RngStream(config.seed, aug_stream)),
        RngStream(config.seed, latent_stream), threads);
    std::vector<LatentCode> codes;
    codes.reserve(ranked.size());
    for (const ScoredCandidate& c : ranked) codes.push_back(c.code);
    return codes;
  };
  std::vector<LatentCode> fg = init_codes(kFgInitStream, kFgInitAugStream);
  std::vector<LatentCode> bg = init_codes(kBgInitStream, kBgInitAugStream);

  std::vector<CompositionParams> grid = composition_grid_from(config);
  GridSearchResult search = grid_search_compose(
      *generator, *scorer, embedding, grid, fg, bg, barrier, opt,
      aug.with_stream(RngStream(config.seed, kComposeAugStream)), perceptual,
      threads);

  const GridCandidate& winner = search.candidates[search.winner];
  GeneratorDims dims = generator->dims();
  PasteRegion region = paste_region(winner.params, dims.height, dims.width);
  ImageGrid img_fg = generate(*generator, effective_code(winner.result.state.fg));
  ImageGrid img_bg = generate(*generator, effective_code(winner.result.state.bg));
  ImageGrid scaled_fg =
      downscale_bilinear(img_fg, region.height, region.width);
  PoissonResult blended = poisson_blend(scaled_fg, img_bg, winner.params,
                                        poisson_settings_from(config));
  if (!blended.converged)
    std::cerr << "warning: poisson solve stopped at residual "
              << blended.residual_inf << "\n";

  fs::path dir = prepare_out_dir(config);
  std::string grid_csv = "cand,alpha,position,s_final,l_final,winner\n";
  for (std::size_t j = 0; j < search.candidates.size(); ++j) {
    const GridCandidate& cand = search.candidates[j];
    fs::path cand_dir = dir / ("cand_" + std::to_string(j));
    fs::create_directories(cand_dir);
    write_trace_csv(cand.result.trace, cand_dir / "trace.csv");
    grid_csv += std::to_string(j) + "," + format_double(cand.params.alpha) +
                "," + to_string(cand.params.position) + "," +
                format_double(cand.selection_score) + "," +
                format_double(cand.result.trace.rows().back().loss) + "," +
                (j == search.winner ? "1" : "0") + "\n";
  }
  write_text(dir / "grid_results.csv", grid_csv);
  write_ppm(clamp01(winner.result.fused), dir / "fused.ppm");
  write_ppm(blended.image, dir / "blended.ppm");
  write_text(dir / "resolved_config.json", resolved_config_json(config));
  return 0;
}

int run_attack(const RunConfig& config, int threads) {
  require(!config.query.empty(), "query must be non-empty");
  require(!config.out.empty(), "output directory not set (config.out or --out)");
  auto generator = make_generator(config.generator);
  auto scorer = make_scorer(config, *generator);
  std::vector<double> embedding = scorer->embed_text(config.query);
  auto table = class_table_for(config);

  AugSpec aug = aug_spec_from(config);
  const int n = config.attack.seeds;
  const double epsilon = config.attack.epsilon;

  std::vector<AttackGains> gains(n);
  std::vector<ImageGrid> plain_images(n), aug_images(n);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    LatentCode code = sample_latent(
        generator->dims(), table,
        RngStream(config.seed, kAttackLatentStream).substream(i));
    ImageGrid image = generate(*generator, code);
    AugSpec fixed = aug.with_stream(
        RngStream(config.seed, kAttackAugStream).substream(i));
    gains[i] = attack_gain_report(*scorer, fixed, embedding, image, epsilon);
    if (i < 3) {
      ScoreEval plain_eval = [&](const ImageGrid& img) {
        return std::make_pair(scorer->score(embedding, img),
                              scorer->image_vjp(embedding, img, 1.0));
      };
      plain_images[i] = fgsm(plain_eval, image, epsilon);
      ScoreEval aug_eval = [&](const ImageGrid& img) {
        AugScore s = augmented_score(*scorer, embedding, img, fixed);
        return std::make_pair(s.score, std::move(s.gradient));
      };
      aug_images[i] = fgsm(aug_eval, image, epsilon);
    }
  });

  fs::path dir = prepare_out_dir(config);
  std::string csv = "seed,gain_plain,gain_aug\n";
  for (int i = 0; i < n; ++i)
    csv += std::to_string(i) + "," + format_double(gains[i].plain) + "," +
           format_double(gains[i].augmented) + "\n";
  write_text(dir / "attack.csv", csv);
  for (int i = 0; i < std::min(3, n); ++i) {
    write_ppm(plain_images[i],
              dir / ("seed" + std::to_string(i) + "_plain.ppm"));
    write_ppm(aug_images[i], dir / ("seed" + std::to_string(i) + "_aug.ppm"));
  }
  write_text(dir / "resolved_config.json", resolved_config_json(config));
  return 0;
}

int run_interpolate(const RunConfig& config, int) {
  require(!config.interpolate.xi1.empty() && !config.interpolate.xi2.empty(),
          "interpolate.xi1 and interpolate.xi2 must be set");
  require(!config.out.empty(), "output directory not set (config.out or --out)");
  auto generator = make_generator(config.generator);
  LatentCode xi1 = read_latent_json(config.interpolate.xi1);
  LatentCode xi2 = read_latent_json(config.interpolate.xi2);
  GeneratorDims dims = generator->dims();
  require(static_cast<int>(xi1.z.size()) == dims.z_dim &&
              static_cast<int>(xi1.y.size()) == dims.y_dim &&
              xi2.same_dims(xi1),
          "latent files do not match the generator dims");

  const int n = config.interpolate.steps;
  std::vector<ImageGrid> frames(n + 1);
  for (int i = 0; i <= n; ++i) {
    double a = static_cast<double>(i) / n;
    LatentCode code;
    code.z.resize(dims.z_dim);
    code.y.resize(dims.y_dim);
    for (int j = 0; j < dims.z_dim; ++j)
      code.z[j] = a * xi1.z[j] + (1.0 - a) * xi2.z[j];
    for (int j = 0; j < dims.y_dim; ++j)
      code.y[j] = a * xi1.y[j] + (1.0 - a) * xi2.y[j];
    frames[i] = generate(*generator, truncate_z(std::move(code)));
  }

  fs::path dir = prepare_out_dir(config);
  for (int i = 0; i <= n; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "interp_%03d.ppm", i);
    write_ppm(clamp01(frames[i]), dir / name);
  }
  write_text(dir / "resolved_config.json", resolved_config_json(config));
  return 0;
}

int run_bench(const RunConfig& config, int threads) {
  require(!config.out.empty(), "output directory not set (config.out or --out)");
  StagnationResult stagnation = run_stagnation_benchmark(config, threads);
  QuadraticOracleResult oracle = run_quadratic_oracle();
  KAblationResult ablation = run_k_ablation(config, threads);

  struct Property {
    std::string name;
    bool pass;
    std::string detail;
  };
  std::vector<Property> properties;
  properties.push_back(
      {"stagnation_escape_ratio",
       stagnation.augmented_escapes >= 2 * stagnation.plain_escapes,
       "aug=" + std::to_string(stagnation.augmented_escapes) +
           " plain=" + std::to_string(stagnation.plain_escapes)});
  properties.push_back({"dbgd_quadratic_oracle", oracle.dist_dbgd < 1e-2,
                        "dist=" + format_double(oracle.dist_dbgd)});
  properties.push_back(
      {"inverse_bilevel_oracle",
       oracle.dist_inverse < 1e-2 && oracle.s_dbgd - oracle.s_inverse >= 0.5,
       "dist=" + format_double(oracle.dist_inverse) +
           " s_gap=" + format_double(oracle.s_dbgd - oracle.s_inverse)});
  properties.push_back(
      {"k_ablation_success",
       ablation.success_m1000_k5 >= ablation.success_m1_k1,
       "m1000_k5=" + std::to_string(ablation.success_m1000_k5) + "/" +
           std::to_string(ablation.seeds) +
           " m1_k1=" + std::to_string(ablation.success_m1_k1) + "/" +
           std::to_string(ablation.seeds)});
  properties.push_back(
      {"k_ablation_monotone",
       ablation.mean_k1 <= ablation.mean_k5 && ablation.mean_k5 <= ablation.mean_k10,
       "k1=" + format_double(ablation.mean_k1) +
           " k5=" + format_double(ablation.mean_k5) +
           " k10=" + format_double(ablation.mean_k10)});

  fs::path dir = prepare_out_dir(config);
  std::string stagnation_csv = "bench,seed,final_score,basin\n";
  for (const StagnationRun& r : stagnation.plain)
    stagnation_csv += "plain," + std::to_string(r.seed) + "," +
                      format_double(r.final_score) + "," +
                      std::to_string(r.basin) + "\n";
  for (const StagnationRun& r : stagnation.augmented)
    stagnation_csv += "augmented," + std::to_string(r.seed) + "," +
                      format_double(r.final_score) + "," +
                      std::to_string(r.basin) + "\n";
  write_text(dir / "stagnation.csv", stagnation_csv);

  bool all_pass = true;
  std::string properties_csv = "property,pass,detail\n";
  for (const Property& p : properties) {
    all_pass = all_pass && p.pass;
    properties_csv +=
        p.name + "," + (p.pass ? "pass" : "fail") + "," + p.detail + "\n";
    std::cout << (p.pass ? "[pass] " : "[FAIL] ") << p.name << " (" << p.detail
              << ")\n";
  }
  write_text(dir / "properties.csv", properties_csv);
  write_text(dir / "resolved_config.json", resolved_config_json(config));
  return all_pass ? 0 : 1;
}

int run_command(const std::string& name, const RunConfig& config, int threads) {
  try {
    if (name == "optimize") return run_optimize(config, threads);
    if (name == "compose") return run_compose(config, threads);
    if (name == "attack") return run_attack(config, threads);
    if (name == "interpolate") return run_interpolate(config, threads);
    if (name == "bench") return run_bench(config, threads);
    std::cerr << "unknown command: " << name << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace latentforge
