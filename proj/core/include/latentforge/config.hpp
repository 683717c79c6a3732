#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "latentforge/augment.hpp"
#include "latentforge/compose.hpp"
#include "latentforge/dbgd.hpp"
#include "latentforge/fuse.hpp"
#include "latentforge/optimize.hpp"
#include "latentforge/poisson.hpp"

namespace latentforge {

struct GeneratorConfig {
  std::string kind = "blob";
  std::uint64_t seed = 7;
  int z_dim = 16;
  int y_dim = 8;
  int height = 64;
  int width = 64;
  int blobs = 4;
};

struct BasinConfig {
  std::uint64_t wrong_seed = 2;
  std::uint64_t right_seed = 3;
  double sigma_narrow = 0.03;
  double sigma_broad = 0.5;
  double amp_narrow = 1.0;
  double amp_broad = 1.0;
};

struct ScorerConfig {
  std::string kind = "hash_embed";  // hash_embed | planted | two_basin
  std::uint64_t seed = 11;
  std::uint64_t planted_target_seed = 1;
  BasinConfig basin;
};

struct AugConfig {
  std::vector<std::string> enabled = {"color", "translate", "resize", "cutout"};
  int n_draws = 16;
  AugRanges ranges;
};

struct OptConfig {
  double lr = 5e-3;
  long iters = 1000;
  double weight_decay = 0.0;
};

struct InitConfig {
  long num_candidates = 10000;  // "M"
  int top_k = 5;                // "k"
  int batch = 10;
  std::string y_mode = "class-table";  // class-table | gaussian
  int classes = 32;
};

struct DbgdConfig {
  double beta = 1.0;
  double tau = 1e-12;
  std::string variant = "dbgd";  // dbgd | linear | inverse
  double lambda_fixed = 0.5;
};

struct ComposeConfig {
  std::vector<double> alphas = {0.65, 0.5};
  std::vector<std::string> positions;  // empty -> all nine
  int per_levels = 3;
  int per_window = 4;
  double poisson_tol = 1e-6;
  int poisson_max_iters = 2000;
};

struct AttackConfig {
  double epsilon = 4.0 / 255.0;
  int seeds = 50;
};

struct InterpolateConfig {
  std::string xi1;
  std::string xi2;
  int steps = 8;
};

struct BenchConfig {
  int seeds = 20;
  long iters = 150;
  double lr = 0.02;
  int n_draws = 8;
  double init_noise = 0.15;  // z perturbation of the wrong-basin init
};

struct RunConfig {
  std::string query;
  std::uint64_t seed = 0;
  std::string out;
  GeneratorConfig generator;
  ScorerConfig scorer;
  AugConfig aug;
  OptConfig opt;
  InitConfig init;
  DbgdConfig dbgd;
  ComposeConfig compose;
  AttackConfig attack;
  InterpolateConfig interpolate;
  BenchConfig bench;
};

/// Parses a JSON config with strict schema checking (unknown keys are
/// rejected) and full defaulting.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::filesystem::path& path);

/// Fully resolved JSON (every key present) with stable key order; this is
/// what resolved_config.json contains and re-running with it reproduces the
/// artifacts byte for byte.
std::string resolved_config_json(const RunConfig& config);

// -- Derived objects -------------------------------------------------------

std::unique_ptr<Generator> make_generator(const GeneratorConfig& config);

std::vector<std::vector<double>> class_table_for(const RunConfig& config);

std::unique_ptr<Scorer> make_scorer(const RunConfig& config,
                                    const Generator& generator);

AugSet parse_aug_set(const std::vector<std::string>& names);
AugSpec aug_spec_from(const RunConfig& config);   // stream left at (seed, 0)
InitSettings init_settings_from(const RunConfig& config);
OptimSettings optim_settings_from(const RunConfig& config);
BarrierSettings barrier_settings_from(const RunConfig& config);
PerceptualSettings perceptual_settings_from(const RunConfig& config);
PoissonSettings poisson_settings_from(const RunConfig& config);
std::vector<CompositionParams> composition_grid_from(const RunConfig& config);

/// Deterministic candidate latent draw shared by init search and the seeded
/// benchmark/attack paths: z standard normal then truncated, y drawn from the
/// class table (or standard normal when the table is empty).
LatentCode sample_latent(const GeneratorDims& dims,
                         const std::vector<std::vector<double>>& class_table,
                         RngStream rng);

/// sample_latent on the canonical stream for a bare seed; planted targets and
/// basin anchors are derived this way.
LatentCode latent_from_seed(std::uint64_t seed, const GeneratorDims& dims,
                            const std::vector<std::vector<double>>& class_table);

// -- Latent file I/O -------------------------------------------------------

void write_latent_json(const LatentCode& code,
                       const std::filesystem::path& path);
LatentCode read_latent_json(const std::filesystem::path& path);

}  // namespace latentforge
