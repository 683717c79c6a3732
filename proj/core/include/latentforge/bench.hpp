#pragma once

#include "latentforge/config.hpp"
#include "latentforge/dbgd.hpp"

namespace latentforge {

// Reference suites behind the `bench` command; the acceptance tests call
// these directly.

struct StagnationRun {
  int seed = 0;
  double final_score = 0.0;
  int basin = 0;  // 0 = stuck near the wrong target, 1 = escaped
};

struct StagnationResult {
  std::vector<StagnationRun> plain;
  std::vector<StagnationRun> augmented;
  int plain_escapes = 0;
  int augmented_escapes = 0;
};

/// Plain-score vs augmentation-averaged optimization from a perturbed
/// wrong-basin init on the two-basin scorer, over bench.seeds seeds.
StagnationResult run_stagnation_benchmark(const RunConfig& config, int threads);

struct QuadraticOracleResult {
  std::vector<double> x_dbgd;      // should approach (0, 1)
  std::vector<double> x_inverse;   // should approach (1, 1)
  double s_dbgd = 0.0;
  double s_inverse = 0.0;
  double dist_dbgd = 0.0;          // |x_dbgd - (0, 1)|
  double dist_inverse = 0.0;       // |x_inverse - (1, 1)|
  long steps = 0;
};

/// s(x) = -x1^2 maximized, l(x) = (x1-1)^2 + (x2-1)^2 minimized, from
/// (0.5, 0). The barrier variant must land on the loss minimizer inside
/// argmax s; the inverse variant on the unconstrained loss minimizer.
QuadraticOracleResult run_quadratic_oracle(long steps = 2000, double lr = 2e-3);

struct KAblationResult {
  int seeds = 0;
  int success_m1_k1 = 0;      // runs reaching 0.99 of the planted maximum
  int success_m1000_k1 = 0;
  int success_m1000_k5 = 0;
  int success_m1000_k10 = 0;
  double mean_k1 = 0.0;       // mean final score at M=1000
  double mean_k5 = 0.0;
  double mean_k10 = 0.0;
};

/// Planted-scorer success rates for (M=1, k=1) vs (M=1000, k=5) and the mean
/// final score over k in {1, 5, 10} at M=1000, augmentations disabled.
KAblationResult run_k_ablation(const RunConfig& config, int threads);

}  // namespace latentforge
