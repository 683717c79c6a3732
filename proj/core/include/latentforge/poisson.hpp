#pragma once

#include <vector>

#include "latentforge/fuse.hpp"
#include "latentforge/image.hpp"

namespace latentforge {

struct PoissonSettings {
  double tol = 1e-6;    // infinity-norm residual target
  int max_iters = 2000;
  /// Record the first channel's CG iterates (diagnostics / tests only).
  bool record_iterates = false;
};

struct PoissonResult {
  ImageGrid image;
  bool converged = true;
  int iterations = 0;
  double residual_inf = 0.0;
  /// Infinity-norm residual after each CG iteration (index 0 = initial,
  /// first channel).
  std::vector<double> residual_history;
  /// First-channel iterates in region row-major order over the interior
  /// unknowns; filled only when record_iterates is set.
  std::vector<std::vector<double>> iterate_history;
};

/// Gradient-domain paste: per channel solves the discrete Poisson equation
/// lap(u) = lap(source) on the interior of the paste region, with Dirichlet
/// values from the background on the region's outer ring (5-point Laplacian,
/// conjugate gradient, warm-started from the source). Outside the region the
/// output is the background; the result is clamped to [0, 1].
PoissonResult poisson_blend(const ImageGrid& fg_scaled, const ImageGrid& bg,
                            const CompositionParams& params,
                            const PoissonSettings& settings = {});

}  // namespace latentforge
