#pragma once

#include <vector>

#include "latentforge/image.hpp"

namespace latentforge {

struct PerceptualSettings {
  int levels = 3;
  int window = 4;
  /// Per-level weights; empty means uniform 1/levels.
  std::vector<double> level_weights;
};

/// Pyramid local-statistics dissimilarity: on every Gaussian-pyramid level,
/// the mean over non-overlapping windows and channels of
/// (mu_a - mu_b)^2 + (sigma_a - sigma_b)^2. Symmetric, non-negative, zero for
/// identical images.
double perceptual_loss(const ImageGrid& a, const ImageGrid& b,
                       const PerceptualSettings& settings);

struct PerceptualVjp {
  double loss = 0.0;
  ImageGrid grad_a;
  ImageGrid grad_b;
};

PerceptualVjp perceptual_loss_vjp(const ImageGrid& a, const ImageGrid& b,
                                  const PerceptualSettings& settings);

/// One blur-and-decimate pyramid step ([1,4,6,4,1]/16 separable, edge clamp,
/// even-index decimation); exposed for tests.
ImageGrid pyramid_reduce(const ImageGrid& image);

}  // namespace latentforge
