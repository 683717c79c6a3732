#pragma once

#include "latentforge/image.hpp"
#include "latentforge/rng.hpp"
#include "latentforge/scorer.hpp"

namespace latentforge {

/// Which augmentation stages participate; stages always run in the fixed
/// order color -> translate -> resize -> cutout.
struct AugSet {
  bool color = false;
  bool translate = false;
  bool resize = false;
  bool cutout = false;

  static AugSet all() { return {true, true, true, true}; }
  static AugSet none() { return {}; }
  bool any() const { return color || translate || resize || cutout; }
};

struct AugRanges {
  double brightness = 0.2;       // per-channel offset in [-b, b]
  double contrast_lo = 0.5;
  double contrast_hi = 1.5;
  double translate_max_frac = 0.125;
  double resize_lo = 0.75;
  double resize_hi = 1.25;
  double cutout_frac = 0.25;     // box side as fraction of min(H, W)
};

/// A fully materialized draw: applying it to an image is deterministic.
struct AugmentationParams {
  bool color = false;
  double brightness[3] = {0.0, 0.0, 0.0};
  double contrast = 1.0;

  bool translate = false;
  int dx = 0, dy = 0;

  bool resize = false;
  double scale = 1.0;

  bool cutout = false;
  int cut_y = 0, cut_x = 0, cut_size = 0;

  static AugmentationParams identity() { return {}; }
};

AugmentationParams sample_params(const AugSet& enabled, const AugRanges& ranges,
                                 int height, int width, RngStream& rng);

/// Applies the enabled stages in fixed order. Every stage is linear or affine
/// in the pixel values: contrast scales around mid-gray, translation and
/// cutout zero-fill, resize is bilinear with recenter crop/pad.
ImageGrid apply(const AugmentationParams& params, const ImageGrid& image);

/// Adjoint of apply with respect to the input pixels.
ImageGrid apply_vjp(const AugmentationParams& params,
                    const ImageGrid& cotangent);

struct AugSpec {
  AugSet enabled = AugSet::all();
  int n_draws = 16;
  AugRanges ranges;
  RngStream stream{0, 0};

  AugSpec with_stream(RngStream s) const {
    AugSpec copy = *this;
    copy.stream = s;
    return copy;
  }
};

struct AugScore {
  double score = 0.0;
  ImageGrid gradient;
};

/// Monte Carlo estimate of the augmentation-averaged score and its gradient
/// with respect to the image: mean over n_draws of score(apply(params_j, I)),
/// params_j drawn sequentially from spec.stream. The same stream state always
/// produces the same estimate; draws may be evaluated in parallel but are
/// reduced in index order. An empty enabled set returns the plain score
/// exactly.
AugScore augmented_score(const Scorer& scorer,
                         std::span<const double> embedding,
                         const ImageGrid& image, const AugSpec& spec,
                         int threads = 1);

/// Estimate only; identical draws and reduction order as augmented_score but
/// without the adjoint passes (used for bulk candidate scoring).
double augmented_score_value(const Scorer& scorer,
                             std::span<const double> embedding,
                             const ImageGrid& image, const AugSpec& spec,
                             int threads = 1);

}  // namespace latentforge
