#pragma once

#include <functional>
#include <utility>

#include "latentforge/augment.hpp"
#include "latentforge/image.hpp"
#include "latentforge/scorer.hpp"

namespace latentforge {

/// Callable returning (score, d(score)/d(image)) at an image.
using ScoreEval = std::function<std::pair<double, ImageGrid>(const ImageGrid&)>;

/// One-step sign-of-gradient ascent: clamp(I + eps * sign(grad), 0, 1) with
/// sign(0) = 0. The perturbation is bounded by eps in the infinity norm.
ImageGrid fgsm(const ScoreEval& score_eval, const ImageGrid& image,
               double epsilon);

struct AttackGains {
  double plain = 0.0;
  double augmented = 0.0;
};

/// Score gain achieved by FGSM against the plain score and against the
/// augmentation-averaged score. The augmented side uses one fixed stream for
/// both the attack gradient and the before/after evaluations, so its gain
/// measures the increase of a fixed deterministic estimate. Tiny negative
/// gains are possible from pixel clamping and are reported as-is.
AttackGains attack_gain_report(const Scorer& scorer, const AugSpec& aug,
                               std::span<const double> embedding,
                               const ImageGrid& image, double epsilon);

}  // namespace latentforge
