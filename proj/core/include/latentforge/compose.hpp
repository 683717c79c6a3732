#pragma once

#include <optional>
#include <vector>

#include "latentforge/augment.hpp"
#include "latentforge/dbgd.hpp"
#include "latentforge/fuse.hpp"
#include "latentforge/generator.hpp"
#include "latentforge/optimize.hpp"
#include "latentforge/perceptual.hpp"
#include "latentforge/scorer.hpp"
#include "latentforge/trace.hpp"

namespace latentforge {

/// Search state of composed generation: two ensembles driving the same
/// generator, plus the (fixed) composition parameters.
struct FuseState {
  BasisEnsemble fg;
  BasisEnsemble bg;
  CompositionParams params;
};

struct FuseObjectives {
  double score = 0.0;                // augmentation-averaged score of the fused image
  std::vector<double> grad_score;    // w.r.t. packed [fg params, bg params]
  double loss = 0.0;                 // perceptual loss (scaled fg vs bg crop)
  std::vector<double> grad_loss;
  ImageGrid fused;
};

/// Evaluates the fused score and the perceptual-consistency loss together
/// with their gradients over the concatenated parameters of both ensembles.
/// Composition parameters are held fixed; they are searched discretely.
FuseObjectives fuse_objectives(const Generator& generator, const Scorer& scorer,
                               std::span<const double> embedding,
                               const FuseState& state, const AugSpec& aug,
                               const PerceptualSettings& perceptual,
                               int threads = 1);

struct ComposeResult {
  FuseState state;
  ScoreTrace trace;
  ImageGrid fused;
};

/// Bi-level co-optimization of both ensembles: primary maximize the fused
/// score, secondary minimize the perceptual loss, solved with the dynamic
/// barrier direction fed to Adam. Augmentation draws resample every step.
ComposeResult compose_optimize(const Generator& generator, const Scorer& scorer,
                               std::span<const double> embedding,
                               std::vector<LatentCode> init_fg,
                               std::vector<LatentCode> init_bg,
                               const CompositionParams& params,
                               const BarrierSettings& barrier,
                               const OptimSettings& opt, const AugSpec& aug,
                               const PerceptualSettings& perceptual,
                               int threads = 1);

/// Default candidate set: alphas x the nine positions, alphas outermost.
std::vector<CompositionParams> composition_grid(
    const std::vector<double>& alphas,
    const std::vector<PastePosition>& positions);

struct GridCandidate {
  CompositionParams params;
  ComposeResult result;
  double selection_score = 0.0;  // re-evaluated on the shared selection stream
};

struct GridSearchResult {
  std::vector<GridCandidate> candidates;
  std::size_t winner = 0;
};

/// Runs compose_optimize for every candidate (independent per-candidate rng
/// substreams, so evaluation order and thread count never matter) and picks
/// the candidate whose final image has the highest augmentation-averaged
/// score under one shared, fixed evaluation stream. Ties break by candidate
/// order.
GridSearchResult grid_search_compose(const Generator& generator,
                                     const Scorer& scorer,
                                     std::span<const double> embedding,
                                     const std::vector<CompositionParams>& grid,
                                     const std::vector<LatentCode>& init_fg,
                                     const std::vector<LatentCode>& init_bg,
                                     const BarrierSettings& barrier,
                                     const OptimSettings& opt,
                                     const AugSpec& aug,
                                     const PerceptualSettings& perceptual,
                                     int threads = 1);

}  // namespace latentforge
