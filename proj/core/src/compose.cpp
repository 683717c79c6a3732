#include "latentforge/compose.hpp"

#include <cmath>
#include <memory>

#include "latentforge/parallel.hpp"

namespace latentforge {

namespace {

constexpr std::uint64_t kSelectionStream = 0xfeedbead;

std::vector<double> pack_pair(const BasisEnsemble& fg, const BasisEnsemble& bg) {
  EnsembleLayout lf = layout_of(fg), lb = layout_of(bg);
  std::vector<double> params(lf.size() + lb.size());
  pack_ensemble(fg, std::span(params).first(lf.size()));
  pack_ensemble(bg, std::span(params).subspan(lf.size()));
  return params;
}

// Scatter of a crop-sized cotangent back into a full-size zero image.
ImageGrid scatter_region(const ImageGrid& cot, const PasteRegion& r, int h,
                         int w) {
  ImageGrid out(h, w);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(r.y0 + y, r.x0 + x, c) = cot.at(y, x, c);
  return out;
}

}  // namespace

FuseObjectives fuse_objectives(const Generator& generator, const Scorer& scorer,
                               std::span<const double> embedding,
                               const FuseState& state, const AugSpec& aug,
                               const PerceptualSettings& perceptual,
                               int threads) {
  const GeneratorDims dims = generator.dims();
  PasteRegion region = paste_region(state.params, dims.height, dims.width);

  ImageGrid img_fg = generate(generator, effective_code(state.fg));
  ImageGrid img_bg = generate(generator, effective_code(state.bg));
  ImageGrid scaled_fg = downscale_bilinear(img_fg, region.height, region.width);
  ImageGrid fused = fuse(scaled_fg, img_bg, state.params);

  FuseObjectives out;

  // Primary: augmentation-averaged score of the fused image.
  AugScore s = augmented_score(scorer, embedding, fused, aug, threads);
  out.score = s.score;
  FuseVjp fv = fuse_vjp(state.params, dims.height, dims.width, s.gradient);
  std::vector<double> gs_fg = ensemble_vjp(generator, state.fg, fv.fg_cotangent);
  std::vector<double> gs_bg = ensemble_vjp(generator, state.bg, fv.bg_cotangent);
  out.grad_score.reserve(gs_fg.size() + gs_bg.size());
  out.grad_score.insert(out.grad_score.end(), gs_fg.begin(), gs_fg.end());
  out.grad_score.insert(out.grad_score.end(), gs_bg.begin(), gs_bg.end());

  // Secondary: perceptual consistency between the pasted foreground and the
  // background patch it replaces.
  ImageGrid bg_crop = crop(img_bg, state.params);
  PerceptualVjp p = perceptual_loss_vjp(scaled_fg, bg_crop, perceptual);
  out.loss = p.loss;
  ImageGrid gl_fg_full =
      downscale_bilinear_vjp(p.grad_a, dims.height, dims.width);
  ImageGrid gl_bg_full =
      scatter_region(p.grad_b, region, dims.height, dims.width);
  std::vector<double> gl_fg = ensemble_vjp(generator, state.fg, gl_fg_full);
  std::vector<double> gl_bg = ensemble_vjp(generator, state.bg, gl_bg_full);
  out.grad_loss.reserve(gl_fg.size() + gl_bg.size());
  out.grad_loss.insert(out.grad_loss.end(), gl_fg.begin(), gl_fg.end());
  out.grad_loss.insert(out.grad_loss.end(), gl_bg.begin(), gl_bg.end());

  out.fused = std::move(fused);
  return out;
}

ComposeResult compose_optimize(const Generator& generator, const Scorer& scorer,
                               std::span<const double> embedding,
                               std::vector<LatentCode> init_fg,
                               std::vector<LatentCode> init_bg,
                               const CompositionParams& params,
                               const BarrierSettings& barrier,
                               const OptimSettings& opt, const AugSpec& aug,
                               const PerceptualSettings& perceptual,
                               int threads) {
  BasisEnsemble fg = BasisEnsemble::uniform(std::move(init_fg));
  BasisEnsemble bg = BasisEnsemble::uniform(std::move(init_bg));
  EnsembleLayout lf = layout_of(fg), lb = layout_of(bg);
  std::vector<double> x0 = pack_pair(fg, bg);

  auto last_fused = std::make_shared<ImageGrid>();
  auto step_counter = std::make_shared<long>(0);
  BiObjective objective = [&, last_fused,
                           step_counter](std::span<const double> x) {
    FuseState state{unpack_ensemble(x.first(lf.size()), lf),
                    unpack_ensemble(x.subspan(lf.size()), lb), params};
    // One objective call per iteration; draws resample each step.
    AugSpec step_aug =
        aug.with_stream(aug.stream.substream((*step_counter)++));
    FuseObjectives obj = fuse_objectives(generator, scorer, embedding, state,
                                         step_aug, perceptual, threads);
    *last_fused = std::move(obj.fused);
    BiObjectiveEval eval;
    eval.score = obj.score;
    eval.grad_score = std::move(obj.grad_score);
    eval.loss = obj.loss;
    eval.grad_loss = std::move(obj.grad_loss);
    return eval;
  };

  DbgdResult run = dbgd_optimize(objective, std::move(x0), barrier, opt);
  ComposeResult out{
      FuseState{unpack_ensemble(std::span<const double>(run.x).first(lf.size()), lf),
                unpack_ensemble(std::span<const double>(run.x).subspan(lf.size()), lb),
                params},
      std::move(run.trace), std::move(*last_fused)};
  return out;
}

std::vector<CompositionParams> composition_grid(
    const std::vector<double>& alphas,
    const std::vector<PastePosition>& positions) {
  std::vector<CompositionParams> grid;
  grid.reserve(alphas.size() * positions.size());
  for (double a : alphas)
    for (const PastePosition& p : positions) grid.push_back({a, p});
  return grid;
}

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
                                     int threads) {
  if (grid.empty())
    throw std::invalid_argument("grid_search_compose: empty candidate set");

  // Candidates run on substreams keyed by their index, so the outcome is
  // independent of evaluation order; candidates themselves run single-threaded
  // when the pool is spread across them.
  std::vector<std::optional<GridCandidate>> slots(grid.size());
  int inner_threads = grid.size() > 1 ? 1 : threads;
  parallel_for(grid.size(), threads, [&](std::size_t j) {
    AugSpec cand_aug = aug.with_stream(aug.stream.substream(j));
    ComposeResult result =
        compose_optimize(generator, scorer, embedding, init_fg, init_bg,
                         grid[j], barrier, opt, cand_aug, perceptual,
                         inner_threads);
    slots[j].emplace(GridCandidate{grid[j], std::move(result), 0.0});
  });
  GridSearchResult out;
  out.candidates.reserve(grid.size());
  for (auto& slot : slots) out.candidates.push_back(std::move(*slot));

  // All finals are re-scored on one shared fixed stream for a fair
  // comparison.
  AugSpec selection_aug =
      aug.with_stream(aug.stream.substream(kSelectionStream));
  for (GridCandidate& cand : out.candidates)
    cand.selection_score =
        augmented_score(scorer, embedding, cand.result.fused, selection_aug)
            .score;

  out.winner = 0;
  for (std::size_t j = 1; j < out.candidates.size(); ++j)
    if (out.candidates[j].selection_score >
        out.candidates[out.winner].selection_score)
      out.winner = j;
  return out;
}

}  // namespace latentforge
