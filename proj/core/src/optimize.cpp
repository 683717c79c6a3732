#include "latentforge/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "latentforge/parallel.hpp"

namespace latentforge {

namespace {

constexpr std::uint64_t kClassTableStream = 301;

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

EnsembleLayout layout_of(const BasisEnsemble& ensemble) {
  return {ensemble.size(), ensemble.basis().front().z.size(),
          ensemble.basis().front().y.size()};
}

void pack_ensemble(const BasisEnsemble& ensemble, std::span<double> out) {
  EnsembleLayout layout = layout_of(ensemble);
  if (out.size() != layout.size())
    throw std::invalid_argument("pack_ensemble: size mismatch");
  std::size_t pos = 0;
  for (const LatentCode& code : ensemble.basis()) {
    for (double v : code.z) out[pos++] = v;
    for (double v : code.y) out[pos++] = v;
  }
  for (double w : ensemble.weights()) out[pos++] = w;
}

BasisEnsemble unpack_ensemble(std::span<const double> params,
                              const EnsembleLayout& layout) {
  if (params.size() != layout.size())
    throw std::invalid_argument("unpack_ensemble: size mismatch");
  std::vector<LatentCode> basis(layout.k);
  std::size_t pos = 0;
  for (LatentCode& code : basis) {
    code.z.assign(params.begin() + pos, params.begin() + pos + layout.z_dim);
    pos += layout.z_dim;
    code.y.assign(params.begin() + pos, params.begin() + pos + layout.y_dim);
    pos += layout.y_dim;
  }
  std::vector<double> weights(params.begin() + pos, params.end());
  return BasisEnsemble(std::move(basis), std::move(weights));
}

std::vector<double> ensemble_vjp(const Generator& generator,
                                 const BasisEnsemble& ensemble,
                                 const ImageGrid& cotangent) {
  EnsembleLayout layout = layout_of(ensemble);
  LatentCode raw = effective_code_raw(ensemble);
  LatentCode effective = truncate_z(raw, kDefaultZBound);
  LatentCode g = generator.vjp(effective, cotangent);
  for (std::size_t j = 0; j < g.z.size(); ++j)
    if (std::abs(raw.z[j]) > kDefaultZBound) g.z[j] = 0.0;

  std::vector<double> grad(layout.size(), 0.0);
  const auto& basis = ensemble.basis();
  const auto& weights = ensemble.weights();
  std::size_t pos = 0;
  for (std::size_t i = 0; i < layout.k; ++i) {
    for (std::size_t j = 0; j < layout.z_dim; ++j)
      grad[pos++] = weights[i] * g.z[j];
    for (std::size_t j = 0; j < layout.y_dim; ++j)
      grad[pos++] = weights[i] * g.y[j];
  }
  for (std::size_t i = 0; i < layout.k; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < layout.z_dim; ++j)
      acc += g.z[j] * basis[i].z[j];
    for (std::size_t j = 0; j < layout.y_dim; ++j)
      acc += g.y[j] * basis[i].y[j];
    grad[pos++] = acc;
  }
  return grad;
}

EnsembleEval evaluate_ensemble(const Generator& generator, const Scorer& scorer,
                               std::span<const double> embedding,
                               const BasisEnsemble& ensemble,
                               const AugSpec& aug, int threads) {
  EnsembleEval out;
  out.effective = effective_code(ensemble);
  out.image = generate(generator, out.effective);
  AugScore aug_score =
      augmented_score(scorer, embedding, out.image, aug, threads);
  out.score = aug_score.score;
  out.gradient = ensemble_vjp(generator, ensemble, aug_score.gradient);
  return out;
}

std::vector<std::vector<double>> make_class_table(std::uint64_t seed, int count,
                                                  int y_dim) {
  std::vector<std::vector<double>> table(count);
  for (int i = 0; i < count; ++i) {
    RngStream rng = RngStream(seed, kClassTableStream).substream(i);
    table[i].resize(y_dim);
    for (double& v : table[i]) v = rng.normal();
  }
  return table;
}

std::vector<ScoredCandidate> init_search(const Generator& generator,
                                         const Scorer& scorer,
                                         std::span<const double> embedding,
                                         const InitSettings& settings,
                                         const AugSpec& aug, RngStream rng,
                                         int threads) {
  if (settings.num_candidates < 1 || settings.top_k < 1 ||
      settings.top_k > settings.num_candidates)
    throw std::invalid_argument("init_search: need 1 <= k <= M");
  if (settings.y_mode == InitSettings::YMode::ClassTable &&
      settings.class_table.empty() && generator.dims().y_dim > 0)
    throw std::invalid_argument("init_search: class table is empty");

  const GeneratorDims dims = generator.dims();
  const long m = settings.num_candidates;
  std::vector<LatentCode> codes(m);
  std::vector<double> scores(m);

  auto eval_candidate = [&](long i) {
    RngStream cand = rng.substream(static_cast<std::uint64_t>(i));
    LatentCode code;
    code.z.resize(dims.z_dim);
    for (double& v : code.z) v = cand.normal();
    code = truncate_z(std::move(code));
    code.y.resize(dims.y_dim);
    if (dims.y_dim > 0) {
      if (settings.y_mode == InitSettings::YMode::ClassTable) {
        const auto& row = settings.class_table[static_cast<std::size_t>(
            cand.uniform_int(static_cast<std::int64_t>(settings.class_table.size())))];
        if (static_cast<int>(row.size()) != dims.y_dim)
          throw std::invalid_argument("init_search: class table dim mismatch");
        code.y = row;
      } else {
        for (double& v : code.y) v = cand.normal();
      }
    }
    ImageGrid image = generate(generator, code);
    AugSpec cand_aug =
        aug.with_stream(aug.stream.substream(static_cast<std::uint64_t>(i)));
    scores[i] = augmented_score_value(scorer, embedding, image, cand_aug);
    codes[i] = std::move(code);
  };

  // Batches are a chunking hint only; per-candidate streams make the scores
  // independent of both batch size and evaluation order.
  const long batch = std::max(1, settings.batch);
  const long num_batches = (m + batch - 1) / batch;
  parallel_for(static_cast<std::size_t>(num_batches), threads,
               [&](std::size_t bi) {
                 long begin = static_cast<long>(bi) * batch;
                 long end = std::min(begin + batch, m);
                 for (long i = begin; i < end; ++i) eval_candidate(i);
               });

  std::vector<long> order(m);
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  std::vector<ScoredCandidate> top(settings.top_k);
  for (int i = 0; i < settings.top_k; ++i) {
    long idx = order[i];
    top[i] = {idx, scores[idx], std::move(codes[idx])};
  }
  return top;
}

SingleRunResult optimize_single(const Generator& generator,
                                const Scorer& scorer,
                                std::span<const double> embedding,
                                std::vector<LatentCode> basis_init,
                                const OptimSettings& opt, const AugSpec& aug,
                                int threads) {
  if (basis_init.empty())
    throw std::invalid_argument("optimize_single: empty basis");
  if (opt.iterations < 0)
    throw std::invalid_argument("optimize_single: negative iteration count");

  BasisEnsemble ensemble = BasisEnsemble::uniform(std::move(basis_init));
  EnsembleLayout layout = layout_of(ensemble);
  std::vector<double> params(layout.size());
  pack_ensemble(ensemble, params);

  AdamSettings adam_settings;
  adam_settings.lr = opt.lr;
  adam_settings.weight_decay = opt.weight_decay;
  AdamState adam(params.size(), adam_settings);

  ScoreTrace trace;
  std::vector<double> ascent(params.size());
  EnsembleEval eval;
  for (long t = 0; t <= opt.iterations; ++t) {
    ensemble = unpack_ensemble(params, layout);
    eval = evaluate_ensemble(generator, scorer, embedding, ensemble,
                             aug.with_stream(aug.stream.substream(t)), threads);
    trace.append({t, eval.score, 0.0, 0.0, norm(eval.gradient), 0.0});
    if (!std::isfinite(eval.score))
      throw NonFiniteObjective("optimize_single: non-finite objective at step " +
                                   std::to_string(t),
                               trace);
    if (t == opt.iterations) break;
    for (std::size_t i = 0; i < params.size(); ++i)
      ascent[i] = -eval.gradient[i];
    if (!opt.optimize_weights)
      std::fill(ascent.begin() + layout.weight_offset(), ascent.end(), 0.0);
    adam.step(ascent, params);
  }
  return {std::move(ensemble), std::move(trace), std::move(eval.image)};
}

}  // namespace latentforge
