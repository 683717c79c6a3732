#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "latentforge/adam.hpp"
#include "latentforge/augment.hpp"
#include "latentforge/generator.hpp"
#include "latentforge/latent.hpp"
#include "latentforge/rng.hpp"
#include "latentforge/scorer.hpp"
#include "latentforge/trace.hpp"

namespace latentforge {

struct OptimSettings {
  double lr = 5e-3;
  long iterations = 1000;
  double weight_decay = 0.0;
  /// When false the ensemble weights stay frozen at their initial values;
  /// with k = 1 and weight 1 the loop then reproduces plain single-code
  /// optimization exactly.
  bool optimize_weights = true;
};

/// Thrown when an objective evaluates to a non-finite value; carries the
/// trace collected up to the failing iteration.
class NonFiniteObjective : public std::runtime_error {
 public:
  NonFiniteObjective(const std::string& what, ScoreTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const ScoreTrace& trace() const { return trace_; }

 private:
  ScoreTrace trace_;
};

// ---------------------------------------------------------------------------
// Flat parameter layout for ensembles: per basis code all z then all y,
// followed by the k weights.

struct EnsembleLayout {
  std::size_t k = 0, z_dim = 0, y_dim = 0;
  std::size_t size() const { return k * (z_dim + y_dim) + k; }
  std::size_t weight_offset() const { return k * (z_dim + y_dim); }
};

EnsembleLayout layout_of(const BasisEnsemble& ensemble);
void pack_ensemble(const BasisEnsemble& ensemble, std::span<double> out);
BasisEnsemble unpack_ensemble(std::span<const double> params,
                              const EnsembleLayout& layout);

struct EnsembleEval {
  double score = 0.0;
  std::vector<double> gradient;  // w.r.t. packed parameters
  LatentCode effective;
  ImageGrid image;
};

/// Gradient of <cotangent, g(effective_code(ensemble))> with respect to the
/// packed ensemble parameters; truncated z components pass no gradient.
std::vector<double> ensemble_vjp(const Generator& generator,
                                 const BasisEnsemble& ensemble,
                                 const ImageGrid& cotangent);

/// Augmentation-averaged score of g(effective_code(ensemble)) and its
/// gradient with respect to all basis vectors and weights. The z truncation
/// acts as a hard clamp on the effective code, so components at the bound
/// pass no gradient.
EnsembleEval evaluate_ensemble(const Generator& generator, const Scorer& scorer,
                               std::span<const double> embedding,
                               const BasisEnsemble& ensemble,
                               const AugSpec& aug, int threads = 1);

// ---------------------------------------------------------------------------
// Initialization search

struct InitSettings {
  long num_candidates = 10000;  // M
  int top_k = 5;                // k
  int batch = 10;
  enum class YMode { ClassTable, Gaussian } y_mode = YMode::ClassTable;
  std::vector<std::vector<double>> class_table;
};

/// Fixed seeded table of class-embedding vectors (standard normal entries).
std::vector<std::vector<double>> make_class_table(std::uint64_t seed, int count,
                                                  int y_dim);

struct ScoredCandidate {
  long index = 0;
  double score = 0.0;
  LatentCode code;
};

/// Samples M candidate codes (z standard normal then truncated, y per
/// y_mode), scores each with the augmentation-averaged score, and returns the
/// top_k candidates in descending score order. Ties break by candidate index;
/// the result does not depend on batch size or evaluation order.
std::vector<ScoredCandidate> init_search(const Generator& generator,
                                         const Scorer& scorer,
                                         std::span<const double> embedding,
                                         const InitSettings& settings,
                                         const AugSpec& aug, RngStream rng,
                                         int threads = 1);

// ---------------------------------------------------------------------------
// Over-parameterized single-image optimization

struct SingleRunResult {
  BasisEnsemble ensemble;
  ScoreTrace trace;
  ImageGrid image;
};

/// Joint Adam ascent over basis vectors and weights (weights start at 1/k).
/// Augmentation draws are resampled every step from aug.stream.substream(t).
/// The trace has iterations + 1 rows; row t is the evaluation at the state
/// entering step t, the final row evaluates the returned ensemble.
SingleRunResult optimize_single(const Generator& generator,
                                const Scorer& scorer,
                                std::span<const double> embedding,
                                std::vector<LatentCode> basis_init,
                                const OptimSettings& opt, const AugSpec& aug,
                                int threads = 1);

}  // namespace latentforge
