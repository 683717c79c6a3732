#pragma once

#include <functional>
#include <span>
#include <vector>

#include "latentforge/optimize.hpp"
#include "latentforge/trace.hpp"

namespace latentforge {

struct BarrierSettings {
  double beta = 1.0;   // lower bound on the primary's first-order ascent
  double tau = 1e-12;  // floor for squared gradient norms
  enum class Variant { Dbgd, Linear, Inverse } variant = Variant::Dbgd;
  double lambda_fixed = 0.5;  // linear-combination variant only
};

struct Direction {
  std::vector<double> v;  // caller descends along v
  double lambda = 0.0;
};

/// Dynamic-barrier direction for maximizing the primary score s while
/// minimizing the secondary loss l:
///   lambda = max((beta |gs|^2 + <gl, gs>) / max(|gs|^2, tau), 0)
///   v = gl - lambda gs
/// Descending along v guarantees <-v, gs> >= beta |gs|^2 whenever
/// |gs|^2 >= tau.
Direction dbgd_direction(std::span<const double> grad_loss,
                         std::span<const double> grad_score,
                         const BarrierSettings& settings);

/// Fixed linear combination v = (1 - lambda) gl - lambda gs.
std::vector<double> linear_combo_direction(std::span<const double> grad_loss,
                                           std::span<const double> grad_score,
                                           double lambda_fixed);

/// Role-swapped barrier rule: the loss becomes the primary objective
/// (minimized), the score the secondary (maximized):
///   lambda' = max((beta |gl|^2 + <gs, gl>) / max(|gl|^2, tau), 0)
///   v = -gs + lambda' gl
/// Descending along v decreases l to first order by the mirrored barrier
/// identity.
Direction inverse_bilevel_direction(std::span<const double> grad_loss,
                                    std::span<const double> grad_score,
                                    const BarrierSettings& settings);

/// Dispatch on settings.variant.
Direction compute_direction(std::span<const double> grad_loss,
                            std::span<const double> grad_score,
                            const BarrierSettings& settings);

struct BiObjectiveEval {
  double score = 0.0;
  std::vector<double> grad_score;
  double loss = 0.0;
  std::vector<double> grad_loss;
};

using BiObjective = std::function<BiObjectiveEval(std::span<const double>)>;

struct DbgdResult {
  std::vector<double> x;
  ScoreTrace trace;
};

/// Iterates x <- step(x, v_t) where v_t comes from compute_direction. With
/// use_adam the direction is fed to Adam as if it were a gradient; otherwise
/// plain steps x -= lr * v_t are taken (the variant that preserves the exact
/// first-order barrier identity). The trace has iterations + 1 rows.
DbgdResult dbgd_optimize(const BiObjective& objective, std::vector<double> x0,
                         const BarrierSettings& settings,
                         const OptimSettings& opt, bool use_adam = true);

}  // namespace latentforge
