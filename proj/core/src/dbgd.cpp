#include "latentforge/dbgd.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "latentforge/adam.hpp"

namespace latentforge {

namespace {

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x))
      throw std::runtime_error(std::string(what) + ": non-finite input");
}

double norm_sq(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double inner(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> v) { return std::sqrt(norm_sq(v)); }

}  // namespace

Direction dbgd_direction(std::span<const double> grad_loss,
                         std::span<const double> grad_score,
                         const BarrierSettings& settings) {
  if (grad_loss.size() != grad_score.size())
    throw std::invalid_argument("dbgd_direction: dimension mismatch");
  check_finite(grad_loss, "dbgd_direction");
  check_finite(grad_score, "dbgd_direction");

  double ns2 = norm_sq(grad_score);
  double denom = std::max(ns2, settings.tau);
  double lambda =
      std::max((settings.beta * ns2 + inner(grad_loss, grad_score)) / denom, 0.0);

  Direction out;
  out.lambda = lambda;
  out.v.resize(grad_loss.size());
  for (std::size_t i = 0; i < grad_loss.size(); ++i)
    out.v[i] = grad_loss[i] - lambda * grad_score[i];
  return out;
}

std::vector<double> linear_combo_direction(std::span<const double> grad_loss,
                                           std::span<const double> grad_score,
                                           double lambda_fixed) {
  if (grad_loss.size() != grad_score.size())
    throw std::invalid_argument("linear_combo_direction: dimension mismatch");
  if (lambda_fixed < 0.0 || lambda_fixed > 1.0)
    throw std::invalid_argument("linear_combo_direction: lambda in [0, 1]");
  std::vector<double> v(grad_loss.size());
  for (std::size_t i = 0; i < grad_loss.size(); ++i)
    v[i] = (1.0 - lambda_fixed) * grad_loss[i] - lambda_fixed * grad_score[i];
  return v;
}

Direction inverse_bilevel_direction(std::span<const double> grad_loss,
                                    std::span<const double> grad_score,
                                    const BarrierSettings& settings) {
  if (grad_loss.size() != grad_score.size())
    throw std::invalid_argument("inverse_bilevel_direction: dimension mismatch");
  check_finite(grad_loss, "inverse_bilevel_direction");
  check_finite(grad_score, "inverse_bilevel_direction");

  double nl2 = norm_sq(grad_loss);
  double denom = std::max(nl2, settings.tau);
  double lambda =
      std::max((settings.beta * nl2 + inner(grad_score, grad_loss)) / denom, 0.0);

  Direction out;
  out.lambda = lambda;
  out.v.resize(grad_loss.size());
  for (std::size_t i = 0; i < grad_loss.size(); ++i)
    out.v[i] = -grad_score[i] + lambda * grad_loss[i];
  return out;
}

Direction compute_direction(std::span<const double> grad_loss,
                            std::span<const double> grad_score,
                            const BarrierSettings& settings) {
  switch (settings.variant) {
    case BarrierSettings::Variant::Dbgd:
      return dbgd_direction(grad_loss, grad_score, settings);
    case BarrierSettings::Variant::Linear: {
      Direction out;
      out.lambda = settings.lambda_fixed;
      out.v = linear_combo_direction(grad_loss, grad_score,
                                     settings.lambda_fixed);
      return out;
    }
    case BarrierSettings::Variant::Inverse:
      return inverse_bilevel_direction(grad_loss, grad_score, settings);
  }
  throw std::logic_error("compute_direction: unknown variant");
}

DbgdResult dbgd_optimize(const BiObjective& objective, std::vector<double> x0,
                         const BarrierSettings& settings,
                         const OptimSettings& opt, bool use_adam) {
  AdamSettings adam_settings;
  adam_settings.lr = opt.lr;
  adam_settings.weight_decay = opt.weight_decay;
  AdamState adam(x0.size(), adam_settings);

  ScoreTrace trace;
  std::vector<double> x = std::move(x0);
  for (long t = 0; t <= opt.iterations; ++t) {
    BiObjectiveEval eval = objective(x);
    if (eval.grad_score.size() != x.size() || eval.grad_loss.size() != x.size())
      throw std::invalid_argument("dbgd_optimize: gradient dimension mismatch");
    Direction dir = compute_direction(eval.grad_loss, eval.grad_score, settings);
    trace.append({t, eval.score, eval.loss, dir.lambda, norm(eval.grad_score),
                  norm(eval.grad_loss)});
    if (!std::isfinite(eval.score) || !std::isfinite(eval.loss))
      throw NonFiniteObjective("dbgd_optimize: non-finite objective at step " +
                                   std::to_string(t),
                               trace);
    if (t == opt.iterations) break;
    if (use_adam) {
      adam.step(dir.v, x);
    } else {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= opt.lr * dir.v[i];
    }
  }
  return {std::move(x), std::move(trace)};
}

}  // namespace latentforge
