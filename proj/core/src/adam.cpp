#include "latentforge/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace latentforge {

AdamState::AdamState(std::size_t dim, const AdamSettings& settings)
    : settings_(settings), m_(dim, 0.0), v_(dim, 0.0) {
  if (settings.lr <= 0.0) throw std::invalid_argument("Adam: lr must be > 0");
}

void AdamState::step(std::span<const double> grad, std::span<double> params) {
  if (grad.size() != m_.size() || params.size() != m_.size())
    throw std::invalid_argument("Adam: dimension mismatch");
  for (double g : grad)
    if (!std::isfinite(g))
      throw std::runtime_error("Adam: non-finite gradient");

  ++step_;
  double bc1 = 1.0 - std::pow(settings_.beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(settings_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    double g = grad[i] + settings_.weight_decay * params[i];
    m_[i] = settings_.beta1 * m_[i] + (1.0 - settings_.beta1) * g;
    v_[i] = settings_.beta2 * v_[i] + (1.0 - settings_.beta2) * g * g;
    double m_hat = m_[i] / bc1;
    double v_hat = v_[i] / bc2;
    params[i] -= settings_.lr * m_hat / (std::sqrt(v_hat) + settings_.eps);
  }
}

}  // namespace latentforge
