#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace latentforge {

struct AdamSettings {
  double lr = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Bias-corrected Adam. step() descends along the supplied gradient; callers
/// ascend by negating it. Value type: copy the state to branch trajectories.
class AdamState {
 public:
  AdamState(std::size_t dim, const AdamSettings& settings = {});

  /// Throws on a non-finite gradient component.
  void step(std::span<const double> grad, std::span<double> params);

  long step_count() const { return step_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamSettings settings_;
  std::vector<double> m_, v_;
  long step_ = 0;
};

}  // namespace latentforge
