#include "latentforge/latent.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace latentforge {

LatentCode truncate_z(LatentCode code, double bound) {
  for (double& v : code.z) v = std::clamp(v, -bound, bound);
  return code;
}

BasisEnsemble::BasisEnsemble(std::vector<LatentCode> basis,
                             std::vector<double> weights)
    : basis_(std::move(basis)), weights_(std::move(weights)) {
  if (basis_.empty())
    throw std::invalid_argument("BasisEnsemble: at least one basis code");
  if (basis_.size() != weights_.size())
    throw std::invalid_argument("BasisEnsemble: basis/weight length mismatch");
  for (const LatentCode& code : basis_)
    if (!code.same_dims(basis_.front()))
      throw std::invalid_argument("BasisEnsemble: inconsistent code dims");
  if (basis_.front().z.empty())
    throw std::invalid_argument("BasisEnsemble: z must be non-empty");
}

BasisEnsemble BasisEnsemble::uniform(std::vector<LatentCode> basis) {
  std::vector<double> w(basis.size(), 1.0 / static_cast<double>(basis.size()));
  return BasisEnsemble(std::move(basis), std::move(w));
}

LatentCode effective_code_raw(const BasisEnsemble& ensemble) {
  const auto& basis = ensemble.basis();
  const auto& weights = ensemble.weights();
  LatentCode out;
  out.z.assign(basis.front().z.size(), 0.0);
  out.y.assign(basis.front().y.size(), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < out.z.size(); ++j)
      out.z[j] += weights[i] * basis[i].z[j];
    for (std::size_t j = 0; j < out.y.size(); ++j)
      out.y[j] += weights[i] * basis[i].y[j];
  }
  return out;
}

LatentCode effective_code(const BasisEnsemble& ensemble, double z_bound) {
  return truncate_z(effective_code_raw(ensemble), z_bound);
}

}  // namespace latentforge
