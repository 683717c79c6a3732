#pragma once

#include <cstdint>
#include <vector>

namespace latentforge {

/// Components of the noise part are kept inside [-kDefaultZBound, kDefaultZBound]
/// by truncation; the class-embedding part is unconstrained.
inline constexpr double kDefaultZBound = 2.0;

/// Generator input: noise vector z plus class-embedding vector y.
/// y may be empty (unconditional generators).
struct LatentCode {
  std::vector<double> z;
  std::vector<double> y;

  bool same_dims(const LatentCode& other) const {
    return z.size() == other.z.size() && y.size() == other.y.size();
  }
};

/// Hard clamp of every z component to [-bound, bound]; y is never truncated.
LatentCode truncate_z(LatentCode code, double bound = kDefaultZBound);

/// k basis codes with unconstrained scalar weights; the search state of the
/// over-parameterized optimization. Immutable after construction.
class BasisEnsemble {
 public:
  BasisEnsemble(std::vector<LatentCode> basis, std::vector<double> weights);

  std::size_t size() const { return basis_.size(); }
  const std::vector<LatentCode>& basis() const { return basis_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Uniform-weight ensemble (each weight 1/k).
  static BasisEnsemble uniform(std::vector<LatentCode> basis);

 private:
  std::vector<LatentCode> basis_;
  std::vector<double> weights_;
};

/// Weighted sum of the basis codes without truncation.
LatentCode effective_code_raw(const BasisEnsemble& ensemble);

/// Weighted sum with the z part truncated to [-z_bound, z_bound].
LatentCode effective_code(const BasisEnsemble& ensemble,
                          double z_bound = kDefaultZBound);

}  // namespace latentforge
