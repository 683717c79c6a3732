#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "latentforge/generator.hpp"
#include "latentforge/image.hpp"

namespace latentforge {

/// Cosine similarity <e, f> / (|e| |f|); throws on a zero-norm input.
double cosine_score(std::span<const double> e, std::span<const double> f);

/// Stable 64-bit hash of a query string (FNV-1a); used to seed text
/// embeddings deterministically.
std::uint64_t text_hash(std::string_view text);

/// Text-image relevance scorer. score() returns a value in [-1, 1];
/// image_vjp() returns cotangent * d(score)/d(image).
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<double> embed_text(std::string_view query) const = 0;
  virtual double score(std::span<const double> embedding,
                       const ImageGrid& image) const = 0;
  virtual ImageGrid image_vjp(std::span<const double> embedding,
                              const ImageGrid& image,
                              double cotangent) const = 0;
};

/// Oracle scorer with a known global maximizer: score is an affine map of the
/// mean squared distance to g(target), equal to 1 exactly when the image
/// matches the planted target.
class PlantedScorer : public Scorer {
 public:
  PlantedScorer(const Generator& generator, const LatentCode& target,
                std::uint64_t seed = 0);
  /// Plants an arbitrary image as the maximizer (used for fused targets).
  explicit PlantedScorer(ImageGrid target, std::uint64_t seed = 0);

  std::vector<double> embed_text(std::string_view query) const override;
  double score(std::span<const double> embedding,
               const ImageGrid& image) const override;
  ImageGrid image_vjp(std::span<const double> embedding,
                      const ImageGrid& image, double cotangent) const override;

  const ImageGrid& target() const { return target_; }

 private:
  ImageGrid target_;
  std::uint64_t seed_;
};

/// Cosine similarity between a hash-seeded text embedding and a random
/// projection of the 8x8 average-pooled image. The pooling keeps the feature
/// dimension at 192 for any image size and makes the landscape multi-modal.
class HashEmbedScorer : public Scorer {
 public:
  explicit HashEmbedScorer(std::uint64_t seed = 11);

  std::vector<double> embed_text(std::string_view query) const override;
  double score(std::span<const double> embedding,
               const ImageGrid& image) const override;
  ImageGrid image_vjp(std::span<const double> embedding,
                      const ImageGrid& image, double cotangent) const override;

  static constexpr int kPoolCells = 8;
  static constexpr int kFeatureDim = kPoolCells * kPoolCells * 3;

 private:
  std::vector<double> pool(const ImageGrid& image) const;
  std::vector<double> feature_raw(const ImageGrid& image) const;

  std::uint64_t seed_;
  std::vector<double> projection_;  // kFeatureDim x kFeatureDim
};

/// Two Gaussian bumps over image space: a tall narrow one at a "wrong" target
/// and a broad one at the intended target. Averaging the score over strong
/// augmentations suppresses the narrow bump much more than the broad one,
/// which is what the stagnation benchmark exercises.
class TwoBasinScorer : public Scorer {
 public:
  struct Settings {
    double sigma_narrow = 0.03;
    double sigma_broad = 0.5;
    double amp_narrow = 1.0;
    double amp_broad = 1.0;
    std::uint64_t seed = 0;
  };

  TwoBasinScorer(const Generator& generator, const LatentCode& wrong_target,
                 const LatentCode& right_target, const Settings& settings);

  std::vector<double> embed_text(std::string_view query) const override;
  double score(std::span<const double> embedding,
               const ImageGrid& image) const override;
  ImageGrid image_vjp(std::span<const double> embedding,
                      const ImageGrid& image, double cotangent) const override;

  /// 0 if the image is closer to the wrong target, 1 otherwise.
  int basin_of(const ImageGrid& image) const;

  const ImageGrid& wrong_target() const { return wrong_; }
  const ImageGrid& right_target() const { return right_; }

 private:
  ImageGrid wrong_, right_;
  Settings settings_;
};

/// Score and gradient of scorer(T, g(code)) with respect to the latent code.
struct LatentScore {
  double score = 0.0;
  LatentCode gradient;
};

LatentScore score_gradient_wrt_latent(const Generator& generator,
                                      const Scorer& scorer,
                                      std::span<const double> embedding,
                                      const LatentCode& code);

LatentScore score_gradient_wrt_latent(const Generator& generator,
                                      const Scorer& scorer,
                                      std::string_view query,
                                      const LatentCode& code);

}  // namespace latentforge
