#pragma once

#include <cstdint>
#include <vector>

#include "latentforge/image.hpp"
#include "latentforge/latent.hpp"

namespace latentforge {

struct GeneratorDims {
  int z_dim = 0;
  int y_dim = 0;
  int height = 0;
  int width = 0;
};

/// Differentiable image generator. forward is deterministic and smooth almost
/// everywhere; vjp is its exact reverse-mode adjoint (checked against central
/// finite differences in the test suite).
class Generator {
 public:
  virtual ~Generator() = default;
  virtual GeneratorDims dims() const = 0;
  virtual ImageGrid forward(const LatentCode& code) const = 0;
  virtual LatentCode vjp(const LatentCode& code,
                         const ImageGrid& cotangent) const = 0;
};

/// Dimension-checked forward pass.
ImageGrid generate(const Generator& generator, const LatentCode& code);

/// Smooth surrogate for clamp(v, 0, 1): width * (softplus(v / width) -
/// softplus((v - 1) / width)). Maps the reals into (0, 1) and is within
/// width * ln 2 of the hard clamp everywhere.
double softclip(double v, double width);
double softclip_derivative(double v, double width);

/// Sum of Gaussian blobs whose centers and radii are driven by z through
/// fixed seeded projections and whose colors are linear in y. A synthetic
/// stand-in for a pretrained conditional generator with the same interface.
class BlobGenerator : public Generator {
 public:
  struct Settings {
    int z_dim = 16;
    int y_dim = 8;
    int height = 64;
    int width = 64;
    int blobs = 4;
    std::uint64_t seed = 7;
    double color_scale = 0.45;
    double clip_width = 0.01;
  };

  explicit BlobGenerator(const Settings& settings);

  GeneratorDims dims() const override;
  ImageGrid forward(const LatentCode& code) const override;
  LatentCode vjp(const LatentCode& code,
                 const ImageGrid& cotangent) const override;

  const Settings& settings() const { return settings_; }

 private:
  struct BlobGeometry {
    double center_x, center_y, radius;
    double raw_x, raw_y, raw_r;  // pre-activation projections
  };
  BlobGeometry geometry(const LatentCode& code, int blob) const;
  void blob_colors(const LatentCode& code, std::vector<double>& colors) const;

  Settings settings_;
  // Per-blob projection rows (z -> center_x, center_y, radius) and the
  // 3 x y_dim color matrices, drawn once from the generator seed.
  std::vector<double> proj_cx_, proj_cy_, proj_r_;  // blobs * z_dim each
  std::vector<double> color_map_;                   // blobs * 3 * y_dim
};

}  // namespace latentforge
