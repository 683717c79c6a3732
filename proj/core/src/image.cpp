#include "latentforge/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace latentforge {

ImageGrid::ImageGrid(int height, int width, double fill)
    : height_(height), width_(width) {
  if (height <= 0 || width <= 0)
    throw std::invalid_argument("ImageGrid: dimensions must be positive");
  pixels_.assign(static_cast<std::size_t>(height) * width * 3, fill);
}

void axpy(ImageGrid& dst, const ImageGrid& src, double scale) {
  if (!dst.same_shape(src)) throw std::invalid_argument("axpy: shape mismatch");
  auto d = dst.pixels();
  auto s = src.pixels();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

double dot(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("dot: shape mismatch");
  double acc = 0.0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) acc += pa[i] * pb[i];
  return acc;
}

double max_abs_diff(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i)
    m = std::max(m, std::abs(pa[i] - pb[i]));
  return m;
}

ImageGrid clamp01(const ImageGrid& image) {
  ImageGrid out = image;
  for (double& v : out.pixels()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

}  // namespace latentforge
