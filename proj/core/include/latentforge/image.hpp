#pragma once

#include <cassert>
#include <span>
#include <vector>

namespace latentforge {

/// Dense H x W x 3 grid of channel intensities. Values are nominally in
/// [0, 1]; intermediate gradient computations may leave that range, clamping
/// happens at I/O boundaries only.
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }

  double& at(int y, int x, int c) {
    assert(in_bounds(y, x, c));
    return pixels_[index(y, x, c)];
  }
  double at(int y, int x, int c) const {
    assert(in_bounds(y, x, c));
    return pixels_[index(y, x, c)];
  }

  std::span<double> pixels() { return pixels_; }
  std::span<const double> pixels() const { return pixels_; }

  bool same_shape(const ImageGrid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3 + c;
  }
  bool in_bounds(int y, int x, int c) const {
    return y >= 0 && y < height_ && x >= 0 && x < width_ && c >= 0 && c < 3;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> pixels_;
};

/// dst += scale * src (shapes must match).
void axpy(ImageGrid& dst, const ImageGrid& src, double scale);

double dot(const ImageGrid& a, const ImageGrid& b);

/// Largest absolute per-channel difference.
double max_abs_diff(const ImageGrid& a, const ImageGrid& b);

/// Hard clamp of every channel to [0, 1].
ImageGrid clamp01(const ImageGrid& image);

}  // namespace latentforge
