#include "latentforge/augment.hpp"

#include <cmath>
#include <stdexcept>

#include "latentforge/parallel.hpp"

namespace latentforge {

namespace {

ImageGrid apply_color(const AugmentationParams& p, const ImageGrid& in) {
  ImageGrid out(in.height(), in.width());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x)
      for (int c = 0; c < 3; ++c)
        out.at(y, x, c) =
            (in.at(y, x, c) - 0.5) * p.contrast + 0.5 + p.brightness[c];
  return out;
}

ImageGrid apply_color_vjp(const AugmentationParams& p, const ImageGrid& cot) {
  ImageGrid out = cot;
  for (double& v : out.pixels()) v *= p.contrast;
  return out;
}

ImageGrid apply_translate(int dx, int dy, const ImageGrid& in) {
  ImageGrid out(in.height(), in.width());
  for (int y = 0; y < in.height(); ++y) {
    int sy = y - dy;
    if (sy < 0 || sy >= in.height()) continue;
    for (int x = 0; x < in.width(); ++x) {
      int sx = x - dx;
      if (sx < 0 || sx >= in.width()) continue;
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = in.at(sy, sx, c);
    }
  }
  return out;
}

// Bilinear resize by `scale` followed by a recentering crop (scale > 1) or
// zero pad (scale < 1) back to the input size. Linear in the pixel values.
ImageGrid apply_resize(double scale, const ImageGrid& in) {
  const int h = in.height(), w = in.width();
  ImageGrid out(h, w);
  const double off_y = (scale * h - h) / 2.0;
  const double off_x = (scale * w - w) / 2.0;
  for (int y = 0; y < h; ++y) {
    double sy = (y + off_y + 0.5) / scale - 0.5;
    int y0 = static_cast<int>(std::floor(sy));
    double fy = sy - y0;
    for (int x = 0; x < w; ++x) {
      double sx = (x + off_x + 0.5) / scale - 0.5;
      int x0 = static_cast<int>(std::floor(sx));
      double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int ty = 0; ty < 2; ++ty) {
          int yy = y0 + ty;
          if (yy < 0 || yy >= h) continue;
          double wy = ty ? fy : 1.0 - fy;
          for (int tx = 0; tx < 2; ++tx) {
            int xx = x0 + tx;
            if (xx < 0 || xx >= w) continue;
            double wx = tx ? fx : 1.0 - fx;
            acc += wy * wx * in.at(yy, xx, c);
          }
        }
        out.at(y, x, c) = acc;
      }
    }
  }
  return out;
}

ImageGrid apply_resize_vjp(double scale, const ImageGrid& cot) {
  const int h = cot.height(), w = cot.width();
  ImageGrid out(h, w);
  const double off_y = (scale * h - h) / 2.0;
  const double off_x = (scale * w - w) / 2.0;
  for (int y = 0; y < h; ++y) {
    double sy = (y + off_y + 0.5) / scale - 0.5;
    int y0 = static_cast<int>(std::floor(sy));
    double fy = sy - y0;
    for (int x = 0; x < w; ++x) {
      double sx = (x + off_x + 0.5) / scale - 0.5;
      int x0 = static_cast<int>(std::floor(sx));
      double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        double g = cot.at(y, x, c);
        for (int ty = 0; ty < 2; ++ty) {
          int yy = y0 + ty;
          if (yy < 0 || yy >= h) continue;
          double wy = ty ? fy : 1.0 - fy;
          for (int tx = 0; tx < 2; ++tx) {
            int xx = x0 + tx;
            if (xx < 0 || xx >= w) continue;
            double wx = tx ? fx : 1.0 - fx;
            out.at(yy, xx, c) += wy * wx * g;
          }
        }
      }
    }
  }
  return out;
}

ImageGrid apply_cutout(const AugmentationParams& p, const ImageGrid& in) {
  ImageGrid out = in;
  int y1 = std::min(p.cut_y + p.cut_size, in.height());
  int x1 = std::min(p.cut_x + p.cut_size, in.width());
  for (int y = p.cut_y; y < y1; ++y)
    for (int x = p.cut_x; x < x1; ++x)
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = 0.0;
  return out;
}

}  // namespace

AugmentationParams sample_params(const AugSet& enabled, const AugRanges& ranges,
                                 int height, int width, RngStream& rng) {
  AugmentationParams p;
  if (enabled.color) {
    p.color = true;
    for (double& b : p.brightness)
      b = rng.uniform(-ranges.brightness, ranges.brightness);
    p.contrast = rng.uniform(ranges.contrast_lo, ranges.contrast_hi);
  }
  if (enabled.translate) {
    p.translate = true;
    int mx = static_cast<int>(std::floor(ranges.translate_max_frac * width));
    int my = static_cast<int>(std::floor(ranges.translate_max_frac * height));
    p.dx = static_cast<int>(rng.uniform_int(2 * mx + 1)) - mx;
    p.dy = static_cast<int>(rng.uniform_int(2 * my + 1)) - my;
  }
  if (enabled.resize) {
    p.resize = true;
    p.scale = rng.uniform(ranges.resize_lo, ranges.resize_hi);
  }
  if (enabled.cutout) {
    p.cutout = true;
    p.cut_size =
        static_cast<int>(std::floor(ranges.cutout_frac * std::min(height, width)));
    p.cut_y = static_cast<int>(rng.uniform_int(height - p.cut_size + 1));
    p.cut_x = static_cast<int>(rng.uniform_int(width - p.cut_size + 1));
  }
  return p;
}

ImageGrid apply(const AugmentationParams& p, const ImageGrid& image) {
  ImageGrid out = image;
  if (p.color) out = apply_color(p, out);
  if (p.translate) out = apply_translate(p.dx, p.dy, out);
  if (p.resize) out = apply_resize(p.scale, out);
  if (p.cutout) out = apply_cutout(p, out);
  return out;
}

ImageGrid apply_vjp(const AugmentationParams& p, const ImageGrid& cotangent) {
  // Reverse order of the forward stages.
  ImageGrid out = cotangent;
  if (p.cutout) out = apply_cutout(p, out);  // self-adjoint mask
  if (p.resize) out = apply_resize_vjp(p.scale, out);
  if (p.translate) out = apply_translate(-p.dx, -p.dy, out);
  if (p.color) out = apply_color_vjp(p, out);
  return out;
}

namespace {

std::vector<AugmentationParams> draw_params(const AugSpec& spec, int height,
                                            int width) {
  // Draws come sequentially from the supplied stream so the estimate is a
  // pure function of the stream state.
  RngStream rng = spec.stream;
  std::vector<AugmentationParams> params(spec.n_draws);
  for (AugmentationParams& p : params)
    p = sample_params(spec.enabled, spec.ranges, height, width, rng);
  return params;
}

}  // namespace

AugScore augmented_score(const Scorer& scorer,
                         std::span<const double> embedding,
                         const ImageGrid& image, const AugSpec& spec,
                         int threads) {
  if (spec.n_draws < 1)
    throw std::invalid_argument("augmented_score: n_draws must be >= 1");
  AugScore out;
  if (!spec.enabled.any()) {
    out.score = scorer.score(embedding, image);
    out.gradient = scorer.image_vjp(embedding, image, 1.0);
    return out;
  }

  std::vector<AugmentationParams> params =
      draw_params(spec, image.height(), image.width());
  std::vector<double> scores(spec.n_draws);
  std::vector<ImageGrid> grads(spec.n_draws);
  parallel_for(static_cast<std::size_t>(spec.n_draws), threads,
               [&](std::size_t j) {
                 ImageGrid augmented = apply(params[j], image);
                 scores[j] = scorer.score(embedding, augmented);
                 grads[j] = apply_vjp(
                     params[j], scorer.image_vjp(embedding, augmented, 1.0));
               });

  // Index-order reduction keeps the result independent of thread count.
  double sum = 0.0;
  ImageGrid grad(image.height(), image.width());
  for (int j = 0; j < spec.n_draws; ++j) {
    sum += scores[j];
    axpy(grad, grads[j], 1.0);
  }
  double inv = 1.0 / static_cast<double>(spec.n_draws);
  out.score = sum * inv;
  for (double& v : grad.pixels()) v *= inv;
  out.gradient = std::move(grad);
  return out;
}

double augmented_score_value(const Scorer& scorer,
                             std::span<const double> embedding,
                             const ImageGrid& image, const AugSpec& spec,
                             int threads) {
  if (spec.n_draws < 1)
    throw std::invalid_argument("augmented_score_value: n_draws must be >= 1");
  if (!spec.enabled.any()) return scorer.score(embedding, image);

  std::vector<AugmentationParams> params =
      draw_params(spec, image.height(), image.width());
  std::vector<double> scores(spec.n_draws);
  parallel_for(static_cast<std::size_t>(spec.n_draws), threads,
               [&](std::size_t j) {
                 scores[j] = scorer.score(embedding, apply(params[j], image));
               });
  double sum = 0.0;
  for (int j = 0; j < spec.n_draws; ++j) sum += scores[j];
  return sum / static_cast<double>(spec.n_draws);
}

}  // namespace latentforge
