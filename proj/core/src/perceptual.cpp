#include "latentforge/perceptual.hpp"

#include <cmath>
#include <stdexcept>

namespace latentforge {

namespace {

constexpr double kKernel[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
constexpr double kSigmaEps = 1e-12;  // keeps sqrt differentiable at var = 0

ImageGrid blur(const ImageGrid& in) {
  const int h = in.height(), w = in.width();
  ImageGrid tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int t = -2; t <= 2; ++t)
          acc += kKernel[t + 2] * in.at(y, std::clamp(x + t, 0, w - 1), c);
        tmp.at(y, x, c) = acc;
      }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int t = -2; t <= 2; ++t)
          acc += kKernel[t + 2] * tmp.at(std::clamp(y + t, 0, h - 1), x, c);
        out.at(y, x, c) = acc;
      }
  return out;
}

// Adjoint of blur (scatter with the same clamped indices).
ImageGrid blur_transpose(const ImageGrid& cot) {
  const int h = cot.height(), w = cot.width();
  ImageGrid tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double g = cot.at(y, x, c);
        for (int t = -2; t <= 2; ++t)
          tmp.at(std::clamp(y + t, 0, h - 1), x, c) += kKernel[t + 2] * g;
      }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double g = tmp.at(y, x, c);
        for (int t = -2; t <= 2; ++t)
          out.at(y, std::clamp(x + t, 0, w - 1), c) += kKernel[t + 2] * g;
      }
  return out;
}

ImageGrid decimate(const ImageGrid& in) {
  int oh = (in.height() + 1) / 2, ow = (in.width() + 1) / 2;
  ImageGrid out(oh, ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = in.at(2 * y, 2 * x, c);
  return out;
}

ImageGrid decimate_transpose(const ImageGrid& cot, int in_h, int in_w) {
  ImageGrid out(in_h, in_w);
  for (int y = 0; y < cot.height(); ++y)
    for (int x = 0; x < cot.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(2 * y, 2 * x, c) = cot.at(y, x, c);
  return out;
}

std::vector<double> resolve_weights(const PerceptualSettings& s) {
  if (s.levels < 1)
    throw std::invalid_argument("perceptual_loss: levels must be >= 1");
  if (s.window < 1)
    throw std::invalid_argument("perceptual_loss: window must be >= 1");
  if (s.level_weights.empty())
    return std::vector<double>(s.levels, 1.0 / s.levels);
  if (static_cast<int>(s.level_weights.size()) != s.levels)
    throw std::invalid_argument("perceptual_loss: weight count != levels");
  return s.level_weights;
}

struct LevelStats {
  double loss = 0.0;
};

// Accumulates the window-statistics loss of one level; when grad_a/grad_b are
// non-null also its gradient with respect to the level pixels.
LevelStats level_loss(const ImageGrid& a, const ImageGrid& b, int window,
                      ImageGrid* grad_a, ImageGrid* grad_b) {
  const int h = a.height(), w = a.width();
  const int tiles_y = (h + window - 1) / window;
  const int tiles_x = (w + window - 1) / window;
  const double tile_norm = 1.0 / (static_cast<double>(tiles_y) * tiles_x * 3);

  LevelStats out;
  for (int ty = 0; ty < tiles_y; ++ty) {
    int y0 = ty * window, y1 = std::min(y0 + window, h);
    for (int tx = 0; tx < tiles_x; ++tx) {
      int x0 = tx * window, x1 = std::min(x0 + window, w);
      double inv_n = 1.0 / (static_cast<double>(y1 - y0) * (x1 - x0));
      for (int c = 0; c < 3; ++c) {
        double sa = 0.0, sb = 0.0, qa = 0.0, qb = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) {
            double va = a.at(y, x, c), vb = b.at(y, x, c);
            sa += va;
            sb += vb;
            qa += va * va;
            qb += vb * vb;
          }
        double mu_a = sa * inv_n, mu_b = sb * inv_n;
        double var_a = std::max(qa * inv_n - mu_a * mu_a, 0.0);
        double var_b = std::max(qb * inv_n - mu_b * mu_b, 0.0);
        double sig_a = std::sqrt(var_a + kSigmaEps);
        double sig_b = std::sqrt(var_b + kSigmaEps);
        double dmu = mu_a - mu_b, dsig = sig_a - sig_b;
        out.loss += tile_norm * (dmu * dmu + dsig * dsig);
        if (grad_a) {
          double g_mu = tile_norm * 2.0 * dmu * inv_n;
          double g_sig_a = tile_norm * 2.0 * dsig / (2.0 * sig_a);
          double g_sig_b = -tile_norm * 2.0 * dsig / (2.0 * sig_b);
          for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) {
              double va = a.at(y, x, c), vb = b.at(y, x, c);
              grad_a->at(y, x, c) +=
                  g_mu + g_sig_a * 2.0 * (va - mu_a) * inv_n;
              grad_b->at(y, x, c) +=
                  -g_mu + g_sig_b * 2.0 * (vb - mu_b) * inv_n;
            }
        }
      }
    }
  }
  return out;
}

}  // namespace

ImageGrid pyramid_reduce(const ImageGrid& image) { return decimate(blur(image)); }

double perceptual_loss(const ImageGrid& a, const ImageGrid& b,
                       const PerceptualSettings& settings) {
  if (!a.same_shape(b))
    throw std::invalid_argument("perceptual_loss: shape mismatch");
  std::vector<double> weights = resolve_weights(settings);
  ImageGrid la = a, lb = b;
  double total = 0.0;
  for (int l = 0; l < settings.levels; ++l) {
    if (l > 0) {
      la = pyramid_reduce(la);
      lb = pyramid_reduce(lb);
    }
    total += weights[l] * level_loss(la, lb, settings.window, nullptr, nullptr).loss;
  }
  return total;
}

PerceptualVjp perceptual_loss_vjp(const ImageGrid& a, const ImageGrid& b,
                                  const PerceptualSettings& settings) {
  if (!a.same_shape(b))
    throw std::invalid_argument("perceptual_loss: shape mismatch");
  std::vector<double> weights = resolve_weights(settings);

  std::vector<ImageGrid> pa{a}, pb{b};
  for (int l = 1; l < settings.levels; ++l) {
    pa.push_back(pyramid_reduce(pa.back()));
    pb.push_back(pyramid_reduce(pb.back()));
  }

  PerceptualVjp out;
  std::vector<ImageGrid> ga(settings.levels), gb(settings.levels);
  for (int l = 0; l < settings.levels; ++l) {
    ga[l] = ImageGrid(pa[l].height(), pa[l].width());
    gb[l] = ImageGrid(pb[l].height(), pb[l].width());
    LevelStats stats = level_loss(pa[l], pb[l], settings.window, &ga[l], &gb[l]);
    for (double& v : ga[l].pixels()) v *= weights[l];
    for (double& v : gb[l].pixels()) v *= weights[l];
    out.loss += weights[l] * stats.loss;
  }

  // Pull level gradients back to the full-resolution images.
  for (int l = settings.levels - 1; l > 0; --l) {
    ImageGrid up_a = blur_transpose(
        decimate_transpose(ga[l], pa[l - 1].height(), pa[l - 1].width()));
    ImageGrid up_b = blur_transpose(
        decimate_transpose(gb[l], pb[l - 1].height(), pb[l - 1].width()));
    axpy(ga[l - 1], up_a, 1.0);
    axpy(gb[l - 1], up_b, 1.0);
  }
  out.grad_a = std::move(ga[0]);
  out.grad_b = std::move(gb[0]);
  return out;
}

}  // namespace latentforge
