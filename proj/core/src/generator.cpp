#include "latentforge/generator.hpp"

#include <cmath>
#include <stdexcept>

#include "latentforge/rng.hpp"

namespace latentforge {

ImageGrid generate(const Generator& generator, const LatentCode& code) {
  GeneratorDims d = generator.dims();
  if (static_cast<int>(code.z.size()) != d.z_dim ||
      static_cast<int>(code.y.size()) != d.y_dim)
    throw std::invalid_argument("generate: latent dims do not match generator");
  return generator.forward(code);
}

namespace {

double softplus(double x) {
  // overflow-safe: max(x, 0) + log1p(exp(-|x|))
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

constexpr std::uint64_t kProjStreamCx = 101;
constexpr std::uint64_t kProjStreamCy = 102;
constexpr std::uint64_t kProjStreamR = 103;
constexpr std::uint64_t kColorStream = 104;

std::vector<double> draw_matrix(std::uint64_t seed, std::uint64_t stream,
                                std::size_t count, double scale) {
  RngStream rng(seed, stream);
  std::vector<double> m(count);
  for (double& v : m) v = scale * rng.normal();
  return m;
}

}  // namespace

double softclip(double v, double width) {
  return width * (softplus(v / width) - softplus((v - 1.0) / width));
}

double softclip_derivative(double v, double width) {
  return sigmoid(v / width) - sigmoid((v - 1.0) / width);
}

BlobGenerator::BlobGenerator(const Settings& settings) : settings_(settings) {
  if (settings.z_dim < 1 || settings.y_dim < 0)
    throw std::invalid_argument("BlobGenerator: z_dim >= 1, y_dim >= 0");
  if (settings.height <= 0 || settings.width <= 0 || settings.blobs <= 0)
    throw std::invalid_argument("BlobGenerator: bad dimensions");
  std::size_t rows = static_cast<std::size_t>(settings.blobs) * settings.z_dim;
  double z_scale = 1.0 / std::sqrt(static_cast<double>(settings.z_dim));
  proj_cx_ = draw_matrix(settings.seed, kProjStreamCx, rows, z_scale);
  proj_cy_ = draw_matrix(settings.seed, kProjStreamCy, rows, z_scale);
  proj_r_ = draw_matrix(settings.seed, kProjStreamR, rows, z_scale);
  if (settings.y_dim > 0) {
    double y_scale =
        settings.color_scale / std::sqrt(static_cast<double>(settings.y_dim));
    color_map_ = draw_matrix(settings.seed, kColorStream,
                             static_cast<std::size_t>(settings.blobs) * 3 *
                                 settings.y_dim,
                             y_scale);
  }
}

GeneratorDims BlobGenerator::dims() const {
  return {settings_.z_dim, settings_.y_dim, settings_.height, settings_.width};
}

BlobGenerator::BlobGeometry BlobGenerator::geometry(const LatentCode& code,
                                                    int blob) const {
  const std::size_t off = static_cast<std::size_t>(blob) * settings_.z_dim;
  double rx = 0.0, ry = 0.0, rr = 0.0;
  for (int j = 0; j < settings_.z_dim; ++j) {
    rx += proj_cx_[off + j] * code.z[j];
    ry += proj_cy_[off + j] * code.z[j];
    rr += proj_r_[off + j] * code.z[j];
  }
  BlobGeometry g;
  g.raw_x = rx;
  g.raw_y = ry;
  g.raw_r = rr;
  g.center_x = (0.5 + 0.35 * std::tanh(rx)) * (settings_.width - 1);
  g.center_y = (0.5 + 0.35 * std::tanh(ry)) * (settings_.height - 1);
  double span = std::min(settings_.height, settings_.width);
  g.radius = (0.10 + 0.25 * sigmoid(rr)) * span;
  return g;
}

void BlobGenerator::blob_colors(const LatentCode& code,
                                std::vector<double>& colors) const {
  colors.assign(static_cast<std::size_t>(settings_.blobs) * 3, 0.0);
  if (settings_.y_dim == 0) return;
  for (int b = 0; b < settings_.blobs; ++b)
    for (int c = 0; c < 3; ++c) {
      const std::size_t off =
          (static_cast<std::size_t>(b) * 3 + c) * settings_.y_dim;
      double acc = 0.0;
      for (int j = 0; j < settings_.y_dim; ++j)
        acc += color_map_[off + j] * code.y[j];
      colors[static_cast<std::size_t>(b) * 3 + c] = acc;
    }
}

ImageGrid BlobGenerator::forward(const LatentCode& code) const {
  const int h = settings_.height, w = settings_.width, nb = settings_.blobs;
  std::vector<BlobGeometry> geo(nb);
  for (int b = 0; b < nb; ++b) geo[b] = geometry(code, b);
  std::vector<double> colors;
  blob_colors(code, colors);

  ImageGrid out(h, w);
  std::vector<double> field(static_cast<std::size_t>(nb));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      for (int b = 0; b < nb; ++b) {
        double dx = x - geo[b].center_x;
        double dy = y - geo[b].center_y;
        double r2 = geo[b].radius * geo[b].radius;
        field[b] = std::exp(-(dx * dx + dy * dy) / r2);
      }
      for (int c = 0; c < 3; ++c) {
        double pre = 0.0;
        for (int b = 0; b < nb; ++b) pre += colors[b * 3 + c] * field[b];
        out.at(y, x, c) = softclip(pre, settings_.clip_width);
      }
    }
  return out;
}

LatentCode BlobGenerator::vjp(const LatentCode& code,
                              const ImageGrid& cotangent) const {
  const int h = settings_.height, w = settings_.width, nb = settings_.blobs;
  if (cotangent.height() != h || cotangent.width() != w)
    throw std::invalid_argument("BlobGenerator::vjp: cotangent shape mismatch");
  std::vector<BlobGeometry> geo(nb);
  for (int b = 0; b < nb; ++b) geo[b] = geometry(code, b);
  std::vector<double> colors;
  blob_colors(code, colors);

  std::vector<double> grad_color(static_cast<std::size_t>(nb) * 3, 0.0);
  std::vector<double> grad_cx(nb, 0.0), grad_cy(nb, 0.0), grad_r(nb, 0.0);
  std::vector<double> field(static_cast<std::size_t>(nb));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      for (int b = 0; b < nb; ++b) {
        double dx = x - geo[b].center_x;
        double dy = y - geo[b].center_y;
        double r2 = geo[b].radius * geo[b].radius;
        field[b] = std::exp(-(dx * dx + dy * dy) / r2);
      }
      double d[3];
      for (int c = 0; c < 3; ++c) {
        double pre = 0.0;
        for (int b = 0; b < nb; ++b) pre += colors[b * 3 + c] * field[b];
        d[c] = cotangent.at(y, x, c) *
               softclip_derivative(pre, settings_.clip_width);
      }
      for (int b = 0; b < nb; ++b) {
        double g_field = 0.0;
        for (int c = 0; c < 3; ++c) {
          grad_color[b * 3 + c] += d[c] * field[b];
          g_field += d[c] * colors[b * 3 + c];
        }
        double dx = x - geo[b].center_x;
        double dy = y - geo[b].center_y;
        double r = geo[b].radius;
        double common = g_field * field[b];
        grad_cx[b] += common * 2.0 * dx / (r * r);
        grad_cy[b] += common * 2.0 * dy / (r * r);
        grad_r[b] += common * 2.0 * (dx * dx + dy * dy) / (r * r * r);
      }
    }

  LatentCode grad;
  grad.z.assign(settings_.z_dim, 0.0);
  grad.y.assign(settings_.y_dim, 0.0);
  double span = std::min(h, w);
  for (int b = 0; b < nb; ++b) {
    double tx = std::tanh(geo[b].raw_x);
    double ty = std::tanh(geo[b].raw_y);
    double sr = sigmoid(geo[b].raw_r);
    double d_raw_x = grad_cx[b] * 0.35 * (1.0 - tx * tx) * (w - 1);
    double d_raw_y = grad_cy[b] * 0.35 * (1.0 - ty * ty) * (h - 1);
    double d_raw_r = grad_r[b] * 0.25 * sr * (1.0 - sr) * span;
    const std::size_t off = static_cast<std::size_t>(b) * settings_.z_dim;
    for (int j = 0; j < settings_.z_dim; ++j)
      grad.z[j] += d_raw_x * proj_cx_[off + j] + d_raw_y * proj_cy_[off + j] +
                   d_raw_r * proj_r_[off + j];
    for (int c = 0; c < 3; ++c) {
      const std::size_t coff =
          (static_cast<std::size_t>(b) * 3 + c) * settings_.y_dim;
      for (int j = 0; j < settings_.y_dim; ++j)
        grad.y[j] += grad_color[b * 3 + c] * color_map_[coff + j];
    }
  }
  return grad;
}

}  // namespace latentforge
