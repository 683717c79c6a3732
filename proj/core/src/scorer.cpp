#include "latentforge/scorer.hpp"

#include <cmath>
#include <stdexcept>

#include "latentforge/rng.hpp"

namespace latentforge {

namespace {

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

std::vector<double> unit_normal_vector(std::uint64_t seed,
                                       std::uint64_t stream, int dim) {
  RngStream rng(seed, stream);
  std::vector<double> v(dim);
  for (double& x : v) x = rng.normal();
  double n = norm(v);
  for (double& x : v) x /= n;
  return v;
}

double mean_sq_diff(const ImageGrid& a, const ImageGrid& b) {
  auto pa = a.pixels();
  auto pb = b.pixels();
  double acc = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    double d = pa[i] - pb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pa.size());
}

constexpr std::uint64_t kTextEmbedStream = 201;
constexpr std::uint64_t kProjectionStream = 202;

}  // namespace

double cosine_score(std::span<const double> e, std::span<const double> f) {
  if (e.size() != f.size())
    throw std::invalid_argument("cosine_score: dimension mismatch");
  double ne = norm(e), nf = norm(f);
  if (ne == 0.0 || nf == 0.0)
    throw std::invalid_argument("cosine_score: zero-norm input");
  double acc = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) acc += e[i] * f[i];
  return acc / (ne * nf);
}

std::uint64_t text_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// PlantedScorer

PlantedScorer::PlantedScorer(const Generator& generator,
                             const LatentCode& target, std::uint64_t seed)
    : target_(generate(generator, target)), seed_(seed) {}

PlantedScorer::PlantedScorer(ImageGrid target, std::uint64_t seed)
    : target_(std::move(target)), seed_(seed) {}

std::vector<double> PlantedScorer::embed_text(std::string_view query) const {
  return unit_normal_vector(seed_ ^ text_hash(query), kTextEmbedStream, 8);
}

double PlantedScorer::score(std::span<const double>,
                            const ImageGrid& image) const {
  if (!image.same_shape(target_))
    throw std::invalid_argument("PlantedScorer: image shape mismatch");
  // 1 - msd maps to [0, 1]; rescale to [-1, 1].
  return 1.0 - 2.0 * mean_sq_diff(image, target_);
}

ImageGrid PlantedScorer::image_vjp(std::span<const double>,
                                   const ImageGrid& image,
                                   double cotangent) const {
  if (!image.same_shape(target_))
    throw std::invalid_argument("PlantedScorer: image shape mismatch");
  ImageGrid grad(image.height(), image.width());
  auto g = grad.pixels();
  auto pi = image.pixels();
  auto pt = target_.pixels();
  double scale = -4.0 * cotangent / static_cast<double>(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = scale * (pi[i] - pt[i]);
  return grad;
}

// ---------------------------------------------------------------------------
// HashEmbedScorer

HashEmbedScorer::HashEmbedScorer(std::uint64_t seed) : seed_(seed) {
  RngStream rng(seed_, kProjectionStream);
  double scale = 1.0 / std::sqrt(static_cast<double>(kFeatureDim));
  projection_.resize(static_cast<std::size_t>(kFeatureDim) * kFeatureDim);
  for (double& v : projection_) v = scale * rng.normal();
}

std::vector<double> HashEmbedScorer::embed_text(std::string_view query) const {
  return unit_normal_vector(seed_ ^ text_hash(query), kTextEmbedStream,
                            kFeatureDim);
}

std::vector<double> HashEmbedScorer::pool(const ImageGrid& image) const {
  const int h = image.height(), w = image.width();
  if (h < kPoolCells || w < kPoolCells)
    throw std::invalid_argument("HashEmbedScorer: image smaller than pool grid");
  std::vector<double> pooled(kFeatureDim, 0.0);
  for (int cy = 0; cy < kPoolCells; ++cy) {
    int y0 = cy * h / kPoolCells, y1 = (cy + 1) * h / kPoolCells;
    for (int cx = 0; cx < kPoolCells; ++cx) {
      int x0 = cx * w / kPoolCells, x1 = (cx + 1) * w / kPoolCells;
      double inv = 1.0 / (static_cast<double>(y1 - y0) * (x1 - x0));
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) acc += image.at(y, x, c);
        pooled[(cy * kPoolCells + cx) * 3 + c] = acc * inv;
      }
    }
  }
  return pooled;
}

std::vector<double> HashEmbedScorer::feature_raw(const ImageGrid& image) const {
  std::vector<double> pooled = pool(image);
  std::vector<double> f(kFeatureDim, 0.0);
  for (int i = 0; i < kFeatureDim; ++i) {
    const double* row = &projection_[static_cast<std::size_t>(i) * kFeatureDim];
    double acc = 0.0;
    for (int j = 0; j < kFeatureDim; ++j) acc += row[j] * pooled[j];
    f[i] = acc;
  }
  return f;
}

double HashEmbedScorer::score(std::span<const double> embedding,
                              const ImageGrid& image) const {
  return cosine_score(embedding, feature_raw(image));
}

ImageGrid HashEmbedScorer::image_vjp(std::span<const double> embedding,
                                     const ImageGrid& image,
                                     double cotangent) const {
  std::vector<double> f = feature_raw(image);
  double nf = norm(f);
  if (nf == 0.0)
    throw std::invalid_argument("HashEmbedScorer: degenerate feature");
  double ne = norm(embedding);
  if (ne == 0.0)
    throw std::invalid_argument("HashEmbedScorer: zero-norm embedding");
  double s = 0.0;
  for (int i = 0; i < kFeatureDim; ++i) s += embedding[i] * f[i];
  s /= (ne * nf);

  // d(score)/d(f) = (e/|e| - s * f/|f|) / |f|
  std::vector<double> g_f(kFeatureDim);
  for (int i = 0; i < kFeatureDim; ++i)
    g_f[i] = cotangent * (embedding[i] / ne - s * f[i] / nf) / nf;

  std::vector<double> g_pool(kFeatureDim, 0.0);
  for (int i = 0; i < kFeatureDim; ++i) {
    const double* row = &projection_[static_cast<std::size_t>(i) * kFeatureDim];
    for (int j = 0; j < kFeatureDim; ++j) g_pool[j] += row[j] * g_f[i];
  }

  const int h = image.height(), w = image.width();
  ImageGrid grad(h, w);
  for (int cy = 0; cy < kPoolCells; ++cy) {
    int y0 = cy * h / kPoolCells, y1 = (cy + 1) * h / kPoolCells;
    for (int cx = 0; cx < kPoolCells; ++cx) {
      int x0 = cx * w / kPoolCells, x1 = (cx + 1) * w / kPoolCells;
      double inv = 1.0 / (static_cast<double>(y1 - y0) * (x1 - x0));
      for (int c = 0; c < 3; ++c) {
        double g = g_pool[(cy * kPoolCells + cx) * 3 + c] * inv;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) grad.at(y, x, c) = g;
      }
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// TwoBasinScorer

TwoBasinScorer::TwoBasinScorer(const Generator& generator,
                               const LatentCode& wrong_target,
                               const LatentCode& right_target,
                               const Settings& settings)
    : wrong_(generate(generator, wrong_target)),
      right_(generate(generator, right_target)),
      settings_(settings) {}

std::vector<double> TwoBasinScorer::embed_text(std::string_view query) const {
  return unit_normal_vector(settings_.seed ^ text_hash(query),
                            kTextEmbedStream, 8);
}

double TwoBasinScorer::score(std::span<const double>,
                             const ImageGrid& image) const {
  double mn = mean_sq_diff(image, wrong_);
  double mb = mean_sq_diff(image, right_);
  double sn = settings_.sigma_narrow, sb = settings_.sigma_broad;
  double bump_n = settings_.amp_narrow * std::exp(-mn / (2.0 * sn * sn));
  double bump_b = settings_.amp_broad * std::exp(-mb / (2.0 * sb * sb));
  return (bump_n + bump_b) / (settings_.amp_narrow + settings_.amp_broad);
}

ImageGrid TwoBasinScorer::image_vjp(std::span<const double>,
                                    const ImageGrid& image,
                                    double cotangent) const {
  double mn = mean_sq_diff(image, wrong_);
  double mb = mean_sq_diff(image, right_);
  double sn = settings_.sigma_narrow, sb = settings_.sigma_broad;
  double total = settings_.amp_narrow + settings_.amp_broad;
  double bump_n = settings_.amp_narrow * std::exp(-mn / (2.0 * sn * sn)) / total;
  double bump_b = settings_.amp_broad * std::exp(-mb / (2.0 * sb * sb)) / total;

  ImageGrid grad(image.height(), image.width());
  auto g = grad.pixels();
  auto pi = image.pixels();
  auto pw = wrong_.pixels();
  auto pr = right_.pixels();
  double n = static_cast<double>(g.size());
  double cn = -cotangent * bump_n / (sn * sn) / n;
  double cb = -cotangent * bump_b / (sb * sb) / n;
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = cn * (pi[i] - pw[i]) + cb * (pi[i] - pr[i]);
  return grad;
}

int TwoBasinScorer::basin_of(const ImageGrid& image) const {
  return mean_sq_diff(image, wrong_) < mean_sq_diff(image, right_) ? 0 : 1;
}

// ---------------------------------------------------------------------------

LatentScore score_gradient_wrt_latent(const Generator& generator,
                                      const Scorer& scorer,
                                      std::span<const double> embedding,
                                      const LatentCode& code) {
  ImageGrid image = generate(generator, code);
  LatentScore out;
  out.score = scorer.score(embedding, image);
  out.gradient = generator.vjp(code, scorer.image_vjp(embedding, image, 1.0));
  return out;
}

LatentScore score_gradient_wrt_latent(const Generator& generator,
                                      const Scorer& scorer,
                                      std::string_view query,
                                      const LatentCode& code) {
  std::vector<double> e = scorer.embed_text(query);
  return score_gradient_wrt_latent(generator, scorer, e, code);
}

}  // namespace latentforge
