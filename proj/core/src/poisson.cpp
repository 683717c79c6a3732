#include "latentforge/poisson.hpp"

#include <cmath>
#include <stdexcept>

namespace latentforge {

PoissonResult poisson_blend(const ImageGrid& fg_scaled, const ImageGrid& bg,
                            const CompositionParams& params,
                            const PoissonSettings& settings) {
  PasteRegion r = paste_region(params, bg.height(), bg.width());
  if (fg_scaled.height() != r.height || fg_scaled.width() != r.width)
    throw std::invalid_argument("poisson_blend: foreground must be paste-sized");

  // Unknowns are the strict interior of the paste region; the outermost ring
  // (and anything at the image border) is Dirichlet data taken from the
  // background. The right-hand side carries the source Laplacian.
  const int rh = r.height, rw = r.width;
  constexpr int kDy[4] = {-1, 1, 0, 0};
  constexpr int kDx[4] = {0, 0, -1, 1};
  auto in_image = [&](int gy, int gx) {
    return gy >= 0 && gy < bg.height() && gx >= 0 && gx < bg.width();
  };
  auto is_interior = [&](int y, int x) {
    if (y < 1 || y >= rh - 1 || x < 1 || x >= rw - 1) return false;
    for (int d = 0; d < 4; ++d)
      if (!in_image(r.y0 + y + kDy[d], r.x0 + x + kDx[d])) return false;
    return true;
  };

  std::vector<int> index(static_cast<std::size_t>(rh) * rw, -1);
  std::vector<std::pair<int, int>> cells;
  for (int y = 0; y < rh; ++y)
    for (int x = 0; x < rw; ++x)
      if (is_interior(y, x)) {
        index[static_cast<std::size_t>(y) * rw + x] =
            static_cast<int>(cells.size());
        cells.emplace_back(y, x);
      }
  const std::size_t n = cells.size();

  PoissonResult out;
  if (n == 0) {
    // Degenerate sliver: nothing to solve, keep the plain paste.
    out.image = clamp01(fuse(fg_scaled, bg, params));
    return out;
  }
  out.image = bg;

  auto apply_A = [&](const std::vector<double>& u, std::vector<double>& Au) {
    for (std::size_t i = 0; i < n; ++i) {
      auto [y, x] = cells[i];
      double acc = 4.0 * u[i];
      for (int d = 0; d < 4; ++d) {
        int ni = index[static_cast<std::size_t>(y + kDy[d]) * rw + (x + kDx[d])];
        if (ni >= 0) acc -= u[static_cast<std::size_t>(ni)];
      }
      Au[i] = acc;
    }
  };

  std::vector<double> b(n), u(n), residual(n), direction(n), a_dir(n);
  double worst_residual = 0.0;
  int worst_iters = 0;
  bool all_converged = true;

  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      auto [y, x] = cells[i];
      double acc = 0.0;
      for (int d = 0; d < 4; ++d) {
        int ny = y + kDy[d], nx = x + kDx[d];
        acc += fg_scaled.at(y, x, c) - fg_scaled.at(ny, nx, c);
        if (index[static_cast<std::size_t>(ny) * rw + nx] < 0)
          acc += bg.at(r.y0 + ny, r.x0 + nx, c);  // Dirichlet ring value
      }
      b[i] = acc;
      u[i] = fg_scaled.at(y, x, c);  // warm start from the source
    }

    apply_A(u, a_dir);
    double rr = 0.0, rinf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] = b[i] - a_dir[i];
      rr += residual[i] * residual[i];
      rinf = std::max(rinf, std::abs(residual[i]));
    }
    direction = residual;
    if (c == 0) {
      out.residual_history.push_back(rinf);
      if (settings.record_iterates) out.iterate_history.push_back(u);
    }
    int iters = 0;
    while (rinf >= settings.tol && iters < settings.max_iters) {
      apply_A(direction, a_dir);
      double d_ad = 0.0;
      for (std::size_t i = 0; i < n; ++i) d_ad += direction[i] * a_dir[i];
      if (d_ad <= 0.0) break;  // numerically exhausted
      double alpha = rr / d_ad;
      double rr_next = 0.0;
      rinf = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        u[i] += alpha * direction[i];
        residual[i] -= alpha * a_dir[i];
        rr_next += residual[i] * residual[i];
        rinf = std::max(rinf, std::abs(residual[i]));
      }
      double beta = rr_next / rr;
      rr = rr_next;
      for (std::size_t i = 0; i < n; ++i)
        direction[i] = residual[i] + beta * direction[i];
      ++iters;
      if (c == 0) {
        out.residual_history.push_back(rinf);
        if (settings.record_iterates) out.iterate_history.push_back(u);
      }
    }
    if (rinf >= settings.tol) all_converged = false;
    worst_residual = std::max(worst_residual, rinf);
    worst_iters = std::max(worst_iters, iters);

    for (std::size_t i = 0; i < n; ++i)
      out.image.at(r.y0 + cells[i].first, r.x0 + cells[i].second, c) = u[i];
  }

  out.converged = all_converged;
  out.iterations = worst_iters;
  out.residual_inf = worst_residual;
  out.image = clamp01(out.image);
  return out;
}

}  // namespace latentforge
