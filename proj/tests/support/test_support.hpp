#pragma once

// Shared helpers for the unit and acceptance suites: random inputs of unit
// scale and central-finite-difference oracles for vjp checks. The oracles
// depend only on forward evaluations, never on the gradients they validate.

#include <cmath>
#include <functional>
#include <vector>

#include "latentforge/generator.hpp"
#include "latentforge/image.hpp"
#include "latentforge/latent.hpp"
#include "latentforge/rng.hpp"

namespace testsupport {

inline double rel_err(double got, double want) {
  double scale = std::max({std::abs(got), std::abs(want), 1e-6});
  return std::abs(got - want) / scale;
}

inline latentforge::LatentCode random_latent(int z_dim, int y_dim,
                                             latentforge::RngStream& rng,
                                             double scale = 1.0) {
  latentforge::LatentCode code;
  code.z.resize(z_dim);
  code.y.resize(y_dim);
  for (double& v : code.z) v = scale * rng.normal();
  for (double& v : code.y) v = scale * rng.normal();
  return code;
}

inline latentforge::ImageGrid random_image(int h, int w,
                                           latentforge::RngStream& rng,
                                           double lo = 0.0, double hi = 1.0) {
  latentforge::ImageGrid image(h, w);
  for (double& v : image.pixels()) v = rng.uniform(lo, hi);
  return image;
}

/// Central finite difference of a scalar function along direction u.
inline double fd_directional(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, const std::vector<double>& u,
    double h = 1e-4) {
  std::vector<double> plus = x, minus = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    plus[i] += h * u[i];
    minus[i] -= h * u[i];
  }
  return (f(plus) - f(minus)) / (2.0 * h);
}

/// Central finite difference of <cot, f(image)> for an image-to-image map,
/// along a random pixel direction.
inline double fd_image_directional(
    const std::function<latentforge::ImageGrid(const latentforge::ImageGrid&)>& f,
    const latentforge::ImageGrid& image, const latentforge::ImageGrid& direction,
    const latentforge::ImageGrid& cotangent, double h = 1e-4) {
  latentforge::ImageGrid plus = image, minus = image;
  latentforge::axpy(plus, direction, h);
  latentforge::axpy(minus, direction, -h);
  return (latentforge::dot(cotangent, f(plus)) -
          latentforge::dot(cotangent, f(minus))) /
         (2.0 * h);
}

/// vjp consistency for a generator: <cot, dg(code)[u]> vs <vjp(code, cot), u>.
inline double generator_fd_error(const latentforge::Generator& gen,
                                 const latentforge::LatentCode& code,
                                 latentforge::RngStream& rng,
                                 double h = 1e-4) {
  using latentforge::LatentCode;
  LatentCode u = random_latent(static_cast<int>(code.z.size()),
                               static_cast<int>(code.y.size()), rng);
  latentforge::ImageGrid cot(gen.dims().height, gen.dims().width);
  for (double& v : cot.pixels()) v = rng.uniform(-1.0, 1.0);

  LatentCode plus = code, minus = code;
  for (std::size_t i = 0; i < code.z.size(); ++i) {
    plus.z[i] += h * u.z[i];
    minus.z[i] -= h * u.z[i];
  }
  for (std::size_t i = 0; i < code.y.size(); ++i) {
    plus.y[i] += h * u.y[i];
    minus.y[i] -= h * u.y[i];
  }
  double fd = (latentforge::dot(cot, gen.forward(plus)) -
               latentforge::dot(cot, gen.forward(minus))) /
              (2.0 * h);

  LatentCode grad = gen.vjp(code, cot);
  double analytic = 0.0;
  for (std::size_t i = 0; i < code.z.size(); ++i) analytic += grad.z[i] * u.z[i];
  for (std::size_t i = 0; i < code.y.size(); ++i) analytic += grad.y[i] * u.y[i];
  return rel_err(analytic, fd);
}

}  // namespace testsupport
