#include "latentforge/fuse.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace latentforge {

std::string to_string(const PastePosition& position) {
  const char* h = position.h == HAnchor::Left     ? "left"
                  : position.h == HAnchor::Center ? "center"
                                                  : "right";
  const char* v = position.v == VAnchor::Top      ? "top"
                  : position.v == VAnchor::Center ? "center"
                                                  : "bottom";
  return std::string(h) + "-" + v;
}

PastePosition parse_position(const std::string& text) {
  auto dash = text.find('-');
  if (dash == std::string::npos)
    throw std::invalid_argument("parse_position: expected <h>-<v>: " + text);
  std::string h = text.substr(0, dash), v = text.substr(dash + 1);
  PastePosition p;
  if (h == "left") p.h = HAnchor::Left;
  else if (h == "center") p.h = HAnchor::Center;
  else if (h == "right") p.h = HAnchor::Right;
  else throw std::invalid_argument("parse_position: bad horizontal anchor: " + h);
  if (v == "top") p.v = VAnchor::Top;
  else if (v == "center") p.v = VAnchor::Center;
  else if (v == "bottom") p.v = VAnchor::Bottom;
  else throw std::invalid_argument("parse_position: bad vertical anchor: " + v);
  return p;
}

std::vector<PastePosition> all_positions() {
  std::vector<PastePosition> out;
  for (HAnchor h : {HAnchor::Left, HAnchor::Center, HAnchor::Right})
    for (VAnchor v : {VAnchor::Top, VAnchor::Center, VAnchor::Bottom})
      out.push_back({h, v});
  return out;
}

PasteRegion paste_region(const CompositionParams& params, int bg_height,
                         int bg_width) {
  if (params.alpha <= 0.0 || params.alpha > 1.0)
    throw std::invalid_argument("paste_region: alpha must be in (0, 1]");
  PasteRegion r;
  r.height = static_cast<int>(std::floor(params.alpha * bg_height));
  r.width = static_cast<int>(std::floor(params.alpha * bg_width));
  if (r.height < 1 || r.width < 1)
    throw std::invalid_argument("paste_region: scaled size below one pixel");
  auto offset = [](int big, int small, int anchor) {
    // anchor: 0 -> leading edge, 1 -> centered, 2 -> trailing edge
    if (anchor == 0) return 0;
    if (anchor == 1) return (big - small) / 2;
    return big - small;
  };
  r.x0 = offset(bg_width, r.width, static_cast<int>(params.position.h));
  r.y0 = offset(bg_height, r.height, static_cast<int>(params.position.v));
  return r;
}

ImageGrid downscale_bilinear(const ImageGrid& image, int out_height,
                             int out_width) {
  if (out_height > image.height() || out_width > image.width())
    throw std::invalid_argument("downscale_bilinear: output exceeds input");
  ImageGrid out(out_height, out_width);
  double ry = static_cast<double>(image.height()) / out_height;
  double rx = static_cast<double>(image.width()) / out_width;
  for (int y = 0; y < out_height; ++y) {
    double sy = (y + 0.5) * ry - 0.5;
    int y0 = static_cast<int>(std::floor(sy));
    double fy = sy - y0;
    for (int x = 0; x < out_width; ++x) {
      double sx = (x + 0.5) * rx - 0.5;
      int x0 = static_cast<int>(std::floor(sx));
      double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int ty = 0; ty < 2; ++ty) {
          int yy = std::clamp(y0 + ty, 0, image.height() - 1);
          double wy = ty ? fy : 1.0 - fy;
          for (int tx = 0; tx < 2; ++tx) {
            int xx = std::clamp(x0 + tx, 0, image.width() - 1);
            double wx = tx ? fx : 1.0 - fx;
            acc += wy * wx * image.at(yy, xx, c);
          }
        }
        out.at(y, x, c) = acc;
      }
    }
  }
  return out;
}

ImageGrid downscale_bilinear_vjp(const ImageGrid& cotangent, int in_height,
                                 int in_width) {
  ImageGrid out(in_height, in_width);
  double ry = static_cast<double>(in_height) / cotangent.height();
  double rx = static_cast<double>(in_width) / cotangent.width();
  for (int y = 0; y < cotangent.height(); ++y) {
    double sy = (y + 0.5) * ry - 0.5;
    int y0 = static_cast<int>(std::floor(sy));
    double fy = sy - y0;
    for (int x = 0; x < cotangent.width(); ++x) {
      double sx = (x + 0.5) * rx - 0.5;
      int x0 = static_cast<int>(std::floor(sx));
      double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        double g = cotangent.at(y, x, c);
        for (int ty = 0; ty < 2; ++ty) {
          int yy = std::clamp(y0 + ty, 0, in_height - 1);
          double wy = ty ? fy : 1.0 - fy;
          for (int tx = 0; tx < 2; ++tx) {
            int xx = std::clamp(x0 + tx, 0, in_width - 1);
            double wx = tx ? fx : 1.0 - fx;
            out.at(yy, xx, c) += wy * wx * g;
          }
        }
      }
    }
  }
  return out;
}

ImageGrid fuse(const ImageGrid& fg, const ImageGrid& bg,
               const CompositionParams& params) {
  PasteRegion r = paste_region(params, bg.height(), bg.width());
  ImageGrid scaled;
  if (fg.height() == r.height && fg.width() == r.width) {
    scaled = fg;  // already at paste size
  } else if (fg.same_shape(bg)) {
    scaled = downscale_bilinear(fg, r.height, r.width);
  } else {
    throw std::invalid_argument("fuse: foreground must match bg or paste size");
  }
  ImageGrid out = bg;
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(r.y0 + y, r.x0 + x, c) = scaled.at(y, x, c);
  return out;
}

ImageGrid crop(const ImageGrid& bg, const CompositionParams& params) {
  PasteRegion r = paste_region(params, bg.height(), bg.width());
  ImageGrid out(r.height, r.width);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(y, x, c) = bg.at(r.y0 + y, r.x0 + x, c);
  return out;
}

FuseVjp fuse_vjp(const CompositionParams& params, int fg_height, int fg_width,
                 const ImageGrid& cotangent) {
  PasteRegion r = paste_region(params, cotangent.height(), cotangent.width());
  FuseVjp out;
  out.bg_cotangent = cotangent;
  ImageGrid region_cot(r.height, r.width);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      for (int c = 0; c < 3; ++c) {
        region_cot.at(y, x, c) = cotangent.at(r.y0 + y, r.x0 + x, c);
        out.bg_cotangent.at(r.y0 + y, r.x0 + x, c) = 0.0;
      }
  if (fg_height == r.height && fg_width == r.width)
    out.fg_cotangent = std::move(region_cot);
  else
    out.fg_cotangent = downscale_bilinear_vjp(region_cot, fg_height, fg_width);
  return out;
}

}  // namespace latentforge
