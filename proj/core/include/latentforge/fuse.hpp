#pragma once

#include <string>

#include "latentforge/image.hpp"

namespace latentforge {

enum class HAnchor { Left, Center, Right };
enum class VAnchor { Top, Center, Bottom };

struct PastePosition {
  HAnchor h = HAnchor::Center;
  VAnchor v = VAnchor::Center;
};

std::string to_string(const PastePosition& position);          // "left-top"
PastePosition parse_position(const std::string& text);

/// The nine anchor positions in fixed enumeration order
/// (left/center/right x top/center/bottom).
std::vector<PastePosition> all_positions();

/// Scale factor and paste anchor of the fuse operator.
struct CompositionParams {
  double alpha = 0.5;  // in (0, 1]
  PastePosition position;
};

struct PasteRegion {
  int y0 = 0, x0 = 0;
  int height = 0, width = 0;
};

/// Region covered by the scaled foreground: side lengths floor(alpha * dim),
/// axis offsets 0, floor((D - d) / 2) or D - d per anchor.
PasteRegion paste_region(const CompositionParams& params, int bg_height,
                         int bg_width);

/// Bilinear downscale to out_height x out_width (requires out <= in).
ImageGrid downscale_bilinear(const ImageGrid& image, int out_height,
                             int out_width);

/// Adjoint of downscale_bilinear for an in_height x in_width input.
ImageGrid downscale_bilinear_vjp(const ImageGrid& cotangent, int in_height,
                                 int in_width);

/// Scale-and-paste: downscales fg by alpha and overwrites the paste region of
/// bg. A foreground already at the scaled size is pasted as-is, so
/// fuse(crop(I, p), I, p) == I.
ImageGrid fuse(const ImageGrid& fg, const ImageGrid& bg,
               const CompositionParams& params);

/// Exactly the paste region of bg.
ImageGrid crop(const ImageGrid& bg, const CompositionParams& params);

struct FuseVjp {
  ImageGrid fg_cotangent;
  ImageGrid bg_cotangent;
};

/// Adjoint of fuse for a full-size foreground.
FuseVjp fuse_vjp(const CompositionParams& params, int fg_height, int fg_width,
                 const ImageGrid& cotangent);

}  // namespace latentforge
