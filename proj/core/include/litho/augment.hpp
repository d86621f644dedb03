#pragma once

#include <cstdint>

#include "litho/image.hpp"

namespace litho {

/// One concrete draw of the training-time augmentation.
struct AugmentParams {
  bool hflip = false;
  bool vflip = false;
  double rotation_deg = 0.0;  ///< [-45, 45]
  double zoom = 1.0;          ///< zoom-in factor, [1, 1.3]
  double brightness = 1.0;    ///< multiplicative, [0.2, 1]
  double shift_x = 0.0;       ///< fraction of width, [-0.2, 0.2]
  double shift_y = 0.0;       ///< fraction of height, [-0.2, 0.2]
};

/// Sampling ranges; each bound must lie within the AugmentParams limits.
struct AugmentRecipe {
  double flip_probability = 0.5;
  double max_rotation_deg = 45.0;
  double max_zoom_extra = 0.3;
  double min_brightness = 0.2;
  double max_shift = 0.2;
};

/// Throws ParamOutOfRange for values outside the documented ranges.
void validate(const AugmentParams& p);
void validate(const AugmentRecipe& r);

AugmentParams sample_augment(const AugmentRecipe& recipe, std::uint64_t seed);

/// Applies flips, rotation (bilinear, zero-filled border), zoom, brightness
/// and shift, in that order.
RgbImage augment(const RgbImage& img, const AugmentParams& params);

FrameGrid augment(const FrameGrid& frame, const AugmentRecipe& recipe,
                  std::uint64_t seed);

}  // namespace litho
