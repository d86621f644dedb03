#include "litho/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "litho/error.hpp"
#include "litho/rng.hpp"

namespace litho {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ParamOutOfRange, what);
}

// Bilinear sample with zero fill outside the raster.
Rgb sample(const RgbImage& img, double sx, double sy) {
  const int w = img.width();
  const int h = img.height();
  if (sx < 0.0 || sy < 0.0 || sx > w - 1 || sy > h - 1) return {0, 0, 0};
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  const Rgb a = img.at(x0, y0), b = img.at(x1, y0), c = img.at(x0, y1),
            d = img.at(x1, y1);
  Rgb out{};
  for (int ch = 0; ch < 3; ++ch) {
    const double top = a[ch] + (b[ch] - a[ch]) * fx;
    const double bottom = c[ch] + (d[ch] - c[ch]) * fx;
    out[ch] = static_cast<std::uint8_t>(
        std::clamp(std::lround(top + (bottom - top) * fy), 0L, 255L));
  }
  return out;
}

// Inverse-mapped warp: dst pixel p samples src at center + A (p - center).
RgbImage warp(const RgbImage& img, double a00, double a01, double a10, double a11) {
  RgbImage out(img.width(), img.height());
  const double cx = (img.width() - 1) / 2.0;
  const double cy = (img.height() - 1) / 2.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      out.set(x, y, sample(img, cx + a00 * dx + a01 * dy, cy + a10 * dx + a11 * dy));
    }
  }
  return out;
}

}  // namespace

void validate(const AugmentParams& p) {
  require(p.rotation_deg >= -45.0 && p.rotation_deg <= 45.0, "rotation outside [-45,45]");
  require(p.zoom >= 1.0 && p.zoom <= 1.3, "zoom outside [1,1.3]");
  require(p.brightness >= 0.2 && p.brightness <= 1.0, "brightness outside [0.2,1]");
  require(p.shift_x >= -0.2 && p.shift_x <= 0.2, "shift_x outside [-0.2,0.2]");
  require(p.shift_y >= -0.2 && p.shift_y <= 0.2, "shift_y outside [-0.2,0.2]");
}

void validate(const AugmentRecipe& r) {
  require(r.flip_probability >= 0.0 && r.flip_probability <= 1.0,
          "flip probability outside [0,1]");
  require(r.max_rotation_deg >= 0.0 && r.max_rotation_deg <= 45.0,
          "max rotation outside [0,45]");
  require(r.max_zoom_extra >= 0.0 && r.max_zoom_extra <= 0.3,
          "max zoom outside [0,0.3]");
  require(r.min_brightness >= 0.2 && r.min_brightness <= 1.0,
          "min brightness outside [0.2,1]");
  require(r.max_shift >= 0.0 && r.max_shift <= 0.2, "max shift outside [0,0.2]");
}

AugmentParams sample_augment(const AugmentRecipe& recipe, std::uint64_t seed) {
  validate(recipe);
  const CounterRng rng(seed, 0, 0xa06);
  AugmentParams p;
  p.hflip = rng.bernoulli(0, recipe.flip_probability);
  p.vflip = rng.bernoulli(1, recipe.flip_probability);
  p.rotation_deg = rng.uniform(2, -recipe.max_rotation_deg, recipe.max_rotation_deg);
  p.zoom = 1.0 + rng.uniform(3, 0.0, recipe.max_zoom_extra);
  p.brightness = rng.uniform(4, recipe.min_brightness, 1.0);
  p.shift_x = rng.uniform(5, -recipe.max_shift, recipe.max_shift);
  p.shift_y = rng.uniform(6, -recipe.max_shift, recipe.max_shift);
  return p;
}

RgbImage augment(const RgbImage& img, const AugmentParams& params) {
  validate(params);
  const int w = img.width();
  const int h = img.height();
  RgbImage cur = img;

  if (params.hflip || params.vflip) {
    RgbImage flipped(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        flipped.set(x, y, cur.at(params.hflip ? w - 1 - x : x,
                                 params.vflip ? h - 1 - y : y));
      }
    }
    cur = std::move(flipped);
  }
  if (params.rotation_deg != 0.0) {
    const double t = params.rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(t), s = std::sin(t);
    cur = warp(cur, c, s, -s, c);
  }
  if (params.zoom != 1.0) {
    const double inv = 1.0 / params.zoom;
    cur = warp(cur, inv, 0.0, 0.0, inv);
  }
  if (params.brightness != 1.0) {
    for (auto& b : cur.bytes()) {
      b = static_cast<std::uint8_t>(
          std::clamp(std::lround(b * params.brightness), 0L, 255L));
    }
  }
  const int dx = static_cast<int>(std::lround(params.shift_x * w));
  const int dy = static_cast<int>(std::lround(params.shift_y * h));
  if (dx != 0 || dy != 0) {
    RgbImage shifted(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int sx = x - dx, sy = y - dy;
        if (sx >= 0 && sy >= 0 && sx < w && sy < h) shifted.set(x, y, cur.at(sx, sy));
      }
    }
    cur = std::move(shifted);
  }
  return cur;
}

FrameGrid augment(const FrameGrid& frame, const AugmentRecipe& recipe,
                  std::uint64_t seed) {
  return FrameGrid{augment(frame.image, sample_augment(recipe, seed)),
                   frame.stream_index, frame.timestamp};
}

}  // namespace litho
