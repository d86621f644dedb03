#pragma once

#include <string_view>

#include "litho/image.hpp"
#include "litho/records.hpp"

namespace litho {

/// Burns `text` into the image with a 3x5 bitmap font scaled by `scale`,
/// on a dark box. Unknown characters render as blanks.
void draw_text(RgbImage& img, int x, int y, std::string_view text, Rgb color, int scale = 2);

/// Mask pixels with a 4-neighbour outside the mask.
StoneMask mask_outline(const StoneMask& mask);

/// Frame with the mask outline (green when admitted, red otherwise) and a
/// caption with the stream index and the label or the QC verdict.
RgbImage render_overlay(const RgbImage& frame, const StoneMask& mask,
                        const PredictionRecord& record);

}  // namespace litho
