#include "litho/overlay.hpp"

#include <array>
#include <algorithm>
#include <cctype>
#include <cstdio>
#include <string>

#include "litho/error.hpp"

namespace litho {

namespace {

// Rows top to bottom, 3 bits each, MSB = left column.
using Glyph = std::array<std::uint8_t, 5>;

Glyph glyph(char ch) {
  switch (ch) {
    case '0': return {7, 5, 5, 5, 7};
    case '1': return {2, 6, 2, 2, 7};
    case '2': return {7, 1, 7, 4, 7};
    case '3': return {7, 1, 3, 1, 7};
    case '4': return {5, 5, 7, 1, 1};
    case '5': return {7, 4, 7, 1, 7};
    case '6': return {7, 4, 7, 5, 7};
    case '7': return {7, 1, 1, 2, 2};
    case '8': return {7, 5, 7, 5, 7};
    case '9': return {7, 5, 7, 1, 7};
    case 'A': return {2, 5, 7, 5, 5};
    case 'B': return {6, 5, 6, 5, 6};
    case 'C': return {3, 4, 4, 4, 3};
    case 'D': return {6, 5, 5, 5, 6};
    case 'E': return {7, 4, 6, 4, 7};
    case 'F': return {7, 4, 6, 4, 4};
    case 'G': return {3, 4, 5, 5, 3};
    case 'H': return {5, 5, 7, 5, 5};
    case 'I': return {7, 2, 2, 2, 7};
    case 'J': return {1, 1, 1, 5, 2};
    case 'K': return {5, 5, 6, 5, 5};
    case 'L': return {4, 4, 4, 4, 7};
    case 'M': return {5, 7, 7, 5, 5};
    case 'N': return {6, 5, 5, 5, 5};
    case 'O': return {2, 5, 5, 5, 2};
    case 'P': return {6, 5, 6, 4, 4};
    case 'Q': return {2, 5, 5, 6, 3};
    case 'R': return {6, 5, 6, 5, 5};
    case 'S': return {3, 4, 2, 1, 6};
    case 'T': return {7, 2, 2, 2, 2};
    case 'U': return {5, 5, 5, 5, 7};
    case 'V': return {5, 5, 5, 5, 2};
    case 'W': return {5, 5, 7, 7, 5};
    case 'X': return {5, 5, 2, 5, 5};
    case 'Y': return {5, 5, 2, 2, 2};
    case 'Z': return {7, 1, 2, 4, 7};
    case 'a': return {0, 6, 3, 5, 7};
    case 'b': return {4, 4, 6, 5, 6};
    case '+': return {0, 2, 7, 2, 0};
    case '-': return {0, 0, 7, 0, 0};
    case ':': return {0, 2, 0, 2, 0};
    case '.': return {0, 0, 0, 0, 2};
    case '=': return {0, 7, 0, 7, 0};
    default: return {0, 0, 0, 0, 0};
  }
}

void fill(RgbImage& img, int x0, int y0, int w, int h, Rgb c) {
  for (int y = std::max(0, y0); y < std::min(img.height(), y0 + h); ++y) {
    for (int x = std::max(0, x0); x < std::min(img.width(), x0 + w); ++x) img.set(x, y, c);
  }
}

}  // namespace

void draw_text(RgbImage& img, int x, int y, std::string_view text, Rgb color, int scale) {
  const int advance = 4 * scale;
  fill(img, x - scale, y - scale, static_cast<int>(text.size()) * advance + scale,
       7 * scale, {0, 0, 0});
  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (ch != 'a' && ch != 'b') ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    const Glyph g = glyph(ch);
    const int gx = x + static_cast<int>(i) * advance;
    for (int row = 0; row < 5; ++row) {
      for (int col = 0; col < 3; ++col) {
        if ((g[row] >> (2 - col)) & 1) fill(img, gx + col * scale, y + row * scale, scale, scale, color);
      }
    }
  }
}

StoneMask mask_outline(const StoneMask& mask) {
  StoneMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      const bool edge = x == 0 || y == 0 || x == mask.width() - 1 || y == mask.height() - 1 ||
                        !mask.at(x - 1, y) || !mask.at(x + 1, y) || !mask.at(x, y - 1) ||
                        !mask.at(x, y + 1);
      if (edge) out.set(x, y, true);
    }
  }
  return out;
}

RgbImage render_overlay(const RgbImage& frame, const StoneMask& mask,
                        const PredictionRecord& record) {
  if (frame.width() != mask.width() || frame.height() != mask.height()) {
    throw Error(ErrorCode::DimensionMismatch, "overlay mask does not match the frame");
  }
  RgbImage out = frame;
  const bool admitted = record.qc().admits();
  const Rgb line = admitted ? Rgb{0, 255, 0} : Rgb{255, 40, 40};
  const StoneMask edge = mask_outline(mask);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (edge.at(x, y)) out.set(x, y, line);
    }
  }
  std::string caption = std::to_string(record.stream_index()) + " ";
  if (record.label()) {
    caption += std::string(to_string(*record.label()));
  } else {
    switch (record.qc().status()) {
      case QcStatus::RejectedCoverage: caption += "REJ COV"; break;
      case QcStatus::RejectedInstability: caption += "REJ DSC"; break;
      case QcStatus::RejectedNoReference: caption += "REJ REF"; break;
      default: caption += "-"; break;
    }
  }
  draw_text(out, 4, 4, caption, admitted ? Rgb{255, 255, 255} : Rgb{255, 160, 160});
  return out;
}

}  // namespace litho
