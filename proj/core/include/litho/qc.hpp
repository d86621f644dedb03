#pragma once

#include "litho/image.hpp"
#include "litho/records.hpp"

namespace litho {

/// Both thresholds are strict: a frame must exceed them.
struct QcConfig {
  double min_coverage = 0.10;
  double min_dsc = 0.90;
};

/// Throws ParamOutOfRange unless 0 < min_coverage < 1 and 0 < min_dsc <= 1.
void validate(const QcConfig& cfg);

/// Frame quality gate. Coverage is tested first, then the stability of the mask
/// against the immediately preceding frame's mask (whatever that frame's own
/// verdict was). The first frame of a video has no reference and is
/// rejected.
QcVerdict check_frame(const StoneMask& current, const StoneMask* previous,
                      const QcConfig& cfg = {});

}  // namespace litho
