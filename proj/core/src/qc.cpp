#include "litho/qc.hpp"

#include "litho/error.hpp"
#include "litho/segmentation.hpp"

namespace litho {

void validate(const QcConfig& cfg) {
  if (!(cfg.min_coverage > 0.0 && cfg.min_coverage < 1.0)) {
    throw Error(ErrorCode::ParamOutOfRange, "min_coverage must lie in (0,1)");
  }
  if (!(cfg.min_dsc > 0.0 && cfg.min_dsc <= 1.0)) {
    throw Error(ErrorCode::ParamOutOfRange, "min_dsc must lie in (0,1]");
  }
}

QcVerdict check_frame(const StoneMask& current, const StoneMask* previous,
                      const QcConfig& cfg) {
  if (previous != nullptr && !current.same_shape(*previous)) {
    throw Error(ErrorCode::DimensionMismatch, "QC masks differ in shape");
  }
  if (!(current.coverage() > cfg.min_coverage)) return QcVerdict::rejected_coverage();
  if (previous == nullptr) return QcVerdict::rejected_no_reference();
  const double d = dsc(current, *previous);
  return d > cfg.min_dsc ? QcVerdict::pass(d) : QcVerdict::rejected_instability(d);
}

}  // namespace litho
