#pragma once

#include <vector>

#include "litho/image.hpp"

namespace litho {

// Reference numerics of the segmentation training objective. Gradients are
// taken with respect to the soft prediction p.

inline constexpr double kBceEpsilon = 1e-7;
inline constexpr double kDiceSmoothing = 1.0;

/// Mean over pixels of -[t ln p + (1-t) ln(1-p)], p clamped to [eps, 1-eps].
double bce_loss(const SoftMask& p, const StoneMask& t);
std::vector<double> bce_loss_grad(const SoftMask& p, const StoneMask& t);

/// 1 - (2 sum(p t) + s) / (sum(p) + sum(t) + s).
double dice_loss(const SoftMask& p, const StoneMask& t,
                 double smoothing = kDiceSmoothing);
std::vector<double> dice_loss_grad(const SoftMask& p, const StoneMask& t,
                                   double smoothing = kDiceSmoothing);

/// Unweighted sum of the two terms.
double combined_loss(const SoftMask& p, const StoneMask& t);

}  // namespace litho
