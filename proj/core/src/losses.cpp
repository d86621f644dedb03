#include "litho/losses.hpp"

#include <algorithm>
#include <cmath>

#include "litho/error.hpp"

namespace litho {
namespace {

void check_shapes(const SoftMask& p, const StoneMask& t) {
  if (p.width() != t.width() || p.height() != t.height()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction/target shape mismatch");
  }
}

struct DiceSums {
  double pt = 0.0;
  double p = 0.0;
  double t = 0.0;
};

DiceSums dice_sums(const SoftMask& p, const StoneMask& t) {
  DiceSums s;
  const auto bits = t.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    s.pt += p[i] * bits[i];
    s.p += p[i];
    s.t += bits[i];
  }
  return s;
}

}  // namespace

double bce_loss(const SoftMask& p, const StoneMask& t) {
  check_shapes(p, t);
  const auto bits = t.bits();
  if (bits.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const double q = std::clamp(p[i], kBceEpsilon, 1.0 - kBceEpsilon);
    sum -= bits[i] ? std::log(q) : std::log(1.0 - q);
  }
  return sum / static_cast<double>(bits.size());
}

std::vector<double> bce_loss_grad(const SoftMask& p, const StoneMask& t) {
  check_shapes(p, t);
  const auto bits = t.bits();
  std::vector<double> g(bits.size(), 0.0);
  const double n = static_cast<double>(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const double q = p[i];
    if (q <= kBceEpsilon || q >= 1.0 - kBceEpsilon) continue;  // clamped: flat
    g[i] = (bits[i] ? -1.0 / q : 1.0 / (1.0 - q)) / n;
  }
  return g;
}

double dice_loss(const SoftMask& p, const StoneMask& t, double smoothing) {
  check_shapes(p, t);
  const auto s = dice_sums(p, t);
  return 1.0 - (2.0 * s.pt + smoothing) / (s.p + s.t + smoothing);
}

std::vector<double> dice_loss_grad(const SoftMask& p, const StoneMask& t,
                                   double smoothing) {
  check_shapes(p, t);
  const auto s = dice_sums(p, t);
  const double num = 2.0 * s.pt + smoothing;
  const double den = s.p + s.t + smoothing;
  const auto bits = t.bits();
  std::vector<double> g(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    g[i] = -(2.0 * bits[i] * den - num) / (den * den);
  }
  return g;
}

double combined_loss(const SoftMask& p, const StoneMask& t) {
  return bce_loss(p, t) + dice_loss(p, t);
}

}  // namespace litho
