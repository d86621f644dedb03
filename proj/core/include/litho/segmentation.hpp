#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "litho/image.hpp"

namespace litho {

/// Dice similarity 2|A n B| / (|A| + |B|); 1 when both masks are empty.
/// Throws DimensionMismatch.
double dsc(const StoneMask& a, const StoneMask& b);

/// Per-frame stone-region identification.
class Segmenter {
 public:
  virtual ~Segmenter() = default;
  /// Output has the dimensions of the input frame.
  virtual StoneMask segment(const FrameGrid& frame) const = 0;
};

/// Returns the stored ground-truth mask of a frame, looked up by stream index.
class OracleSegmenter final : public Segmenter {
 public:
  explicit OracleSegmenter(std::vector<StoneMask> truth);
  /// Throws NoTruthAvailable when the stream index has no stored mask.
  StoneMask segment(const FrameGrid& frame) const override;

 private:
  std::vector<StoneMask> truth_;
};

/// Reads externally produced masks (`mask_%06d.pgm`, indexed by stream
/// index) from a directory.
class ImportedMaskSegmenter final : public Segmenter {
 public:
  explicit ImportedMaskSegmenter(std::filesystem::path dir);
  StoneMask segment(const FrameGrid& frame) const override;

 private:
  std::filesystem::path dir_;
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Background colour model and decision threshold of the chroma segmenter.
struct ChromaCalibration {
  Vec3 background_mean{};
  Mat3 background_cov{};
  double tau = 0.0;
  int min_component_px = 64;
};

ChromaCalibration load_chroma_calibration(const std::filesystem::path& path);
void save_chroma_calibration(const ChromaCalibration& cal,
                             const std::filesystem::path& path);

struct LabeledStill {
  const RgbImage* image;
  const StoneMask* mask;
};

/// Fits the background mean/covariance on mask-0 pixels of the stills, then
/// picks tau from `tau_grid` maximizing the mean DSC against the masks
/// (smallest tau on ties).
ChromaCalibration calibrate_chroma(std::span<const LabeledStill> stills,
                                   std::span<const double> tau_grid,
                                   int min_component_px = 64);

/// Heuristic stand-in for a trained segmentation network: pixels whose
/// Mahalanobis distance to the background colour model exceeds tau, keeping
/// connected components of at least `min_component_px` and filling holes.
class ChromaSegmenter final : public Segmenter {
 public:
  ChromaSegmenter() = default;
  explicit ChromaSegmenter(const ChromaCalibration& cal);

  bool calibrated() const noexcept { return calibrated_; }
  const ChromaCalibration& calibration() const noexcept { return cal_; }

  /// Throws NotCalibrated on a default-constructed segmenter.
  StoneMask segment(const FrameGrid& frame) const override;
  StoneMask segment_image(const RgbImage& image) const;

 private:
  ChromaCalibration cal_;
  Mat3 inv_cov_{};
  bool calibrated_ = false;
};

/// Drops 4-connected components smaller than `min_px` pixels.
StoneMask remove_small_components(const StoneMask& mask, std::size_t min_px);

/// Sets every 0-pixel not 4-connected to the border to 1.
StoneMask fill_holes(const StoneMask& mask);

/// Number of 4-connected components of 1-pixels.
std::size_t count_components(const StoneMask& mask);

}  // namespace litho
