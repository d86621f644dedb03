#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "litho/image.hpp"
#include "litho/morph_class.hpp"

namespace litho {

/// Per-frame morphology scores on a stone-masked frame.
class Classifier {
 public:
  virtual ~Classifier() = default;
  /// Scores over the five classes, summing to one.
  virtual ScoreMap predict(const FrameGrid& frame, const StoneMask& mask) const = 0;
};

/// Pixels where the mask is 0 become black; the rest are unchanged.
RgbImage apply_mask(const RgbImage& image, const StoneMask& mask);
FrameGrid apply_mask(const FrameGrid& frame, const StoneMask& mask);

inline constexpr std::size_t kColorBins = 8 * 8 * 8;
inline constexpr std::size_t kGradientBins = 16;
inline constexpr std::size_t kFeatureSize = kColorBins + kGradientBins;
/// Width of one gradient-magnitude bin, in gray levels per pixel.
inline constexpr double kGradientBinWidth = 4.0;

using FeatureVector = std::array<double, kFeatureSize>;

/// RGB histogram (8x8x8) and gradient-magnitude histogram (16 bins), both
/// over mask-1 pixels of the masked frame. Each part is L1-normalized and
/// weighted one half, so the whole vector sums to one. Throws EmptyMask.
FeatureVector stone_features(const RgbImage& image, const StoneMask& mask);

double l1_distance(const FeatureVector& a, const FeatureVector& b) noexcept;

/// Softmin over distances: exp(-beta d_c) / sum exp(-beta d_c').
ScoreMap softmin(const std::array<double, kNumClasses>& distances, double beta);

struct TrainingSample {
  const RgbImage* image;
  const StoneMask* mask;
  MorphClass label;
};

inline constexpr double kDefaultBeta = 50.0;

/// Nearest-centroid reference classifier over stone_features.
class CentroidModel final : public Classifier {
 public:
  CentroidModel() = default;
  CentroidModel(std::array<FeatureVector, kNumClasses> centroids, double beta);

  bool trained() const noexcept { return trained_; }
  double beta() const noexcept { return beta_; }
  const FeatureVector& centroid(MorphClass c) const { return centroids_[index_of(c)]; }

  /// Throws NotTrained or EmptyMask.
  ScoreMap predict(const FrameGrid& frame, const StoneMask& mask) const override;
  ScoreMap predict_image(const RgbImage& image, const StoneMask& mask) const;
  std::array<double, kNumClasses> distances(const FeatureVector& f) const;

  CentroidModel with_beta(double beta) const { return CentroidModel(centroids_, beta); }

  friend bool operator==(const CentroidModel& a, const CentroidModel& b) {
    return a.trained_ == b.trained_ && a.beta_ == b.beta_ && a.centroids_ == b.centroids_;
  }

 private:
  std::array<FeatureVector, kNumClasses> centroids_{};
  double beta_ = kDefaultBeta;
  bool trained_ = false;
};

/// Centroid of each class = mean feature vector of its samples. Throws
/// MissingClass or EmptyMaskSample.
CentroidModel train_centroid(std::span<const TrainingSample> samples,
                             double beta = kDefaultBeta);

void save_model(const CentroidModel& model, const std::filesystem::path& path);
CentroidModel load_model(const std::filesystem::path& path);

/// Score table keyed by stream index.
using ScoreTable = std::map<std::int64_t, ScoreMap>;

/// Tolerance on the per-row score sum of imported tables.
inline constexpr double kImportSumTolerance = 1e-6;

/// CSV with header `frame,Ia,IIb,IIIb,IaIIb,IaIIIb`. Header columns may come
/// in any order. Throws MalformedRow, ScoreSumViolation or UnknownClass.
ScoreTable parse_scores(std::istream& in);
ScoreTable import_scores(const std::filesystem::path& path);
void write_scores(std::ostream& out, const ScoreTable& table);
void export_scores(const std::filesystem::path& path, const ScoreTable& table);

/// Serves externally computed scores by stream index.
class ImportedScoreClassifier final : public Classifier {
 public:
  explicit ImportedScoreClassifier(ScoreTable table) : table_(std::move(table)) {}
  /// Throws MalformedRow when the frame has no imported row.
  ScoreMap predict(const FrameGrid& frame, const StoneMask& mask) const override;

 private:
  ScoreTable table_;
};

}  // namespace litho
