#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "litho/pipeline.hpp"

namespace litho {

/// One-vs-rest counts of a single class over videos.
struct BinaryTally {
  std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;
  std::uint64_t total() const noexcept { return tp + fn + fp + tn; }
  friend bool operator==(const BinaryTally&, const BinaryTally&) = default;
};

/// Truth label vs final decision, one-vs-rest per class. A video without a
/// decision is a false negative for its truth class and negative elsewhere.
class ConfusionTally {
 public:
  void add(MorphClass truth, std::optional<MorphClass> decided) noexcept;
  void merge(const ConfusionTally& other) noexcept;
  const BinaryTally& tally(MorphClass c) const noexcept { return per_class_[index_of(c)]; }
  std::uint64_t videos() const noexcept { return videos_; }

  friend bool operator==(const ConfusionTally&, const ConfusionTally&) = default;

 private:
  std::array<BinaryTally, kNumClasses> per_class_{};
  std::uint64_t videos_ = 0;
};

struct ClassMetrics {
  double sensitivity = 0, specificity = 0, precision = 0, balanced_accuracy = 0, f1 = 0;
};

/// Throws NoPositives when the class has no truth-positive video. Precision
/// is 0 without predicted positives; specificity is 0 without negatives.
ClassMetrics class_metrics(const ConfusionTally& t, MorphClass c);

/// Balanced accuracy and F1 from the three primary rates.
ClassMetrics metrics_from_rates(double sensitivity, double specificity, double precision);

struct MeanStd {
  double mean = 0;
  double std = 0;
};

/// Mean and sample standard deviation (divisor n - 1; 0 for n = 1).
/// Throws EmptyList on empty input.
MeanStd mean_sample_std(std::span<const double> values);

/// Half-up rounding, as used for integer-percent presentation.
long long round_half_up(double x);

struct OverallScores {
  MeanStd sensitivity, specificity, precision, balanced_accuracy, f1;
};

OverallScores overall_scores(const std::array<ClassMetrics, kNumClasses>& per_class);

/// Timeline paired with the truth label of its video.
struct LabeledTimeline {
  const VideoTimeline* timeline;
  MorphClass truth;
};

/// Per truth class: mean and std over videos of the fraction of admitted
/// frames predicted as each class. Videos without admitted frames carry no
/// fractions and are skipped. Throws EmptyGroup when no group has data.
using FramewiseTable = std::map<MorphClass, std::array<MeanStd, kNumClasses>>;
FramewiseTable framewise_analysis(std::span<const LabeledTimeline> timelines);

/// Label fractions of one timeline over its admitted frames; all zero when
/// nothing was admitted.
std::array<double, kNumClasses> label_fractions(const VideoTimeline& t);

/// Per-video fraction of Pass verdicts, then mean and sample std.
MeanStd qc_pass_stats(std::span<const VideoTimeline> timelines);
double pass_fraction(const VideoTimeline& t);

struct Evaluation {
  ConfusionTally tally;
  std::array<ClassMetrics, kNumClasses> per_class{};
  OverallScores overall;
};

/// Throws MissingTruth when a timeline has no truth entry and NoPositives
/// when a class is absent from the cohort.
Evaluation evaluate(std::span<const VideoTimeline> timelines,
                    const std::map<std::string, MorphClass>& truth);

using VideoSource = std::function<NormalizedVideo(std::size_t index)>;
using SegmenterFactory = std::function<std::unique_ptr<Segmenter>(const NormalizedVideo&)>;

struct AblationRun {
  Variant variant;
  std::vector<VideoTimeline> timelines;
};

/// Runs every requested variant on the same videos, each video loaded once.
/// Videos are processed on up to `workers` threads; output order follows the
/// video index.
std::vector<AblationRun> run_ablation(std::size_t n_videos, const VideoSource& source,
                                      const SegmenterFactory& segmenter,
                                      const Classifier& classifier,
                                      std::span<const Variant> variants,
                                      const QcConfig& qc = {},
                                      std::size_t workers = worker_count());

std::string timeline_to_json(const VideoTimeline& t, Variant variant);
VideoTimeline timeline_from_json(std::string_view text, Variant* variant = nullptr);
void save_timeline(const VideoTimeline& t, Variant variant, const std::filesystem::path& path);
VideoTimeline load_timeline(const std::filesystem::path& path, Variant* variant = nullptr);

struct VariantReport {
  Variant variant;
  Evaluation evaluation;
  MeanStd qc_pass;
};

/// One row per class per variant plus mean and std rows.
std::string report_csv(std::span<const VariantReport> reports);
/// Integer-percent summary in the layout of a metrics table.
std::string report_text(std::span<const VariantReport> reports,
                        const FramewiseTable* framewise = nullptr);

}  // namespace litho
