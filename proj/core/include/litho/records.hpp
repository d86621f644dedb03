#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "litho/morph_class.hpp"

namespace litho {

enum class QcStatus : std::uint8_t {
  Pass,
  RejectedCoverage,
  RejectedInstability,
  RejectedNoReference,
  /// The gate was not run at all (the no-QC ablation).
  Bypassed,
};

std::string_view to_string(QcStatus s) noexcept;
std::optional<QcStatus> parse_qc_status(std::string_view s) noexcept;

/// Outcome of the frame-level quality gate. `dsc` is present exactly when the
/// stability test was evaluated (Pass and RejectedInstability).
class QcVerdict {
 public:
  static QcVerdict pass(double dsc);
  static QcVerdict rejected_instability(double dsc);
  static QcVerdict rejected_coverage() { return QcVerdict(QcStatus::RejectedCoverage, {}); }
  static QcVerdict rejected_no_reference() {
    return QcVerdict(QcStatus::RejectedNoReference, {});
  }
  static QcVerdict bypassed() { return QcVerdict(QcStatus::Bypassed, {}); }

  QcStatus status() const noexcept { return status_; }
  std::optional<double> dsc() const noexcept { return dsc_; }
  /// True when the frame proceeds to classification.
  bool admits() const noexcept {
    return status_ == QcStatus::Pass || status_ == QcStatus::Bypassed;
  }

  friend bool operator==(const QcVerdict&, const QcVerdict&) = default;

 private:
  QcVerdict(QcStatus s, std::optional<double> dsc) : status_(s), dsc_(dsc) {}

  QcStatus status_;
  std::optional<double> dsc_;
};

/// Per-frame result. Scores and label are present iff the verdict admits the
/// frame; the label is always the canonical argmax of the scores.
class PredictionRecord {
 public:
  /// Tolerance on the score sum.
  static constexpr double kSumTolerance = 1e-9;

  static PredictionRecord rejected(std::int64_t stream_index, QcVerdict qc);
  /// Throws ScoreSumViolation / ParamOutOfRange for invalid score maps and
  /// InvalidArgument when the verdict does not admit the frame.
  static PredictionRecord classified(std::int64_t stream_index, QcVerdict qc,
                                     const ScoreMap& scores);

  std::int64_t stream_index() const noexcept { return stream_index_; }
  const QcVerdict& qc() const noexcept { return qc_; }
  const std::optional<ScoreMap>& scores() const noexcept { return scores_; }
  std::optional<MorphClass> label() const noexcept { return label_; }

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;

 private:
  PredictionRecord(std::int64_t idx, QcVerdict qc) : stream_index_(idx), qc_(qc) {}

  std::int64_t stream_index_;
  QcVerdict qc_;
  std::optional<ScoreMap> scores_;
  std::optional<MorphClass> label_;
};

enum class DecisionPath : std::uint8_t { Majority, MixedUnion, Fallback };

std::string_view to_string(DecisionPath p) noexcept;
std::optional<DecisionPath> parse_decision_path(std::string_view s) noexcept;

struct Decision {
  MorphClass label;
  DecisionPath path;

  friend bool operator==(const Decision&, const Decision&) = default;
};

/// Ordered per-frame records of one video plus the final decision.
class VideoTimeline {
 public:
  /// Validates that stream indices are consecutive and that a decision is
  /// present iff at least one record carries a label.
  VideoTimeline(std::string video_id, std::vector<PredictionRecord> records,
                std::optional<Decision> decision);

  const std::string& video_id() const noexcept { return video_id_; }
  const std::vector<PredictionRecord>& records() const noexcept { return records_; }
  const std::optional<Decision>& decision() const noexcept { return decision_; }

  /// Labels of admitted frames in stream order.
  std::vector<MorphClass> labels() const;
  std::size_t admitted_count() const noexcept;
  std::size_t pass_count() const noexcept;

  friend bool operator==(const VideoTimeline&, const VideoTimeline&) = default;

 private:
  std::string video_id_;
  std::vector<PredictionRecord> records_;
  std::optional<Decision> decision_;
};

}  // namespace litho
