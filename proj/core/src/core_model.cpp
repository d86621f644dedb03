#include <algorithm>
#include <cmath>
#include <numeric>

#include "litho/error.hpp"
#include "litho/image.hpp"
#include "litho/morph_class.hpp"
#include "litho/records.hpp"

namespace litho {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyVideo: return "EmptyVideo";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::CorruptManifest: return "CorruptManifest";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingFrame: return "MissingFrame";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::NoTruthAvailable: return "NoTruthAvailable";
    case ErrorCode::NotCalibrated: return "NotCalibrated";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::EmptyMaskSample: return "EmptyMaskSample";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::NotTrained: return "NotTrained";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::ScoreSumViolation: return "ScoreSumViolation";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::MissingTruth: return "MissingTruth";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// MorphClass

std::string_view to_string(MorphClass c) noexcept {
  switch (c) {
    case MorphClass::Ia: return "Ia";
    case MorphClass::IIb: return "IIb";
    case MorphClass::IIIb: return "IIIb";
    case MorphClass::IaIIb: return "IaIIb";
    case MorphClass::IaIIIb: return "IaIIIb";
  }
  return "?";
}

std::optional<MorphClass> parse_morph_class(std::string_view tag) noexcept {
  if (tag == "Ia") return MorphClass::Ia;
  if (tag == "IIb") return MorphClass::IIb;
  if (tag == "IIIb") return MorphClass::IIIb;
  if (tag == "IaIIb" || tag == "Ia+IIb") return MorphClass::IaIIb;
  if (tag == "IaIIIb" || tag == "Ia+IIIb") return MorphClass::IaIIIb;
  return std::nullopt;
}

bool is_mixed(MorphClass c) noexcept {
  return c == MorphClass::IaIIb || c == MorphClass::IaIIIb;
}

std::vector<MorphClass> components(MorphClass c) {
  switch (c) {
    case MorphClass::IaIIb: return {MorphClass::Ia, MorphClass::IIb};
    case MorphClass::IaIIIb: return {MorphClass::Ia, MorphClass::IIIb};
    default: return {c};
  }
}

MorphClass core_component(MorphClass c) noexcept {
  switch (c) {
    case MorphClass::IaIIb: return MorphClass::IIb;
    case MorphClass::IaIIIb: return MorphClass::IIIb;
    default: return c;
  }
}

MorphClass argmax(const ScoreMap& scores) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumClasses; ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return kAllClasses[best];
}

// ---------------------------------------------------------------------------
// Rasters

RgbImage::RgbImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative image dimensions");
  }
  pixels_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill[0];
    pixels_[i + 1] = fill[1];
    pixels_[i + 2] = fill[2];
  }
}

StoneMask::StoneMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative mask dimensions");
  }
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t StoneMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

double StoneMask::coverage() const noexcept {
  if (bits_.empty()) return 0.0;
  return static_cast<double>(count()) / static_cast<double>(bits_.size());
}

SoftMask::SoftMask(int width, int height, double fill)
    : width_(width), height_(height) {
  if (!(fill >= 0.0 && fill <= 1.0)) {
    throw Error(ErrorCode::ParamOutOfRange, "soft mask value outside [0,1]");
  }
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

SoftMask::SoftMask(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::DimensionMismatch, "soft mask value count");
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::ParamOutOfRange, "soft mask value outside [0,1]");
    }
  }
}

SoftMask SoftMask::from_mask(const StoneMask& mask) {
  std::vector<double> v(mask.bits().begin(), mask.bits().end());
  return SoftMask(mask.width(), mask.height(), std::move(v));
}

void SoftMask::set(std::size_t i, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::ParamOutOfRange, "soft mask value outside [0,1]");
  }
  values_.at(i) = v;
}

// ---------------------------------------------------------------------------
// Records

std::string_view to_string(QcStatus s) noexcept {
  switch (s) {
    case QcStatus::Pass: return "Pass";
    case QcStatus::RejectedCoverage: return "RejectedCoverage";
    case QcStatus::RejectedInstability: return "RejectedInstability";
    case QcStatus::RejectedNoReference: return "RejectedNoReference";
    case QcStatus::Bypassed: return "Bypassed";
  }
  return "?";
}

std::optional<QcStatus> parse_qc_status(std::string_view s) noexcept {
  for (auto st : {QcStatus::Pass, QcStatus::RejectedCoverage,
                  QcStatus::RejectedInstability, QcStatus::RejectedNoReference,
                  QcStatus::Bypassed}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

namespace {
void check_dsc(double dsc) {
  if (!(dsc >= 0.0 && dsc <= 1.0)) {
    throw Error(ErrorCode::ParamOutOfRange, "dsc outside [0,1]");
  }
}
}  // namespace

QcVerdict QcVerdict::pass(double dsc) {
  check_dsc(dsc);
  return QcVerdict(QcStatus::Pass, dsc);
}

QcVerdict QcVerdict::rejected_instability(double dsc) {
  check_dsc(dsc);
  return QcVerdict(QcStatus::RejectedInstability, dsc);
}

PredictionRecord PredictionRecord::rejected(std::int64_t stream_index,
                                            QcVerdict qc) {
  if (qc.admits()) {
    throw Error(ErrorCode::InvalidArgument,
                "an admitted frame must carry scores");
  }
  return PredictionRecord(stream_index, qc);
}

PredictionRecord PredictionRecord::classified(std::int64_t stream_index,
                                              QcVerdict qc,
                                              const ScoreMap& scores) {
  if (!qc.admits()) {
    throw Error(ErrorCode::InvalidArgument,
                "scores given for a frame rejected by QC");
  }
  double sum = 0.0;
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw Error(ErrorCode::ParamOutOfRange, "class score outside [0,1]");
    }
    sum += s;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::ScoreSumViolation,
                "scores sum to " + std::to_string(sum));
  }
  PredictionRecord r(stream_index, qc);
  r.scores_ = scores;
  r.label_ = argmax(scores);
  return r;
}

std::string_view to_string(DecisionPath p) noexcept {
  switch (p) {
    case DecisionPath::Majority: return "Majority";
    case DecisionPath::MixedUnion: return "MixedUnion";
    case DecisionPath::Fallback: return "Fallback";
  }
  return "?";
}

std::optional<DecisionPath> parse_decision_path(std::string_view s) noexcept {
  for (auto p : {DecisionPath::Majority, DecisionPath::MixedUnion,
                 DecisionPath::Fallback}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

VideoTimeline::VideoTimeline(std::string video_id,
                             std::vector<PredictionRecord> records,
                             std::optional<Decision> decision)
    : video_id_(std::move(video_id)),
      records_(std::move(records)),
      decision_(decision) {
  for (std::size_t i = 1; i < records_.size(); ++i) {
    if (records_[i].stream_index() != records_[i - 1].stream_index() + 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "timeline records out of order, duplicated or with gaps at "
                  "stream index " +
                      std::to_string(records_[i].stream_index()));
    }
  }
  const bool any_label = admitted_count() > 0;
  if (any_label != decision_.has_value()) {
    throw Error(ErrorCode::InvalidArgument,
                "timeline decision must be present iff a frame was admitted");
  }
}

std::vector<MorphClass> VideoTimeline::labels() const {
  std::vector<MorphClass> out;
  for (const auto& r : records_) {
    if (r.label()) out.push_back(*r.label());
  }
  return out;
}

std::size_t VideoTimeline::admitted_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(),
      [](const PredictionRecord& r) { return r.label().has_value(); }));
}

std::size_t VideoTimeline::pass_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [](const PredictionRecord& r) {
        return r.qc().status() == QcStatus::Pass;
      }));
}

}  // namespace litho
