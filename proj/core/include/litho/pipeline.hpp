#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "litho/classify.hpp"
#include "litho/qc.hpp"
#include "litho/records.hpp"
#include "litho/segmentation.hpp"
#include "litho/video_io.hpp"

namespace litho {

/// Full: segment, gate, classify the masked frame.
/// NoMasking: segment and gate, classify the unmasked frame.
/// NoQC: no segmentation and no gate; every unmasked frame is classified.
enum class Variant : std::uint8_t { Full, NoMasking, NoQC };

std::string_view to_string(Variant v) noexcept;
std::optional<Variant> parse_variant(std::string_view s) noexcept;

struct PipelineConfig {
  QcConfig qc;
  Variant variant = Variant::Full;
};

struct FrameResult {
  PredictionRecord record;
  /// Segmentation output; a full mask under NoQC.
  StoneMask mask;
};

/// Consumes one video frame by frame in stream order.
class StreamingPipeline {
 public:
  StreamingPipeline(const Segmenter& segmenter, const Classifier& classifier,
                    PipelineConfig cfg);

  /// Throws InvalidArgument when frames arrive out of order.
  const FrameResult& push(const FrameGrid& frame);
  const std::vector<PredictionRecord>& records() const noexcept { return records_; }
  VideoTimeline finish(std::string video_id) const;

 private:
  const Segmenter& segmenter_;
  const Classifier& classifier_;
  PipelineConfig cfg_;
  std::optional<StoneMask> previous_;
  std::optional<FrameResult> last_;
  std::vector<PredictionRecord> records_;
};

VideoTimeline run_pipeline(const NormalizedVideo& video, const Segmenter& segmenter,
                           const Classifier& classifier, const PipelineConfig& cfg = {});

/// Worker cap: LITHO_WORKERS when set to a positive integer, else the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Each index runs
/// exactly once; if any call throws, the exception of the lowest failing
/// index is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace litho
