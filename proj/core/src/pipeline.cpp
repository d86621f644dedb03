#include "litho/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "litho/decision.hpp"
#include "litho/error.hpp"

namespace litho {

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoMasking: return "no-masking";
    case Variant::NoQC: return "no-qc";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view s) noexcept {
  for (auto v : {Variant::Full, Variant::NoMasking, Variant::NoQC}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

StreamingPipeline::StreamingPipeline(const Segmenter& segmenter,
                                     const Classifier& classifier, PipelineConfig cfg)
    : segmenter_(segmenter), classifier_(classifier), cfg_(cfg) {
  validate(cfg_.qc);
}

const FrameResult& StreamingPipeline::push(const FrameGrid& frame) {
  if (!records_.empty() && frame.stream_index != records_.back().stream_index() + 1) {
    throw Error(ErrorCode::InvalidArgument,
                "frame " + std::to_string(frame.stream_index) + " out of stream order");
  }
  if (cfg_.variant == Variant::NoQC) {
    StoneMask full = StoneMask::full(frame.width(), frame.height());
    const auto scores = classifier_.predict(frame, full);
    last_.emplace(FrameResult{
        PredictionRecord::classified(frame.stream_index, QcVerdict::bypassed(), scores),
        std::move(full)});
  } else {
    StoneMask mask = segmenter_.segment(frame);
    const QcVerdict qc =
        check_frame(mask, previous_ ? &*previous_ : nullptr, cfg_.qc);
    if (qc.admits()) {
      const auto scores =
          cfg_.variant == Variant::Full
              ? classifier_.predict(frame, mask)
              : classifier_.predict(frame, StoneMask::full(frame.width(), frame.height()));
      last_.emplace(FrameResult{
          PredictionRecord::classified(frame.stream_index, qc, scores), mask});
    } else {
      last_.emplace(FrameResult{PredictionRecord::rejected(frame.stream_index, qc), mask});
    }
    previous_ = std::move(mask);
  }
  records_.push_back(last_->record);
  return *last_;
}

VideoTimeline StreamingPipeline::finish(std::string video_id) const {
  const auto labels = [&] {
    std::vector<MorphClass> out;
    for (const auto& r : records_) {
      if (r.label()) out.push_back(*r.label());
    }
    return out;
  }();
  std::optional<Decision> decision;
  if (!labels.empty()) decision = decide(LabelCensus::from_labels(labels));
  return VideoTimeline(std::move(video_id), records_, decision);
}

VideoTimeline run_pipeline(const NormalizedVideo& video, const Segmenter& segmenter,
                           const Classifier& classifier, const PipelineConfig& cfg) {
  StreamingPipeline p(segmenter, classifier, cfg);
  for (const auto& f : video.frames) p.push(f);
  return p.finish(video.video_id);
}

std::size_t worker_count() {
  if (const char* env = std::getenv("LITHO_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  const auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace litho
