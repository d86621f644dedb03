#include <benchmark/benchmark.h>

#include <random>

#include "litho/classify.hpp"
#include "litho/decision.hpp"
#include "litho/phantom.hpp"
#include "litho/pipeline.hpp"
#include "litho/qc.hpp"
#include "litho/segmentation.hpp"
#include "litho/video_io.hpp"

using namespace litho;

namespace {

struct Fixture {
  CentroidModel model;
  ChromaSegmenter chroma;
  NormalizedVideo video;

  Fixture() {
    std::vector<LabeledFrame> stills;
    for (MorphClass c : kAllClasses) {
      for (auto& f : training_stills(1000, c, 10)) stills.push_back(std::move(f));
    }
    std::vector<TrainingSample> samples;
    std::vector<LabeledStill> view;
    for (const auto& f : stills) {
      samples.push_back({&f.image, &f.mask, f.label});
      view.push_back({&f.image, &f.mask});
    }
    model = train_centroid(samples);
    const std::vector<double> grid{3.0, 4.0, 4.5, 5.0, 6.0};
    chroma = ChromaSegmenter(calibrate_chroma(view, grid));
    auto raw = generate_phantom(clean_spec(7, MorphClass::IaIIb));
    raw.video_id = "bench";
    video = normalize_video(raw);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_RenderFrame(benchmark::State& state) {
  const auto spec = clean_spec(3, MorphClass::IaIIIb);
  std::size_t k = 0;
  const std::size_t n = phantom_frame_count(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_frame(spec, k));
    k = (k + 1) % n;
  }
}
BENCHMARK(BM_RenderFrame)->Unit(benchmark::kMillisecond);

void BM_ChromaSegment(benchmark::State& state) {
  const auto& f = fixture();
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.chroma.segment(f.video.frames[k]));
    k = (k + 1) % f.video.frames.size();
  }
}
BENCHMARK(BM_ChromaSegment)->Unit(benchmark::kMillisecond);

void BM_CheckFrame(benchmark::State& state) {
  const auto& f = fixture();
  const auto& a = f.video.truth_masks[10];
  const auto& b = f.video.truth_masks[11];
  for (auto _ : state) benchmark::DoNotOptimize(check_frame(b, &a));
}
BENCHMARK(BM_CheckFrame);

void BM_CentroidPredict(benchmark::State& state) {
  const auto& f = fixture();
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.model.predict(f.video.frames[k], f.video.truth_masks[k]));
    k = (k + 1) % f.video.frames.size();
  }
}
BENCHMARK(BM_CentroidPredict)->Unit(benchmark::kMillisecond);

void BM_PipelineFrame(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    StreamingPipeline p(f.chroma, f.model, {});
    for (const auto& frame : f.video.frames) p.push(frame);
    benchmark::DoNotOptimize(p.finish("bench"));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.video.frames.size()));
}
BENCHMARK(BM_PipelineFrame)->Unit(benchmark::kMillisecond);

void BM_Decide(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> d(0, 200);
  std::vector<LabelCensus> cs;
  for (int i = 0; i < 1024; ++i) cs.emplace_back(std::array<std::uint64_t, 5>{d(rng), d(rng), d(rng), d(rng), d(rng) + 1});
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(decide(cs[k]));
    k = (k + 1) & 1023;
  }
}
BENCHMARK(BM_Decide);

}  // namespace

BENCHMARK_MAIN();
