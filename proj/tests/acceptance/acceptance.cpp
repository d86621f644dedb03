// Acceptance criteria runner. Prints one PASS/FAIL line per criterion and
// exits non-zero when any selected criterion fails.
//
//   litho_acceptance                 all criteria
//   litho_acceptance --criterion 6   one criterion (repeatable)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "litho/decision.hpp"
#include "litho/error.hpp"
#include "litho/eval.hpp"
#include "litho/losses.hpp"
#include "litho/phantom.hpp"
#include "litho/pipeline.hpp"
#include "litho/qc.hpp"
#include "litho/segmentation.hpp"
#include "oracles.hpp"
#include "reference_scores.hpp"

using namespace litho;

namespace {

constexpr std::uint64_t kTrainSeed = 1000;
constexpr std::uint64_t kCleanSeed = 2024;
constexpr std::uint64_t kAdversarialSeed = 2025;
constexpr std::uint64_t kMixedSeed = 2026;
constexpr std::uint64_t kThroughputSeed = 2027;
constexpr std::size_t kStillsPerClass = 50;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const CentroidModel& model() {
  static const CentroidModel m = [] {
    std::vector<LabeledFrame> stills;
    for (MorphClass c : kAllClasses) {
      for (auto& f : training_stills(kTrainSeed, c, kStillsPerClass)) stills.push_back(std::move(f));
    }
    std::vector<TrainingSample> samples;
    for (const auto& f : stills) samples.push_back({&f.image, &f.mask, f.label});
    return train_centroid(samples);
  }();
  return m;
}

// ---- 1, 2: metric arithmetic ----------------------------------------------

Outcome metric_arithmetic() {
  Outcome o;
  int rows = 0, bad = 0;
  for (const auto& b : reference::kBlocks) {
    for (std::size_t i = 0; i < 5; ++i) {
      const double s = b.sensitivity[i], sp = b.specificity[i], p = b.precision[i];
      const double bal = (s + sp) / 2.0;
      const double f1 = p + s > 0 ? 2.0 * p * s / (p + s) : 0.0;
      const bool ok_bal = std::abs(bal - b.balanced_accuracy[i]) <= 0.5;
      const bool ok_f1 = std::abs(f1 - b.f1[i]) <= 0.5;
      ++rows;
      if (!ok_bal || !ok_f1) {
        ++bad;
        o.notes.push_back(fmt("%s %s: balanced %.3f vs %d%s, F1 %.3f vs %d%s", b.name,
                              reference::kColumns[i], bal, b.balanced_accuracy[i],
                              ok_bal ? "" : " (off)", f1, b.f1[i], ok_f1 ? "" : " (off)"));
      }
    }
  }
  // Whether each printed F1 is reachable from some unrounded rates that round
  // to the printed ones. Informational only.
  int reachable = 0;
  for (const auto& b : reference::kBlocks) {
    for (std::size_t i = 0; i < 5; ++i) {
      double lo = 1e9, hi = -1e9;
      for (double dp : {-0.5, 0.5}) {
        for (double ds : {-0.5, 0.5}) {
          const double p = std::clamp(b.precision[i] + dp, 0.0, 100.0);
          const double s = std::clamp(b.sensitivity[i] + ds, 0.0, 100.0);
          const double f1 = p + s > 0 ? 2.0 * p * s / (p + s) : 0.0;
          lo = std::min(lo, f1);
          hi = std::max(hi, f1);
        }
      }
      reachable += lo <= b.f1[i] + 0.5 && hi >= b.f1[i] - 0.5;
    }
  }
  o.notes.push_back(fmt("info: %d/%d printed F1 values are reachable from unrounded rates", reachable,
                        rows));
  o.pass = bad == 0;
  o.detail = fmt("%d/%d rows reproduce balanced accuracy and F1 within +-0.5", rows - bad, rows);
  return o;
}

Outcome aggregation_arithmetic() {
  const std::array<double, 5> sens{85, 75, 100, 69, 71};
  const std::array<double, 5> bal{90, 86, 96, 81, 85};
  const auto s = mean_sample_std(sens);
  const auto b = mean_sample_std(bal);
  Outcome o;
  o.pass = round_half_up(s.mean) == 80 && round_half_up(s.std) == 13 &&
           round_half_up(b.mean) == 88 && round_half_up(b.std) == 6;
  o.detail = fmt("sensitivity %.2f+-%.2f -> %lld+-%lld (80+-13), balanced %.2f+-%.2f -> %lld+-%lld (88+-6)",
                 s.mean, s.std, round_half_up(s.mean), round_half_up(s.std), b.mean, b.std,
                 round_half_up(b.mean), round_half_up(b.std));
  return o;
}

// ---- 3: decision oracle ------------------------------------------------------

Outcome decision_oracle() {
  std::size_t exhaustive = 0, at_eight = 0, random = 0, mismatches = 0;
  for (std::uint64_t total = 1; total <= 8; ++total) {
    for (const auto& n : oracle::censuses_with_total(total)) {
      ++exhaustive;
      at_eight += total == 8;
      mismatches += !(decide(LabelCensus(n)) == oracle::decide(n));
    }
  }
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> total_d(1, 1000);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t total = total_d(rng);
    std::uniform_int_distribution<std::uint64_t> cut(0, total);
    std::array<std::uint64_t, 4> c{cut(rng), cut(rng), cut(rng), cut(rng)};
    std::sort(c.begin(), c.end());
    const oracle::Counts n{c[0], c[1] - c[0], c[2] - c[1], c[3] - c[2], total - c[3]};
    ++random;
    mismatches += !(decide(LabelCensus(n)) == oracle::decide(n));
  }
  Outcome o;
  o.pass = mismatches == 0 && at_eight == 495;
  o.detail = fmt("%zu exhaustive censuses (total 1..8, %zu with total 8) + %zu random, %zu mismatches",
                 exhaustive, at_eight, random, mismatches);
  return o;
}

// ---- 4: DSC / QC properties ----------------------------------------------

Outcome dsc_qc_properties() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    StoneMask a(32, 32), b(32, 32);
    const double pa = u(rng), pb = u(rng) * u(rng);
    for (auto& v : a.bits()) v = u(rng) < pa;
    for (auto& v : b.bits()) v = u(rng) < pb;
    const double ab = dsc(a, b);
    violations += ab != dsc(b, a);
    violations += !(ab >= 0.0 && ab <= 1.0);
    violations += dsc(a, a) != 1.0;
  }
  auto run = [](std::size_t from, std::size_t n) {
    StoneMask m(10, 10);
    for (std::size_t i = from; i < from + n; ++i) m.bits()[i] = 1;
    return m;
  };
  const auto cov10 = run(0, 10);
  const bool coverage_strict = cov10.coverage() == 0.10 &&
                               check_frame(cov10, &cov10).status() == QcStatus::RejectedCoverage;
  const auto a = run(0, 50), b = run(5, 50);
  const bool dsc_strict = dsc(a, b) == 0.90 &&
                          check_frame(b, &a) == QcVerdict::rejected_instability(0.90);
  const bool first = check_frame(a, nullptr).status() == QcStatus::RejectedNoReference;
  Outcome o;
  o.pass = violations == 0 && coverage_strict && dsc_strict && first;
  o.detail = fmt("1000 random pairs: %d violations; coverage 0.10 %s, dsc 0.90 %s, first frame %s",
                 violations, coverage_strict ? "rejected" : "NOT rejected",
                 dsc_strict ? "rejected" : "NOT rejected", first ? "rejected" : "NOT rejected");
  return o;
}

// ---- 5: loss gradients -----------------------------------------------------

Outcome loss_gradients() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::bernoulli_distribution bit(0.5);
  constexpr double h = 1e-5;
  double worst_bce = 0, worst_dice = 0;
  auto worst = [&](auto loss, const std::vector<double>& g, const SoftMask& p, const StoneMask& t) {
    double w = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      SoftMask up = p, down = p;
      up.set(i, p[i] + h);
      down.set(i, p[i] - h);
      const double fd = (loss(up, t) - loss(down, t)) / (2 * h);
      w = std::max(w, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-8}));
    }
    return w;
  };
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v(64);
    for (auto& x : v) x = u(rng);
    const SoftMask p(8, 8, std::move(v));
    StoneMask t(8, 8);
    for (auto& b : t.bits()) b = bit(rng);
    worst_bce = std::max(worst_bce, worst([](const SoftMask& a, const StoneMask& b) { return bce_loss(a, b); },
                                          bce_loss_grad(p, t), p, t));
    worst_dice = std::max(worst_dice, worst([](const SoftMask& a, const StoneMask& b) { return dice_loss(a, b); },
                                            dice_loss_grad(p, t), p, t));
  }
  Outcome o;
  o.pass = worst_bce <= 1e-4 && worst_dice <= 1e-4;
  o.detail = fmt("100 random 8x8 instances: worst relative error bce %.2e, dice %.2e (<= 1e-4)",
                 worst_bce, worst_dice);
  return o;
}

// ---- 6-8: phantom cohorts ---------------------------------------------------

struct CohortRun {
  std::vector<CohortEntry> entries;
  std::vector<AblationRun> runs;
  std::map<std::string, MorphClass> truth;
};

CohortRun run_cohort(std::vector<CohortEntry> entries, std::span<const Variant> variants) {
  CohortRun r;
  r.entries = std::move(entries);
  for (const auto& e : r.entries) r.truth[e.video_id] = e.spec.label;
  const VideoSource source = [&](std::size_t i) {
    auto raw = generate_phantom(r.entries[i].spec);
    raw.video_id = r.entries[i].video_id;
    return normalize_video(raw);
  };
  const SegmenterFactory oracle = [](const NormalizedVideo& v) {
    return std::make_unique<OracleSegmenter>(v.truth_masks);
  };
  r.runs = run_ablation(r.entries.size(), source, oracle, model(), variants);
  return r;
}

// Every timeline document followed by the CSV and text reports.
std::string serialize(const CohortRun& r) {
  std::string out;
  std::vector<VariantReport> reports;
  for (const auto& run : r.runs) {
    for (const auto& t : run.timelines) out += timeline_to_json(t, run.variant);
    bool evaluable = true;
    for (MorphClass c : kAllClasses) {
      evaluable = evaluable && std::any_of(r.entries.begin(), r.entries.end(),
                                           [&](const auto& e) { return e.spec.label == c; });
    }
    if (evaluable) {
      reports.push_back({run.variant, evaluate(run.timelines, r.truth), qc_pass_stats(run.timelines)});
    }
  }
  if (!reports.empty()) out += report_csv(reports) + report_text(reports);
  return out;
}

struct CohortOutcome {
  Outcome outcome;
  std::string artifacts;
};

CohortOutcome clean_accuracy() {
  const std::array<Variant, 1> full{Variant::Full};
  const auto r = run_cohort(cohort_specs(CohortKind::Clean, 20, kCleanSeed), full);
  const auto e = evaluate(r.runs[0].timelines, r.truth);
  double min_sens = 1.0;
  std::string per_class;
  for (MorphClass c : kAllClasses) {
    const double s = e.per_class[index_of(c)].sensitivity;
    min_sens = std::min(min_sens, s);
    per_class += fmt(" %s=%.2f", std::string(to_string(c)).c_str(), s);
  }
  CohortOutcome out;
  out.outcome.pass = min_sens >= 0.90 && e.overall.balanced_accuracy.mean >= 0.90;
  out.outcome.detail = fmt("100 clean videos: min sensitivity %.3f (>= 0.90), balanced accuracy %.3f (>= 0.90)",
                           min_sens, e.overall.balanced_accuracy.mean);
  out.outcome.notes.push_back("sensitivity:" + per_class);
  out.artifacts = serialize(r);
  return out;
}

CohortOutcome ablation_direction() {
  const std::array<Variant, 3> variants{Variant::Full, Variant::NoMasking, Variant::NoQC};
  const auto r = run_cohort(cohort_specs(CohortKind::Adversarial, 10, kAdversarialSeed), variants);
  std::array<double, 3> bal{};
  std::array<double, 3> pass{};
  for (std::size_t k = 0; k < 3; ++k) {
    bal[k] = evaluate(r.runs[k].timelines, r.truth).overall.balanced_accuracy.mean;
    pass[k] = qc_pass_stats(r.runs[k].timelines).mean;
  }
  CohortOutcome out;
  out.outcome.pass = bal[0] >= bal[1] && bal[1] >= bal[2] && bal[0] - bal[2] >= 0.10;
  out.outcome.detail =
      fmt("50 adversarial videos: balanced accuracy full %.3f >= no-masking %.3f >= no-qc %.3f, "
          "full - no-qc = %.1f pp (>= 10)",
          bal[0], bal[1], bal[2], 100 * (bal[0] - bal[2]));
  out.outcome.notes.push_back(fmt("QC pass fraction: full %.3f, no-masking %.3f", pass[0], pass[1]));
  out.artifacts = serialize(r);
  return out;
}

CohortOutcome mixed_temporal_logic() {
  std::vector<CohortEntry> mixed;
  for (auto& e : cohort_specs(CohortKind::Clean, 10, kMixedSeed)) {
    if (is_mixed(e.spec.label)) mixed.push_back(std::move(e));
  }
  const std::array<Variant, 1> full{Variant::Full};
  const auto r = run_cohort(std::move(mixed), full);
  std::map<MorphClass, int> hits;
  for (const auto& t : r.runs[0].timelines) {
    const MorphClass truth = r.truth.at(t.video_id());
    if (t.decision() && t.decision()->label == truth && t.decision()->path == DecisionPath::MixedUnion) {
      ++hits[truth];
    }
  }
  CohortOutcome out;
  out.outcome.pass = hits[MorphClass::IaIIb] >= 8 && hits[MorphClass::IaIIIb] >= 8;
  out.outcome.detail = fmt("decided via MixedUnion: IaIIb %d/10, IaIIIb %d/10 (>= 8 each)",
                           hits[MorphClass::IaIIb], hits[MorphClass::IaIIIb]);
  out.artifacts = serialize(r);
  return out;
}

// ---- 9: throughput -----------------------------------------------------------

Outcome throughput() {
  std::vector<LabeledFrame> stills;
  for (MorphClass c : kAllClasses) {
    for (auto& f : training_stills(kTrainSeed, c, 6)) stills.push_back(std::move(f));
  }
  std::vector<LabeledStill> view;
  for (const auto& f : stills) view.push_back({&f.image, &f.mask});
  std::vector<double> grid;
  for (double t = 2.0; t <= 12.0; t += 0.5) grid.push_back(t);
  const ChromaSegmenter seg(calibrate_chroma(view, grid));

  auto spec = make_spec(kThroughputSeed, MorphClass::IaIIIb, 60.0);
  spec.events = {{EventKind::SurfaceExam, 0.0, 25.0, 1.0},
                 {EventKind::Fragmentation, 25.0, 26.0, 1.0},
                 {EventKind::SurfaceExam, 26.0, 60.0, 1.0}};
  auto raw = generate_phantom(spec);
  raw.video_id = "throughput";

  const auto t0 = std::chrono::steady_clock::now();
  const auto video = normalize_video(raw);
  StreamingPipeline p(seg, model(), {});
  for (const auto& f : video.frames) p.push(f);
  const auto timeline = p.finish(video.video_id);
  const double secs = seconds_since(t0);
  const double fps = static_cast<double>(video.frames.size()) / secs;
  Outcome o;
  o.pass = fps >= 8.0 && video.frames.size() == 480;
  o.detail = fmt("%zu frames of 256x256 in %.2f s on one thread: %.1f frames/s (>= 8)",
                 video.frames.size(), secs, fps);
  o.notes.push_back(fmt("decision %s via %s",
                        std::string(to_string(timeline.decision()->label)).c_str(),
                        std::string(to_string(timeline.decision()->path)).c_str()));
  return o;
}

// ---- 10: determinism ---------------------------------------------------------

Outcome determinism() {
  std::array<std::string, 2> runs;
  for (auto& s : runs) {
    s = clean_accuracy().artifacts + ablation_direction().artifacts + mixed_temporal_logic().artifacts;
  }
  Outcome o;
  o.pass = !runs[0].empty() && runs[0] == runs[1];
  o.detail = fmt("two executions of criteria 6-8: %zu vs %zu bytes of timelines and reports, %s",
                 runs[0].size(), runs[1].size(), runs[0] == runs[1] ? "identical" : "DIFFERENT");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criterion number (1-10); repeatable")
      ->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "metric arithmetic", 1, metric_arithmetic},
      {2, "aggregation arithmetic", 1, aggregation_arithmetic},
      {3, "decision-rule oracle", 10, decision_oracle},
      {4, "DSC/QC properties", 10, dsc_qc_properties},
      {5, "loss gradients", 10, loss_gradients},
      {6, "end-to-end phantom accuracy", 600, [] { return clean_accuracy().outcome; }},
      {7, "ablation direction", 900, [] { return ablation_direction().outcome; }},
      {8, "mixed-stone temporal logic", 300, [] { return mixed_temporal_logic().outcome; }},
      {9, "throughput", 0, throughput},
      {10, "determinism", 0, determinism},
  };

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = seconds_since(t0);
    std::string timing = fmt("%.2f s", secs);
    if (c.budget_s > 0) {
      timing += fmt(" (< %.0f s)", c.budget_s);
      if (secs >= c.budget_s) {
        o.pass = false;
        timing += " OVER BUDGET";
      }
    }
    std::printf("[%s] criterion %d %s: %s; %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), timing.c_str());
    for (const auto& n : o.notes) std::printf("       %s\n", n.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
