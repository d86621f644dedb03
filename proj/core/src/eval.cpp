#include "litho/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "litho/decision.hpp"
#include "litho/error.hpp"

namespace litho {

using nlohmann::ordered_json;

void ConfusionTally::add(MorphClass truth, std::optional<MorphClass> decided) noexcept {
  for (auto c : kAllClasses) {
    auto& t = per_class_[index_of(c)];
    const bool pos = truth == c;
    const bool pred = decided && *decided == c;
    if (pos && pred) ++t.tp;
    else if (pos) ++t.fn;
    else if (pred) ++t.fp;
    else ++t.tn;
  }
  ++videos_;
}

void ConfusionTally::merge(const ConfusionTally& other) noexcept {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    per_class_[i].tp += other.per_class_[i].tp;
    per_class_[i].fn += other.per_class_[i].fn;
    per_class_[i].fp += other.per_class_[i].fp;
    per_class_[i].tn += other.per_class_[i].tn;
  }
  videos_ += other.videos_;
}

ClassMetrics metrics_from_rates(double sensitivity, double specificity, double precision) {
  ClassMetrics m;
  m.sensitivity = sensitivity;
  m.specificity = specificity;
  m.precision = precision;
  m.balanced_accuracy = (sensitivity + specificity) / 2.0;
  const double denom = precision + sensitivity;
  m.f1 = denom > 0.0 ? 2.0 * precision * sensitivity / denom : 0.0;
  return m;
}

ClassMetrics class_metrics(const ConfusionTally& tally, MorphClass c) {
  const auto& t = tally.tally(c);
  if (t.tp + t.fn == 0) {
    throw Error(ErrorCode::NoPositives,
                "no video with truth " + std::string(to_string(c)) + " in the cohort");
  }
  const auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  return metrics_from_rates(ratio(t.tp, t.tp + t.fn), ratio(t.tn, t.tn + t.fp),
                            ratio(t.tp, t.tp + t.fp));
}

MeanStd mean_sample_std(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyList, "mean of no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

long long round_half_up(double x) { return static_cast<long long>(std::floor(x + 0.5)); }

OverallScores overall_scores(const std::array<ClassMetrics, kNumClasses>& per_class) {
  const auto agg = [&](double ClassMetrics::*field) {
    std::array<double, kNumClasses> v{};
    for (std::size_t i = 0; i < kNumClasses; ++i) v[i] = per_class[i].*field;
    return mean_sample_std(v);
  };
  return {agg(&ClassMetrics::sensitivity), agg(&ClassMetrics::specificity),
          agg(&ClassMetrics::precision), agg(&ClassMetrics::balanced_accuracy),
          agg(&ClassMetrics::f1)};
}

std::array<double, kNumClasses> label_fractions(const VideoTimeline& t) {
  std::array<double, kNumClasses> f{};
  const auto labels = t.labels();
  if (labels.empty()) return f;
  for (auto l : labels) f[index_of(l)] += 1.0;
  for (auto& v : f) v /= static_cast<double>(labels.size());
  return f;
}

FramewiseTable framewise_analysis(std::span<const LabeledTimeline> timelines) {
  std::map<MorphClass, std::array<std::vector<double>, kNumClasses>> groups;
  for (const auto& lt : timelines) {
    if (lt.timeline->admitted_count() == 0) continue;
    const auto f = label_fractions(*lt.timeline);
    auto& g = groups[lt.truth];
    for (std::size_t i = 0; i < kNumClasses; ++i) g[i].push_back(f[i]);
  }
  if (groups.empty()) throw Error(ErrorCode::EmptyGroup, "no timeline with admitted frames");
  FramewiseTable out;
  for (const auto& [truth, cols] : groups) {
    auto& row = out[truth];
    for (std::size_t i = 0; i < kNumClasses; ++i) row[i] = mean_sample_std(cols[i]);
  }
  return out;
}

double pass_fraction(const VideoTimeline& t) {
  if (t.records().empty()) return 0.0;
  return static_cast<double>(t.pass_count()) / static_cast<double>(t.records().size());
}

MeanStd qc_pass_stats(std::span<const VideoTimeline> timelines) {
  if (timelines.empty()) throw Error(ErrorCode::EmptyGroup, "no timeline");
  std::vector<double> f;
  f.reserve(timelines.size());
  for (const auto& t : timelines) f.push_back(pass_fraction(t));
  return mean_sample_std(f);
}

Evaluation evaluate(std::span<const VideoTimeline> timelines,
                    const std::map<std::string, MorphClass>& truth) {
  Evaluation e;
  for (const auto& t : timelines) {
    const auto it = truth.find(t.video_id());
    if (it == truth.end()) throw Error(ErrorCode::MissingTruth, "no truth for " + t.video_id());
    e.tally.add(it->second, t.decision() ? std::optional(t.decision()->label) : std::nullopt);
  }
  for (auto c : kAllClasses) e.per_class[index_of(c)] = class_metrics(e.tally, c);
  e.overall = overall_scores(e.per_class);
  return e;
}

std::vector<AblationRun> run_ablation(std::size_t n_videos, const VideoSource& source,
                                      const SegmenterFactory& segmenter,
                                      const Classifier& classifier,
                                      std::span<const Variant> variants, const QcConfig& qc,
                                      std::size_t workers) {
  std::vector<std::vector<std::optional<VideoTimeline>>> slots(
      variants.size(), std::vector<std::optional<VideoTimeline>>(n_videos));
  parallel_for(n_videos, workers, [&](std::size_t i) {
    const NormalizedVideo video = source(i);
    const auto seg = segmenter(video);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      slots[v][i] = run_pipeline(video, *seg, classifier, {qc, variants[v]});
    }
  });
  std::vector<AblationRun> out;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    AblationRun run{variants[v], {}};
    run.timelines.reserve(n_videos);
    for (auto& t : slots[v]) run.timelines.push_back(std::move(*t));
    out.push_back(std::move(run));
  }
  return out;
}

std::string timeline_to_json(const VideoTimeline& t, Variant variant) {
  ordered_json j;
  j["video_id"] = t.video_id();
  j["variant"] = to_string(variant);
  ordered_json records = ordered_json::array();
  for (const auto& r : t.records()) {
    ordered_json rec;
    rec["frame"] = r.stream_index();
    rec["qc"] = to_string(r.qc().status());
    rec["dsc"] = r.qc().dsc() ? ordered_json(*r.qc().dsc()) : ordered_json(nullptr);
    if (r.scores()) {
      ordered_json s;
      for (auto c : kAllClasses) s[std::string(to_string(c))] = (*r.scores())[index_of(c)];
      rec["scores"] = s;
      rec["label"] = to_string(*r.label());
    } else {
      rec["scores"] = nullptr;
      rec["label"] = nullptr;
    }
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);
  const auto census = LabelCensus::from_labels(t.labels());
  ordered_json cj;
  for (auto c : kAllClasses) cj[std::string(to_string(c))] = census.count(c);
  j["census"] = cj;
  if (t.decision()) {
    j["decision"] = to_string(t.decision()->label);
    j["decision_path"] = to_string(t.decision()->path);
  } else {
    j["decision"] = nullptr;
    j["decision_path"] = nullptr;
  }
  // Only the points where the running verdict changes.
  ordered_json prefix = ordered_json::array();
  std::optional<Decision> last;
  for (const auto& p : prefix_decisions(t)) {
    if (last && *last == p.decision) continue;
    last = p.decision;
    prefix.push_back({{"frame", p.stream_index},
                      {"decision", to_string(p.decision.label)},
                      {"path", to_string(p.decision.path)}});
  }
  j["prefix_decisions"] = std::move(prefix);
  return j.dump(1);
}

VideoTimeline timeline_from_json(std::string_view text, Variant* variant) {
  const auto bad = [](const std::string& what) {
    return Error(ErrorCode::CorruptManifest, "timeline: " + what);
  };
  try {
    const auto j = ordered_json::parse(text);
    if (variant != nullptr) {
      const auto v = parse_variant(j.at("variant").get<std::string>());
      if (!v) throw bad("unknown variant");
      *variant = *v;
    }
    std::vector<PredictionRecord> records;
    for (const auto& rec : j.at("records")) {
      const auto idx = rec.at("frame").get<std::int64_t>();
      const auto status = parse_qc_status(rec.at("qc").get<std::string>());
      if (!status) throw bad("unknown qc status");
      const auto& dj = rec.at("dsc");
      QcVerdict qc = QcVerdict::rejected_coverage();
      switch (*status) {
        case QcStatus::Pass: qc = QcVerdict::pass(dj.get<double>()); break;
        case QcStatus::RejectedInstability: qc = QcVerdict::rejected_instability(dj.get<double>()); break;
        case QcStatus::RejectedCoverage: qc = QcVerdict::rejected_coverage(); break;
        case QcStatus::RejectedNoReference: qc = QcVerdict::rejected_no_reference(); break;
        case QcStatus::Bypassed: qc = QcVerdict::bypassed(); break;
      }
      const auto& sj = rec.at("scores");
      if (sj.is_null()) {
        records.push_back(PredictionRecord::rejected(idx, qc));
        continue;
      }
      ScoreMap s{};
      for (auto c : kAllClasses) s[index_of(c)] = sj.at(std::string(to_string(c))).get<double>();
      auto r = PredictionRecord::classified(idx, qc, s);
      if (to_string(*r.label()) != rec.at("label").get<std::string>()) {
        throw bad("label is not the argmax of its scores at frame " + std::to_string(idx));
      }
      records.push_back(std::move(r));
    }
    std::optional<Decision> decision;
    if (!j.at("decision").is_null()) {
      const auto label = parse_morph_class(j.at("decision").get<std::string>());
      const auto path = parse_decision_path(j.at("decision_path").get<std::string>());
      if (!label || !path) throw bad("unknown decision");
      decision = Decision{*label, *path};
    }
    VideoTimeline t(j.at("video_id").get<std::string>(), std::move(records), decision);
    if (t.decision() && !t.labels().empty() &&
        !(decide(LabelCensus::from_labels(t.labels())) == *t.decision())) {
      throw bad("decision does not follow from the recorded labels");
    }
    return t;
  } catch (const nlohmann::json::exception& ex) {
    throw bad(ex.what());
  }
}

void save_timeline(const VideoTimeline& t, Variant variant, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << timeline_to_json(t, variant) << '\n';
}

VideoTimeline load_timeline(const std::filesystem::path& path, Variant* variant) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return timeline_from_json(ss.str(), variant);
}

namespace {

void append(std::string& out, const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  out += buf;
}

long long pct(double x) { return round_half_up(100.0 * x); }

}  // namespace

std::string report_csv(std::span<const VariantReport> reports) {
  std::string out = "variant,class,sensitivity,specificity,precision,balanced_accuracy,f1\n";
  for (const auto& r : reports) {
    const auto v = std::string(to_string(r.variant));
    for (auto c : kAllClasses) {
      const auto& m = r.evaluation.per_class[index_of(c)];
      append(out, "%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f\n", v.c_str(),
             std::string(to_string(c)).c_str(), m.sensitivity, m.specificity, m.precision,
             m.balanced_accuracy, m.f1);
    }
    const auto& o = r.evaluation.overall;
    append(out, "%s,mean,%.6f,%.6f,%.6f,%.6f,%.6f\n", v.c_str(), o.sensitivity.mean,
           o.specificity.mean, o.precision.mean, o.balanced_accuracy.mean, o.f1.mean);
    append(out, "%s,std,%.6f,%.6f,%.6f,%.6f,%.6f\n", v.c_str(), o.sensitivity.std,
           o.specificity.std, o.precision.std, o.balanced_accuracy.std, o.f1.std);
  }
  return out;
}

std::string report_text(std::span<const VariantReport> reports, const FramewiseTable* framewise) {
  std::string out;
  for (const auto& r : reports) {
    append(out, "== %s (%llu videos) ==\n", std::string(to_string(r.variant)).c_str(),
           static_cast<unsigned long long>(r.evaluation.tally.videos()));
    append(out, "%-8s %9s %9s %9s %9s %9s\n", "class", "bal.acc", "sens", "spec", "prec", "f1");
    for (auto c : kAllClasses) {
      const auto& m = r.evaluation.per_class[index_of(c)];
      append(out, "%-8s %9lld %9lld %9lld %9lld %9lld\n", std::string(to_string(c)).c_str(),
             pct(m.balanced_accuracy), pct(m.sensitivity), pct(m.specificity),
             pct(m.precision), pct(m.f1));
    }
    const auto& o = r.evaluation.overall;
    const auto cell = [](const MeanStd& s) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%lld+-%lld", pct(s.mean), pct(s.std));
      return std::string(buf);
    };
    append(out, "%-8s %9s %9s %9s %9s %9s\n", "overall", cell(o.balanced_accuracy).c_str(),
           cell(o.sensitivity).c_str(), cell(o.specificity).c_str(),
           cell(o.precision).c_str(), cell(o.f1).c_str());
    append(out, "QC pass fraction: %lld +- %lld %%\n\n", pct(r.qc_pass.mean), pct(r.qc_pass.std));
  }
  if (framewise != nullptr) {
    out += "== frame-wise predictions (% of admitted frames, mean over videos) ==\n";
    append(out, "%-8s", "truth");
    for (auto c : kAllClasses) append(out, " %9s", std::string(to_string(c)).c_str());
    out += '\n';
    for (const auto& [truth, row] : *framewise) {
      append(out, "%-8s", std::string(to_string(truth)).c_str());
      for (const auto& s : row) append(out, " %9lld", pct(s.mean));
      out += '\n';
    }
  }
  return out;
}

}  // namespace litho
