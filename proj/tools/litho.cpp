// litho: phantom generation, model fitting, pipeline runs and evaluation.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "litho/augment.hpp"
#include "litho/classify.hpp"
#include "litho/decision.hpp"
#include "litho/error.hpp"
#include "litho/eval.hpp"
#include "litho/overlay.hpp"
#include "litho/phantom.hpp"
#include "litho/pipeline.hpp"
#include "litho/pnm.hpp"
#include "litho/segmentation.hpp"
#include "litho/video_io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace litho;

namespace {

struct RunConfig {
  fs::path cohort;
  std::string segmenter = "oracle";
  std::string classifier = "centroid";
  fs::path model;
  fs::path calibration;
  fs::path masks_dir;
  fs::path scores_dir;
  QcConfig qc;
  Variant variant = Variant::Full;
  std::uint64_t seed = 0;
  fs::path out;
  bool overlay = false;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  double min_coverage = 0.10;
  double min_dsc = 0.90;
  std::string variant = "full";
  bool overlay = false;
};

[[noreturn]] void usage_error(const std::string& what) {
  throw CLI::ValidationError(what);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
  out << text;
}

// Config file values first, then any flag given on the command line.
RunConfig load_run_config(const Globals& g, const CLI::App& app) {
  RunConfig cfg;
  if (!g.config.empty()) {
    try {
      const auto j = ordered_json::parse(read_file(g.config));
      const fs::path base = fs::path(g.config).parent_path();
      const auto path_of = [&](const char* key) {
        const fs::path p = j.at(key).get<std::string>();
        return p.is_absolute() ? p : base / p;
      };
      if (j.contains("cohort")) cfg.cohort = path_of("cohort");
      if (j.contains("segmenter")) cfg.segmenter = j["segmenter"].get<std::string>();
      if (j.contains("classifier")) cfg.classifier = j["classifier"].get<std::string>();
      if (j.contains("model")) cfg.model = path_of("model");
      if (j.contains("calibration")) cfg.calibration = path_of("calibration");
      if (j.contains("masks_dir")) cfg.masks_dir = path_of("masks_dir");
      if (j.contains("scores_dir")) cfg.scores_dir = path_of("scores_dir");
      if (j.contains("out")) cfg.out = path_of("out");
      cfg.qc.min_coverage = j.value("min_coverage", cfg.qc.min_coverage);
      cfg.qc.min_dsc = j.value("min_dsc", cfg.qc.min_dsc);
      cfg.seed = j.value("seed", cfg.seed);
      cfg.overlay = j.value("overlay", cfg.overlay);
      if (j.contains("variant")) {
        const auto v = parse_variant(j["variant"].get<std::string>());
        if (!v) throw Error(ErrorCode::InvalidArgument, "unknown variant in config");
        cfg.variant = *v;
      }
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::CorruptManifest, "config " + g.config + ": " + ex.what());
    }
  }
  if (app.count("--seed") > 0) cfg.seed = g.seed;
  if (app.count("--min-coverage") > 0) cfg.qc.min_coverage = g.min_coverage;
  if (app.count("--min-dsc") > 0) cfg.qc.min_dsc = g.min_dsc;
  if (app.count("--overlay") > 0) cfg.overlay = g.overlay;
  if (app.count("--variant") > 0) {
    const auto v = parse_variant(g.variant);
    if (!v) usage_error("unknown variant " + g.variant);
    cfg.variant = *v;
  }
  validate(cfg.qc);
  return cfg;
}

struct CohortVideo {
  std::string video_id;
  fs::path manifest;
  std::optional<MorphClass> truth;
};

std::vector<CohortVideo> load_cohort(const fs::path& path) {
  std::vector<CohortVideo> out;
  try {
    const auto j = ordered_json::parse(read_file(path));
    for (const auto& v : j.at("videos")) {
      CohortVideo c;
      c.video_id = v.at("video_id").get<std::string>();
      c.manifest = path.parent_path() / v.at("manifest").get<std::string>();
      if (v.contains("truth_label") && !v["truth_label"].is_null()) {
        c.truth = parse_morph_class(v["truth_label"].get<std::string>());
        if (!c.truth) throw Error(ErrorCode::UnknownClass, "cohort label of " + c.video_id);
      }
      out.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::CorruptManifest, "cohort " + path.string() + ": " + ex.what());
  }
  return out;
}

// ---- phantom ---------------------------------------------------------------

int cmd_phantom(const Globals& g, std::size_t n_per_class, const std::string& kind_name,
                const fs::path& out, std::size_t stills) {
  const auto kind = parse_cohort_kind(kind_name);
  if (!kind) usage_error("unknown cohort kind " + kind_name);
  if (n_per_class == 0 && stills == 0) {
    std::cerr << "warning: --n-per-class 0, writing an empty cohort\n";
  }
  fs::create_directories(out);
  const auto entries = cohort_specs(*kind, n_per_class, g.seed);
  std::vector<ordered_json> rows(entries.size());
  parallel_for(entries.size(), worker_count(), [&](std::size_t i) {
    const auto& e = entries[i];
    RawVideo v = generate_phantom(e.spec);
    v.video_id = e.video_id;
    const fs::path dir = out / e.video_id;
    store_stream(v, dir);
    save_spec(e.spec, dir / "spec.json");
    rows[i] = ordered_json{{"video_id", e.video_id},
                           {"manifest", (fs::path(e.video_id) / "manifest.json").generic_string()},
                           {"truth_label", to_string(e.spec.label)}};
  });
  ordered_json cohort;
  cohort["kind"] = to_string(*kind);
  cohort["seed"] = g.seed;
  cohort["n_per_class"] = n_per_class;
  cohort["videos"] = rows;
  write_file(out / "cohort.json", cohort.dump(2) + "\n");

  if (stills > 0) {
    RawVideo s;
    s.video_id = "stills";
    for (auto c : kAllClasses) {
      for (auto& f : training_stills(g.seed, c, stills)) {
        s.frames.push_back(std::move(f.image));
        s.truth_masks.push_back(std::move(f.mask));
        s.frame_labels.push_back(f.label);
      }
    }
    store_stream(s, out / "stills");
  }
  std::cout << entries.size() << " videos written to " << out.string() << "\n";
  return 0;
}

// ---- calibrate-seg / train-cls --------------------------------------------

RawVideo load_stills(const fs::path& manifest) {
  RawVideo v = load_stream(manifest);
  if (v.truth_masks.empty()) throw Error(ErrorCode::MissingTruth, "stills need truth masks");
  return v;
}

int cmd_calibrate(const fs::path& stills_path, const fs::path& out, double tau_min,
                  double tau_max, double tau_step, int min_px) {
  if (!(tau_step > 0.0) || tau_max < tau_min) usage_error("bad tau grid");
  const RawVideo v = load_stills(stills_path);
  std::vector<RgbImage> images;
  std::vector<StoneMask> masks;
  for (std::size_t i = 0; i < v.frames.size(); ++i) {
    images.push_back(normalize_image(v.frames[i]));
    masks.push_back(normalize_mask(v.truth_masks[i]));
  }
  std::vector<LabeledStill> ls;
  for (std::size_t i = 0; i < images.size(); ++i) ls.push_back({&images[i], &masks[i]});
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double t = tau_min + i * tau_step;
    if (t > tau_max + 1e-12) break;
    grid.push_back(t);
  }
  const auto cal = calibrate_chroma(ls, grid, min_px);
  save_chroma_calibration(cal, out);
  double sum = 0.0;
  const ChromaSegmenter seg(cal);
  for (std::size_t i = 0; i < images.size(); ++i) sum += dsc(seg.segment_image(images[i]), masks[i]);
  std::printf("tau %.3f, mean dsc %.4f over %zu stills\n", cal.tau,
              images.empty() ? 0.0 : sum / static_cast<double>(images.size()), images.size());
  return 0;
}

StoneMask augment_mask(const StoneMask& m, AugmentParams p) {
  p.brightness = 1.0;
  RgbImage img(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.at(x, y)) img.set(x, y, {255, 255, 255});
    }
  }
  const RgbImage a = augment(img, p);
  StoneMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) out.set(x, y, a.at(x, y)[0] >= 128);
  }
  return out;
}

int cmd_train(const Globals& g, const fs::path& stills_path, const fs::path& out, double beta,
              std::size_t n_augment) {
  if (!(beta > 0.0)) usage_error("--beta must be positive");
  const RawVideo v = load_stills(stills_path);
  if (v.frame_labels.size() != v.frames.size()) {
    throw Error(ErrorCode::MissingTruth, "stills need a truth label per frame");
  }
  std::vector<RgbImage> images;
  std::vector<StoneMask> masks;
  std::vector<MorphClass> labels;
  const AugmentRecipe recipe;
  for (std::size_t i = 0; i < v.frames.size(); ++i) {
    const RgbImage img = normalize_image(v.frames[i]);
    const StoneMask mask = normalize_mask(v.truth_masks[i]);
    for (std::size_t a = 0; a < n_augment; ++a) {
      const auto p = sample_augment(recipe, g.seed ^ (i * 1315423911ULL + a));
      StoneMask am = augment_mask(mask, p);
      if (am.count() == 0) continue;
      images.push_back(augment(img, p));
      masks.push_back(std::move(am));
      labels.push_back(v.frame_labels[i]);
    }
    images.push_back(img);
    masks.push_back(mask);
    labels.push_back(v.frame_labels[i]);
  }
  std::vector<TrainingSample> samples;
  for (std::size_t i = 0; i < images.size(); ++i) samples.push_back({&images[i], &masks[i], labels[i]});
  const auto model = train_centroid(samples, beta);
  save_model(model, out);
  std::size_t correct = 0;
  for (const auto& s : samples) correct += argmax(model.predict_image(*s.image, *s.mask)) == s.label;
  std::printf("%zu samples, training accuracy %.4f\n", samples.size(),
              static_cast<double>(correct) / static_cast<double>(samples.size()));
  return 0;
}

// ---- run --------------------------------------------------------------------

std::unique_ptr<Segmenter> make_segmenter(const RunConfig& cfg, const NormalizedVideo& v,
                                          const std::optional<ChromaCalibration>& cal) {
  if (cfg.segmenter == "oracle") {
    if (!v.has_truth_masks()) {
      throw Error(ErrorCode::NoTruthAvailable, v.video_id + " has no truth masks");
    }
    return std::make_unique<OracleSegmenter>(v.truth_masks);
  }
  if (cfg.segmenter == "chroma") return std::make_unique<ChromaSegmenter>(*cal);
  return std::make_unique<ImportedMaskSegmenter>(cfg.masks_dir / v.video_id);
}

int cmd_run(const RunConfig& cfg) {
  if (cfg.cohort.empty()) usage_error("run needs --cohort");
  if (cfg.out.empty()) usage_error("run needs --out");
  if (cfg.segmenter != "oracle" && cfg.segmenter != "chroma" && cfg.segmenter != "import") {
    usage_error("unknown segmenter " + cfg.segmenter);
  }
  if (cfg.classifier != "centroid" && cfg.classifier != "import") {
    usage_error("unknown classifier " + cfg.classifier);
  }
  std::optional<ChromaCalibration> cal;
  if (cfg.segmenter == "chroma") {
    if (cfg.calibration.empty()) throw Error(ErrorCode::NotCalibrated, "chroma segmenter needs --calibration");
    cal = load_chroma_calibration(cfg.calibration);
  }
  if (cfg.segmenter == "import" && cfg.masks_dir.empty()) usage_error("import segmenter needs --masks-dir");
  std::optional<CentroidModel> model;
  if (cfg.classifier == "centroid") {
    if (cfg.model.empty()) throw Error(ErrorCode::NotTrained, "centroid classifier needs --model");
    model = load_model(cfg.model);
  } else if (cfg.scores_dir.empty()) {
    usage_error("import classifier needs --scores-dir");
  }

  const auto videos = load_cohort(cfg.cohort);
  fs::create_directories(cfg.out / "timelines");
  fs::create_directories(cfg.out / "scores");
  std::vector<std::string> summary(videos.size());
  parallel_for(videos.size(), worker_count(), [&](std::size_t i) {
    NormalizedVideo v = normalize_video(load_stream(videos[i].manifest));
    v.video_id = videos[i].video_id;
    const auto seg = make_segmenter(cfg, v, cal);
    std::unique_ptr<ImportedScoreClassifier> imported;
    if (!model) {
      imported = std::make_unique<ImportedScoreClassifier>(
          import_scores(cfg.scores_dir / (v.video_id + ".csv")));
    }
    const Classifier& cls = model ? static_cast<const Classifier&>(*model) : *imported;
    StreamingPipeline p(*seg, cls, {cfg.qc, cfg.variant});
    const fs::path overlay_dir = cfg.out / "overlay" / v.video_id;
    if (cfg.overlay) fs::create_directories(overlay_dir);
    ScoreTable scores;
    for (const auto& f : v.frames) {
      const FrameResult& r = p.push(f);
      if (r.record.scores()) scores[f.stream_index] = *r.record.scores();
      if (cfg.overlay) {
        char name[32];
        std::snprintf(name, sizeof name, "overlay_%06lld.ppm", static_cast<long long>(f.stream_index));
        pnm::write_ppm(overlay_dir / name, render_overlay(f.image, r.mask, r.record));
      }
    }
    const VideoTimeline t = p.finish(v.video_id);
    save_timeline(t, cfg.variant, cfg.out / "timelines" / (v.video_id + ".json"));
    export_scores(cfg.out / "scores" / (v.video_id + ".csv"), scores);
    char line[160];
    std::snprintf(line, sizeof line, "%-16s %5zu frames  pass %5.1f%%  -> %s (%s)",
                  v.video_id.c_str(), t.records().size(), 100.0 * pass_fraction(t),
                  t.decision() ? std::string(to_string(t.decision()->label)).c_str() : "none",
                  t.decision() ? std::string(to_string(t.decision()->path)).c_str() : "-");
    summary[i] = line;
  });
  for (const auto& s : summary) std::cout << s << "\n";
  return 0;
}

// ---- eval / report ------------------------------------------------------------

// Accepts a run output directory or its timelines/ sub-directory.
std::vector<VideoTimeline> load_timelines(fs::path dir, Variant* variant) {
  if (fs::is_directory(dir / "timelines")) dir /= "timelines";
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::EmptyList, "no timeline in " + dir.string());
  std::vector<VideoTimeline> out;
  std::optional<Variant> seen;
  for (const auto& f : files) {
    Variant v = Variant::Full;
    out.push_back(load_timeline(f, &v));
    if (seen && *seen != v) {
      throw Error(ErrorCode::CorruptManifest, dir.string() + " mixes ablation variants");
    }
    seen = v;
  }
  *variant = *seen;
  return out;
}

int cmd_eval(const std::vector<fs::path>& dirs, const fs::path& cohort_path, const fs::path& out) {
  std::map<std::string, MorphClass> truth;
  for (const auto& v : load_cohort(cohort_path)) {
    if (v.truth) truth[v.video_id] = *v.truth;
  }
  std::vector<VariantReport> reports;
  std::optional<FramewiseTable> framewise;
  for (const auto& dir : dirs) {
    Variant variant = Variant::Full;
    const auto timelines = load_timelines(dir, &variant);
    reports.push_back({variant, evaluate(timelines, truth), qc_pass_stats(timelines)});
    if (!framewise) {
      std::vector<LabeledTimeline> lt;
      for (const auto& t : timelines) lt.push_back({&t, truth.at(t.video_id())});
      framewise = framewise_analysis(lt);
    }
  }
  const std::string csv = report_csv(reports);
  const std::string text = report_text(reports, framewise ? &*framewise : nullptr);
  if (!out.empty()) {
    fs::create_directories(out);
    write_file(out / "report.csv", csv);
    write_file(out / "report.txt", text);
  }
  std::cout << text;
  return 0;
}

int cmd_report(const fs::path& dir) {
  Variant variant = Variant::Full;
  const auto timelines = load_timelines(dir, &variant);
  std::printf("variant %s, %zu videos\n", std::string(to_string(variant)).c_str(), timelines.size());
  std::printf("%-16s %6s %6s  %-24s %s\n", "video", "frames", "pass%", "census Ia/IIb/IIIb/IaIIb/IaIIIb", "decision");
  for (const auto& t : timelines) {
    const auto c = LabelCensus::from_labels(t.labels());
    char census[64];
    std::snprintf(census, sizeof census, "%llu/%llu/%llu/%llu/%llu",
                  static_cast<unsigned long long>(c.count(MorphClass::Ia)),
                  static_cast<unsigned long long>(c.count(MorphClass::IIb)),
                  static_cast<unsigned long long>(c.count(MorphClass::IIIb)),
                  static_cast<unsigned long long>(c.count(MorphClass::IaIIb)),
                  static_cast<unsigned long long>(c.count(MorphClass::IaIIIb)));
    std::printf("%-16s %6zu %6.1f  %-24s %s %s\n", t.video_id().c_str(), t.records().size(),
                100.0 * pass_fraction(t), census,
                t.decision() ? std::string(to_string(t.decision()->label)).c_str() : "none",
                t.decision() ? std::string(to_string(t.decision()->path)).c_str() : "");
  }
  const auto pass = qc_pass_stats(timelines);
  std::printf("QC pass fraction %.1f +- %.1f %%\n", 100.0 * pass.mean, 100.0 * pass.std);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Endoscopic stone recognition: phantoms, models, pipeline and evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every stochastic step");
  app.add_option("--config", g.config, "RunConfig JSON")->check(CLI::ExistingFile);
  app.add_option("--min-coverage", g.min_coverage, "QC coverage threshold (strict)");
  app.add_option("--min-dsc", g.min_dsc, "QC stability threshold (strict)");
  app.add_option("--variant", g.variant, "full | no-masking | no-qc")
      ->check(CLI::IsMember({"full", "no-masking", "no-qc"}));
  app.add_flag("--overlay", g.overlay, "Write annotated overlay frames");
  app.fallthrough();

  auto* phantom = app.add_subcommand("phantom", "Generate a labeled phantom cohort");
  std::size_t n_per_class = 0, n_stills = 0;
  std::string kind = "clean";
  fs::path out;
  phantom->add_option("--n-per-class", n_per_class, "Videos per class")->required();
  phantom->add_option("--kind", kind, "clean | adversarial | event-mix")
      ->check(CLI::IsMember({"clean", "adversarial", "event-mix"}));
  phantom->add_option("--stills", n_stills, "Also write N labeled stills per class");
  phantom->add_option("--out", out, "Output directory")->required();

  auto* calib = app.add_subcommand("calibrate-seg", "Fit the chroma segmenter on labeled stills");
  fs::path stills;
  double tau_min = 2.0, tau_max = 12.0, tau_step = 0.5;
  int min_px = 64;
  calib->add_option("--stills", stills, "Stills manifest")->required()->check(CLI::ExistingFile);
  calib->add_option("--out", out, "Calibration JSON")->required();
  calib->add_option("--tau-min", tau_min);
  calib->add_option("--tau-max", tau_max);
  calib->add_option("--tau-step", tau_step);
  calib->add_option("--min-component", min_px)->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train-cls", "Fit the centroid classifier on labeled stills");
  double beta = kDefaultBeta;
  std::size_t n_augment = 0;
  train->add_option("--stills", stills, "Stills manifest")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out, "Model JSON")->required();
  train->add_option("--beta", beta, "Softmin sharpness");
  train->add_option("--augment", n_augment, "Augmented copies per still");

  auto* run = app.add_subcommand("run", "Run the pipeline over a cohort");
  std::string cohort, segmenter, classifier, model, calibration, masks_dir, scores_dir, run_out;
  run->add_option("--cohort", cohort, "cohort.json")->check(CLI::ExistingFile);
  run->add_option("--segmenter", segmenter, "oracle | chroma | import");
  run->add_option("--classifier", classifier, "centroid | import");
  run->add_option("--model", model, "Centroid model JSON");
  run->add_option("--calibration", calibration, "Chroma calibration JSON");
  run->add_option("--masks-dir", masks_dir, "Imported masks, one sub-directory per video");
  run->add_option("--scores-dir", scores_dir, "Imported scores, <video_id>.csv");
  run->add_option("--out", run_out, "Output directory");

  auto* eval = app.add_subcommand("eval", "Evaluate timelines against cohort truth");
  std::vector<fs::path> timeline_dirs;
  fs::path cohort_path;
  eval->add_option("--timelines", timeline_dirs, "Timeline directory, one per variant")
      ->required()->check(CLI::ExistingDirectory);
  eval->add_option("--cohort", cohort_path, "cohort.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out, "Report directory");

  auto* report = app.add_subcommand("report", "Summarize a timeline directory");
  fs::path report_dir;
  report->add_option("--timelines", report_dir)->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (phantom->parsed()) return cmd_phantom(g, n_per_class, kind, out, n_stills);
    if (calib->parsed()) return cmd_calibrate(stills, out, tau_min, tau_max, tau_step, min_px);
    if (train->parsed()) return cmd_train(g, stills, out, beta, n_augment);
    if (run->parsed()) {
      RunConfig cfg = load_run_config(g, app);
      if (!cohort.empty()) cfg.cohort = cohort;
      if (!segmenter.empty()) cfg.segmenter = segmenter;
      if (!classifier.empty()) cfg.classifier = classifier;
      if (!model.empty()) cfg.model = model;
      if (!calibration.empty()) cfg.calibration = calibration;
      if (!masks_dir.empty()) cfg.masks_dir = masks_dir;
      if (!scores_dir.empty()) cfg.scores_dir = scores_dir;
      if (!run_out.empty()) cfg.out = run_out;
      return cmd_run(cfg);
    }
    if (eval->parsed()) return cmd_eval(timeline_dirs, cohort_path, out);
    if (report->parsed()) return cmd_report(report_dir);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
