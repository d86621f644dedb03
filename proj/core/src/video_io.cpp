#include "litho/video_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "litho/error.hpp"
#include "litho/pnm.hpp"

namespace litho {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kMinSide = 16;

struct SquareCrop {
  int x0;
  int y0;
  int side;
};

SquareCrop centered_square(int width, int height) {
  if (width < kMinSide || height < kMinSide) {
    throw Error(ErrorCode::TooSmall, "frame " + std::to_string(width) + "x" +
                                         std::to_string(height) +
                                         " below 16 px");
  }
  const int side = std::min(width, height);
  return {(width - side) / 2, (height - side) / 2, side};
}

}  // namespace

std::size_t nearest_source_index(std::size_t k, double native_fps,
                                 double target_fps, std::size_t frame_count) {
  // |i/native - k/target| is compared as |i*target - k*native|, which is
  // exact for integral rates.
  const double target_scaled = static_cast<double>(k) * native_fps;
  const auto dist = [&](long long i) {
    return std::abs(static_cast<double>(i) * target_fps - target_scaled);
  };
  const long long guess =
      static_cast<long long>(std::floor(target_scaled / target_fps));
  long long best = std::max(0LL, guess - 1);
  for (long long i = best + 1; i <= guess + 1; ++i) {
    if (dist(i) < dist(best)) best = i;
  }
  const auto last = static_cast<long long>(frame_count) - 1;
  return static_cast<std::size_t>(std::clamp(best, 0LL, last));
}

std::size_t resampled_frame_count(std::size_t frame_count, double native_fps,
                                  double target_fps) {
  const double end = static_cast<double>(frame_count) * target_fps;
  auto c = static_cast<long long>(std::ceil(end / native_fps));
  while (c > 0 && static_cast<double>(c - 1) * native_fps >= end) --c;
  while (static_cast<double>(c) * native_fps < end) ++c;
  return static_cast<std::size_t>(c);
}

RawVideo resample_temporal(const RawVideo& v, double target_fps) {
  if (v.frames.empty()) {
    throw Error(ErrorCode::EmptyVideo, "video '" + v.video_id + "' has no frames");
  }
  if (!(target_fps > 0.0) || !(v.native_fps > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "frame rates must be positive");
  }
  RawVideo out;
  out.video_id = v.video_id;
  out.native_fps = target_fps;
  out.truth_label = v.truth_label;
  const std::size_t n =
      resampled_frame_count(v.frames.size(), v.native_fps, target_fps);
  const bool masks = v.truth_masks.size() == v.frames.size();
  const bool labels = v.frame_labels.size() == v.frames.size();
  out.frames.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto src =
        nearest_source_index(k, v.native_fps, target_fps, v.frames.size());
    out.frames.push_back(v.frames[src]);
    if (masks) out.truth_masks.push_back(v.truth_masks[src]);
    if (labels) out.frame_labels.push_back(v.frame_labels[src]);
  }
  return out;
}

RgbImage normalize_image(const RgbImage& img) {
  const auto crop = centered_square(img.width(), img.height());
  if (crop.side == kFrameSize && img.width() == kFrameSize &&
      img.height() == kFrameSize) {
    return img;
  }
  RgbImage out(kFrameSize, kFrameSize);
  const double scale = static_cast<double>(crop.side) / kFrameSize;
  const int last = crop.side - 1;
  // Precompute the horizontal taps; rows reuse them.
  std::vector<int> x0s(kFrameSize), x1s(kFrameSize);
  std::vector<double> fxs(kFrameSize);
  for (int x = 0; x < kFrameSize; ++x) {
    const double sx = std::clamp((x + 0.5) * scale - 0.5, 0.0, double(last));
    x0s[x] = static_cast<int>(std::floor(sx));
    x1s[x] = std::min(x0s[x] + 1, last);
    fxs[x] = sx - x0s[x];
  }
  for (int y = 0; y < kFrameSize; ++y) {
    const double sy = std::clamp((y + 0.5) * scale - 0.5, 0.0, double(last));
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, last);
    const double fy = sy - y0;
    for (int x = 0; x < kFrameSize; ++x) {
      const Rgb a = img.at(crop.x0 + x0s[x], crop.y0 + y0);
      const Rgb b = img.at(crop.x0 + x1s[x], crop.y0 + y0);
      const Rgb c = img.at(crop.x0 + x0s[x], crop.y0 + y1);
      const Rgb d = img.at(crop.x0 + x1s[x], crop.y0 + y1);
      const double fx = fxs[x];
      Rgb px{};
      for (int ch = 0; ch < 3; ++ch) {
        const double top = a[ch] + (b[ch] - a[ch]) * fx;
        const double bottom = c[ch] + (d[ch] - c[ch]) * fx;
        const double v = top + (bottom - top) * fy;
        px[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
      out.set(x, y, px);
    }
  }
  return out;
}

FrameGrid normalize_frame(const RgbImage& img, std::int64_t stream_index) {
  if (stream_index < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative stream index");
  }
  return FrameGrid{normalize_image(img), stream_index,
                   stream_timestamp(stream_index)};
}

StoneMask normalize_mask(const StoneMask& mask) {
  const auto crop = centered_square(mask.width(), mask.height());
  if (mask.width() == kFrameSize && mask.height() == kFrameSize) return mask;
  StoneMask out(kFrameSize, kFrameSize);
  const double scale = static_cast<double>(crop.side) / kFrameSize;
  for (int y = 0; y < kFrameSize; ++y) {
    const int sy = std::min(static_cast<int>((y + 0.5) * scale), crop.side - 1);
    for (int x = 0; x < kFrameSize; ++x) {
      const int sx = std::min(static_cast<int>((x + 0.5) * scale), crop.side - 1);
      out.set(x, y, mask.at(crop.x0 + sx, crop.y0 + sy));
    }
  }
  return out;
}

NormalizedVideo normalize_video(const RawVideo& v) {
  const RawVideo resampled = resample_temporal(v, kStreamFps);
  NormalizedVideo out;
  out.video_id = resampled.video_id;
  out.truth_label = resampled.truth_label;
  out.frames.reserve(resampled.frames.size());
  for (std::size_t k = 0; k < resampled.frames.size(); ++k) {
    out.frames.push_back(
        normalize_frame(resampled.frames[k], static_cast<std::int64_t>(k)));
  }
  for (const auto& m : resampled.truth_masks) {
    out.truth_masks.push_back(normalize_mask(m));
  }
  return out;
}

std::string frame_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06zu.ppm", index);
  return buf;
}

std::string mask_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "mask_%06zu.pgm", index);
  return buf;
}

void store_stream(const RawVideo& v, const fs::path& dir) {
  if (v.frames.empty()) {
    throw Error(ErrorCode::EmptyVideo, "video '" + v.video_id + "' has no frames");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string());

  const bool masks = !v.truth_masks.empty();
  if (masks && v.truth_masks.size() != v.frames.size()) {
    throw Error(ErrorCode::InvalidArgument, "truth mask count != frame count");
  }
  const bool per_frame_labels = !v.frame_labels.empty();
  if (per_frame_labels && v.frame_labels.size() != v.frames.size()) {
    throw Error(ErrorCode::InvalidArgument, "frame label count != frame count");
  }

  ordered_json manifest;
  manifest["video_id"] = v.video_id;
  manifest["native_fps"] = v.native_fps;
  manifest["frame_count"] = v.frames.size();
  auto frames = ordered_json::array();
  for (std::size_t i = 0; i < v.frames.size(); ++i) {
    ordered_json entry;
    entry["file"] = frame_file_name(i);
    pnm::write_ppm(dir / frame_file_name(i), v.frames[i]);
    if (masks) {
      entry["truth_mask"] = mask_file_name(i);
      pnm::write_mask_pgm(dir / mask_file_name(i), v.truth_masks[i]);
    }
    if (per_frame_labels) {
      entry["truth_label"] = std::string(to_string(v.frame_labels[i]));
    } else if (v.truth_label) {
      entry["truth_label"] = std::string(to_string(*v.truth_label));
    }
    frames.push_back(std::move(entry));
  }
  manifest["frames"] = std::move(frames);

  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

RawVideo load_stream(const fs::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::CorruptManifest,
                "cannot open manifest " + manifest_path.string());
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptManifest,
                manifest_path.string() + ": " + e.what());
  }

  RawVideo v;
  const fs::path dir = manifest_path.parent_path();
  try {
    v.video_id = manifest.at("video_id").get<std::string>();
    v.native_fps = manifest.at("native_fps").get<double>();
    const auto& frames = manifest.at("frames");
    if (!frames.is_array()) {
      throw Error(ErrorCode::CorruptManifest, "'frames' is not an array");
    }
    if (manifest.contains("frame_count") &&
        manifest["frame_count"].get<std::size_t>() != frames.size()) {
      throw Error(ErrorCode::CorruptManifest, "frame_count disagrees with frames");
    }
    std::size_t with_mask = 0;
    std::vector<std::optional<MorphClass>> labels;
    for (const auto& entry : frames) {
      const fs::path file = dir / entry.at("file").get<std::string>();
      if (!fs::exists(file)) {
        throw Error(ErrorCode::MissingFrame, "missing frame file " + file.string());
      }
      v.frames.push_back(pnm::read_ppm(file));
      const auto& first = v.frames.front();
      const auto& cur = v.frames.back();
      if (cur.width() != first.width() || cur.height() != first.height()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "frame " + file.filename().string() + " is " +
                        std::to_string(cur.width()) + "x" +
                        std::to_string(cur.height()) + ", expected " +
                        std::to_string(first.width()) + "x" +
                        std::to_string(first.height()));
      }
      if (entry.contains("truth_mask") && !entry["truth_mask"].is_null()) {
        const fs::path mfile = dir / entry["truth_mask"].get<std::string>();
        if (!fs::exists(mfile)) {
          throw Error(ErrorCode::MissingFrame, "missing mask file " + mfile.string());
        }
        auto mask = pnm::read_mask_pgm(mfile);
        if (mask.width() != cur.width() || mask.height() != cur.height()) {
          throw Error(ErrorCode::DimensionMismatch,
                      "mask " + mfile.filename().string() +
                          " does not match its frame");
        }
        v.truth_masks.push_back(std::move(mask));
        ++with_mask;
      }
      std::optional<MorphClass> label;
      if (entry.contains("truth_label") && !entry["truth_label"].is_null()) {
        const auto tag = entry["truth_label"].get<std::string>();
        label = parse_morph_class(tag);
        if (!label) {
          throw Error(ErrorCode::CorruptManifest, "unknown truth_label '" + tag + "'");
        }
      }
      labels.push_back(label);
    }
    if (with_mask != 0 && with_mask != v.frames.size()) {
      throw Error(ErrorCode::CorruptManifest,
                  "truth masks must be given for all frames or none");
    }
    const bool all_labeled = !labels.empty() &&
        std::all_of(labels.begin(), labels.end(), [](auto l) { return l.has_value(); });
    if (all_labeled) {
      for (auto l : labels) v.frame_labels.push_back(*l);
      if (std::all_of(labels.begin(), labels.end(),
                      [&](auto l) { return *l == *labels.front(); })) {
        v.truth_label = labels.front();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptManifest,
                manifest_path.string() + ": " + e.what());
  }
  if (!(v.native_fps > 0.0)) {
    throw Error(ErrorCode::CorruptManifest, "native_fps must be positive");
  }
  return v;
}

}  // namespace litho
