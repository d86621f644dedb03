#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "litho/image.hpp"
#include "litho/morph_class.hpp"

namespace litho {

/// A recorded frame sequence at its native rate, optionally annotated.
struct RawVideo {
  std::string video_id;
  double native_fps = kStreamFps;
  std::vector<RgbImage> frames;
  /// Either empty or one mask per frame.
  std::vector<StoneMask> truth_masks;
  /// Video-level label. On load it is set when every frame carries the same
  /// per-frame label.
  std::optional<MorphClass> truth_label;
  /// Either empty or one label per frame (labeled still collections).
  std::vector<MorphClass> frame_labels;
};

/// A video on the standard 8 Hz / 256x256 grid.
struct NormalizedVideo {
  std::string video_id;
  std::vector<FrameGrid> frames;
  std::vector<StoneMask> truth_masks;
  std::optional<MorphClass> truth_label;

  bool has_truth_masks() const noexcept {
    return !truth_masks.empty() && truth_masks.size() == frames.size();
  }
};

/// Input frame index selected for output index `k`: the frame whose native
/// timestamp is nearest to k / target_fps, ties to the earlier frame.
std::size_t nearest_source_index(std::size_t k, double native_fps,
                                 double target_fps, std::size_t frame_count);

/// Number of output frames: every k with k / target_fps before the end of
/// the input (duration = frame_count / native_fps).
std::size_t resampled_frame_count(std::size_t frame_count, double native_fps,
                                  double target_fps);

/// Nearest-frame temporal resampling. Truth masks follow their frames.
RawVideo resample_temporal(const RawVideo& v, double target_fps = kStreamFps);

/// Largest centered square crop followed by a bilinear resize to
/// kFrameSize x kFrameSize. Throws TooSmall below 16 px on either axis.
RgbImage normalize_image(const RgbImage& img);

FrameGrid normalize_frame(const RgbImage& img, std::int64_t stream_index = 0);

/// Same crop geometry as normalize_image, nearest-neighbour resize.
StoneMask normalize_mask(const StoneMask& mask);

/// Resample to 8 Hz, then normalize every frame (and truth mask).
NormalizedVideo normalize_video(const RawVideo& v);

/// Reads a frame container. Throws CorruptManifest, MissingFrame or
/// DimensionMismatch.
RawVideo load_stream(const std::filesystem::path& manifest_path);

/// Writes `frame_%06d.ppm`, `mask_%06d.pgm` (when truth masks exist) and
/// `manifest.json` into `dir`, creating it if needed.
void store_stream(const RawVideo& v, const std::filesystem::path& dir);

std::string frame_file_name(std::size_t index);
std::string mask_file_name(std::size_t index);

}  // namespace litho
