#include "litho/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "litho/error.hpp"
#include "litho/pnm.hpp"
#include "litho/video_io.hpp"

namespace litho {

namespace fs = std::filesystem;

double dsc(const StoneMask& a, const StoneMask& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::DimensionMismatch, "dsc of masks with different shapes");
  }
  const auto ab = a.bits();
  const auto bb = b.bits();
  std::size_t inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < ab.size(); ++i) {
    na += ab[i];
    nb += bb[i];
    inter += ab[i] & bb[i];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

// ---------------------------------------------------------------------------

OracleSegmenter::OracleSegmenter(std::vector<StoneMask> truth)
    : truth_(std::move(truth)) {}

StoneMask OracleSegmenter::segment(const FrameGrid& frame) const {
  if (frame.stream_index < 0 ||
      static_cast<std::size_t>(frame.stream_index) >= truth_.size()) {
    throw Error(ErrorCode::NoTruthAvailable,
                "no truth mask for stream index " +
                    std::to_string(frame.stream_index));
  }
  const auto& m = truth_[static_cast<std::size_t>(frame.stream_index)];
  if (m.width() != frame.width() || m.height() != frame.height()) {
    throw Error(ErrorCode::DimensionMismatch, "truth mask does not match frame");
  }
  return m;
}

ImportedMaskSegmenter::ImportedMaskSegmenter(fs::path dir) : dir_(std::move(dir)) {}

StoneMask ImportedMaskSegmenter::segment(const FrameGrid& frame) const {
  const auto path = dir_ / mask_file_name(static_cast<std::size_t>(frame.stream_index));
  if (!fs::exists(path)) {
    throw Error(ErrorCode::NoTruthAvailable, "no imported mask " + path.string());
  }
  auto mask = pnm::read_mask_pgm(path);
  if (mask.width() != frame.width() || mask.height() != frame.height()) {
    throw Error(ErrorCode::DimensionMismatch,
                "imported mask " + path.filename().string() + " does not match frame");
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Connected components

namespace {

// Flood fill over pixels whose value equals `value`, 4-connectivity.
// Returns the pixel indices of the component containing `seed`.
void flood(std::span<const std::uint8_t> bits, int w, int h, std::size_t seed,
           std::uint8_t value, std::vector<std::uint8_t>& visited,
           std::vector<std::size_t>& component) {
  component.clear();
  component.push_back(seed);
  visited[seed] = 1;
  for (std::size_t head = 0; head < component.size(); ++head) {
    const std::size_t i = component[head];
    const int x = static_cast<int>(i % w);
    const int y = static_cast<int>(i / w);
    const auto visit = [&](std::size_t j) {
      if (!visited[j] && bits[j] == value) {
        visited[j] = 1;
        component.push_back(j);
      }
    };
    if (x > 0) visit(i - 1);
    if (x + 1 < w) visit(i + 1);
    if (y > 0) visit(i - w);
    if (y + 1 < h) visit(i + w);
  }
}

}  // namespace

StoneMask remove_small_components(const StoneMask& mask, std::size_t min_px) {
  StoneMask out = mask;
  const auto bits = mask.bits();
  std::vector<std::uint8_t> visited(bits.size(), 0);
  std::vector<std::size_t> comp;
  auto ob = out.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 1 || visited[i]) continue;
    flood(bits, mask.width(), mask.height(), i, 1, visited, comp);
    if (comp.size() < min_px) {
      for (auto j : comp) ob[j] = 0;
    }
  }
  return out;
}

StoneMask fill_holes(const StoneMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  const auto bits = mask.bits();
  std::vector<std::uint8_t> visited(bits.size(), 0);
  std::vector<std::size_t> comp;
  const auto from_border = [&](int x, int y) {
    const std::size_t i = static_cast<std::size_t>(y) * w + x;
    if (bits[i] == 0 && !visited[i]) flood(bits, w, h, i, 0, visited, comp);
  };
  for (int x = 0; x < w; ++x) {
    from_border(x, 0);
    from_border(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    from_border(0, y);
    from_border(w - 1, y);
  }
  StoneMask out = mask;
  auto ob = out.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == 0 && !visited[i]) ob[i] = 1;
  }
  return out;
}

std::size_t count_components(const StoneMask& mask) {
  const auto bits = mask.bits();
  std::vector<std::uint8_t> visited(bits.size(), 0);
  std::vector<std::size_t> comp;
  std::size_t n = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == 1 && !visited[i]) {
      flood(bits, mask.width(), mask.height(), i, 1, visited, comp);
      ++n;
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// Chroma segmenter

namespace {

// Variance of uniform 8-bit quantization noise; keeps the covariance of a
// flat background invertible.
constexpr double kQuantizationVariance = 1.0 / 12.0;

bool invert(const Mat3& m, Mat3& inv) {
  const double a = m[0][0], b = m[0][1], c = m[0][2];
  const double d = m[1][0], e = m[1][1], f = m[1][2];
  const double g = m[2][0], h = m[2][1], i = m[2][2];
  const double A = e * i - f * h, B = -(d * i - f * g), C = d * h - e * g;
  const double det = a * A + b * B + c * C;
  if (!(std::abs(det) > 1e-12)) return false;
  const double s = 1.0 / det;
  inv = {{{A * s, -(b * i - c * h) * s, (b * f - c * e) * s},
          {B * s, (a * i - c * g) * s, -(a * f - c * d) * s},
          {C * s, -(a * h - b * g) * s, (a * e - b * d) * s}}};
  return true;
}

// Squared Mahalanobis distance of every pixel to the background model.
std::vector<double> mahalanobis_sq(const RgbImage& img, const Vec3& mean,
                                   const Mat3& inv) {
  std::vector<double> out(img.pixel_count());
  const auto bytes = img.bytes();
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double v0 = bytes[3 * p] - mean[0];
    const double v1 = bytes[3 * p + 1] - mean[1];
    const double v2 = bytes[3 * p + 2] - mean[2];
    out[p] = v0 * (inv[0][0] * v0 + inv[0][1] * v1 + inv[0][2] * v2) +
             v1 * (inv[1][0] * v0 + inv[1][1] * v1 + inv[1][2] * v2) +
             v2 * (inv[2][0] * v0 + inv[2][1] * v1 + inv[2][2] * v2);
  }
  return out;
}

StoneMask threshold_and_clean(const std::vector<double>& d2, int w, int h,
                              double tau, int min_component_px) {
  StoneMask raw(w, h);
  auto bits = raw.bits();
  const double t2 = tau * tau;
  for (std::size_t p = 0; p < d2.size(); ++p) bits[p] = d2[p] > t2 ? 1 : 0;
  return fill_holes(remove_small_components(
      raw, static_cast<std::size_t>(std::max(0, min_component_px))));
}

}  // namespace

ChromaSegmenter::ChromaSegmenter(const ChromaCalibration& cal) : cal_(cal) {
  if (!(cal.tau > 0.0)) {
    throw Error(ErrorCode::ParamOutOfRange, "chroma tau must be positive");
  }
  if (!invert(cal.background_cov, inv_cov_)) {
    throw Error(ErrorCode::ParamOutOfRange, "background covariance is singular");
  }
  calibrated_ = true;
}

StoneMask ChromaSegmenter::segment(const FrameGrid& frame) const {
  return segment_image(frame.image);
}

StoneMask ChromaSegmenter::segment_image(const RgbImage& image) const {
  if (!calibrated_) {
    throw Error(ErrorCode::NotCalibrated, "chroma segmenter used before calibration");
  }
  const auto d2 = mahalanobis_sq(image, cal_.background_mean, inv_cov_);
  return threshold_and_clean(d2, image.width(), image.height(), cal_.tau,
                             cal_.min_component_px);
}

ChromaCalibration calibrate_chroma(std::span<const LabeledStill> stills,
                                   std::span<const double> tau_grid,
                                   int min_component_px) {
  if (stills.empty() || tau_grid.empty()) {
    throw Error(ErrorCode::InvalidArgument, "calibration needs stills and a tau grid");
  }
  Vec3 sum{};
  std::array<std::array<double, 3>, 3> outer{};
  double n = 0.0;
  for (const auto& s : stills) {
    if (s.image->width() != s.mask->width() || s.image->height() != s.mask->height()) {
      throw Error(ErrorCode::DimensionMismatch, "calibration still/mask shape");
    }
    const auto bytes = s.image->bytes();
    const auto bits = s.mask->bits();
    for (std::size_t p = 0; p < bits.size(); ++p) {
      if (bits[p]) continue;
      const double v[3] = {double(bytes[3 * p]), double(bytes[3 * p + 1]),
                           double(bytes[3 * p + 2])};
      for (int i = 0; i < 3; ++i) {
        sum[i] += v[i];
        for (int j = 0; j < 3; ++j) outer[i][j] += v[i] * v[j];
      }
      n += 1.0;
    }
  }
  if (n < 2.0) {
    throw Error(ErrorCode::InvalidArgument, "calibration stills have no background");
  }
  ChromaCalibration cal;
  cal.min_component_px = min_component_px;
  for (int i = 0; i < 3; ++i) cal.background_mean[i] = sum[i] / n;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      cal.background_cov[i][j] =
          (outer[i][j] - n * cal.background_mean[i] * cal.background_mean[j]) /
          (n - 1.0);
    }
    cal.background_cov[i][i] += kQuantizationVariance;
  }
  Mat3 inv{};
  if (!invert(cal.background_cov, inv)) {
    throw Error(ErrorCode::InvalidArgument, "background covariance is singular");
  }

  std::vector<std::vector<double>> d2;
  d2.reserve(stills.size());
  for (const auto& s : stills) {
    d2.push_back(mahalanobis_sq(*s.image, cal.background_mean, inv));
  }
  double best_score = -1.0;
  for (double tau : tau_grid) {
    double total = 0.0;
    for (std::size_t k = 0; k < stills.size(); ++k) {
      const auto m = threshold_and_clean(d2[k], stills[k].image->width(),
                                         stills[k].image->height(), tau,
                                         min_component_px);
      total += dsc(m, *stills[k].mask);
    }
    const double mean = total / static_cast<double>(stills.size());
    if (mean > best_score) {
      best_score = mean;
      cal.tau = tau;
    }
  }
  return cal;
}

ChromaCalibration load_chroma_calibration(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotCalibrated, "cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    ChromaCalibration cal;
    cal.background_mean = j.at("background_mean").get<Vec3>();
    cal.background_cov = j.at("background_cov").get<Mat3>();
    cal.tau = j.at("tau").get<double>();
    cal.min_component_px = j.at("min_component_px").get<int>();
    return cal;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptManifest, path.string() + ": " + e.what());
  }
}

void save_chroma_calibration(const ChromaCalibration& cal, const fs::path& path) {
  nlohmann::ordered_json j;
  j["background_mean"] = cal.background_mean;
  j["background_cov"] = cal.background_cov;
  j["tau"] = cal.tau;
  j["min_component_px"] = cal.min_component_px;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace litho
