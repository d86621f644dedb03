#include "litho/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "litho/error.hpp"

namespace litho {

namespace fs = std::filesystem;

RgbImage apply_mask(const RgbImage& image, const StoneMask& mask) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw Error(ErrorCode::DimensionMismatch, "mask does not match frame");
  }
  RgbImage out = image;
  auto bytes = out.bytes();
  const auto bits = mask.bits();
  for (std::size_t p = 0; p < bits.size(); ++p) {
    if (!bits[p]) bytes[3 * p] = bytes[3 * p + 1] = bytes[3 * p + 2] = 0;
  }
  return out;
}

FrameGrid apply_mask(const FrameGrid& frame, const StoneMask& mask) {
  return FrameGrid{apply_mask(frame.image, mask), frame.stream_index, frame.timestamp};
}

FeatureVector stone_features(const RgbImage& image, const StoneMask& mask) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw Error(ErrorCode::DimensionMismatch, "mask does not match frame");
  }
  const int w = image.width();
  const int h = image.height();
  const auto bytes = image.bytes();
  const auto bits = mask.bits();

  // Gray levels of the masked frame; pixels outside the mask read as 0.
  std::vector<float> gray(bits.size());
  for (std::size_t p = 0; p < bits.size(); ++p) {
    gray[p] = bits[p] ? (bytes[3 * p] + bytes[3 * p + 1] + bytes[3 * p + 2]) / 3.0f
                      : 0.0f;
  }

  std::array<std::uint32_t, kColorBins> color{};
  std::array<std::uint32_t, kGradientBins> grad{};
  std::uint32_t n = 0;
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      if (!bits[p]) continue;
      ++n;
      const std::size_t bin = (bytes[3 * p] >> 5) * 64 + (bytes[3 * p + 1] >> 5) * 8 +
                              (bytes[3 * p + 2] >> 5);
      ++color[bin];
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const float gx = 0.5f * (gray[static_cast<std::size_t>(y) * w + xp] -
                               gray[static_cast<std::size_t>(y) * w + xm]);
      const float gy = 0.5f * (gray[static_cast<std::size_t>(yp) * w + x] -
                               gray[static_cast<std::size_t>(ym) * w + x]);
      const double mag = std::sqrt(double(gx) * gx + double(gy) * gy);
      const auto gbin = static_cast<std::size_t>(std::min(
          static_cast<double>(kGradientBins - 1), std::floor(mag / kGradientBinWidth)));
      ++grad[gbin];
    }
  }
  if (n == 0) throw Error(ErrorCode::EmptyMask, "feature extraction on an empty mask");

  FeatureVector f{};
  const double scale = 0.5 / n;
  for (std::size_t i = 0; i < kColorBins; ++i) f[i] = color[i] * scale;
  for (std::size_t i = 0; i < kGradientBins; ++i) f[kColorBins + i] = grad[i] * scale;
  return f;
}

double l1_distance(const FeatureVector& a, const FeatureVector& b) noexcept {
  double d = 0.0;
  for (std::size_t i = 0; i < kFeatureSize; ++i) d += std::abs(a[i] - b[i]);
  return d;
}

ScoreMap softmin(const std::array<double, kNumClasses>& distances, double beta) {
  if (!(beta >= 0.0)) throw Error(ErrorCode::ParamOutOfRange, "beta must be >= 0");
  const double dmin = *std::min_element(distances.begin(), distances.end());
  ScoreMap s{};
  double total = 0.0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    s[i] = std::exp(-beta * (distances[i] - dmin));
    total += s[i];
  }
  for (auto& v : s) v /= total;
  return s;
}

// ---------------------------------------------------------------------------

CentroidModel::CentroidModel(std::array<FeatureVector, kNumClasses> centroids,
                             double beta)
    : centroids_(centroids), beta_(beta), trained_(true) {
  if (!(beta >= 0.0)) throw Error(ErrorCode::ParamOutOfRange, "beta must be >= 0");
}

std::array<double, kNumClasses> CentroidModel::distances(const FeatureVector& f) const {
  std::array<double, kNumClasses> d{};
  for (std::size_t c = 0; c < kNumClasses; ++c) d[c] = l1_distance(f, centroids_[c]);
  return d;
}

ScoreMap CentroidModel::predict_image(const RgbImage& image, const StoneMask& mask) const {
  if (!trained_) throw Error(ErrorCode::NotTrained, "centroid model is not trained");
  return softmin(distances(stone_features(image, mask)), beta_);
}

ScoreMap CentroidModel::predict(const FrameGrid& frame, const StoneMask& mask) const {
  return predict_image(frame.image, mask);
}

CentroidModel train_centroid(std::span<const TrainingSample> samples, double beta) {
  std::array<std::vector<FeatureVector>, kNumClasses> per_class;
  for (const auto& s : samples) {
    if (s.mask->count() == 0) {
      throw Error(ErrorCode::EmptyMaskSample,
                  "training sample of class " + std::string(to_string(s.label)) +
                      " has an empty mask");
    }
    per_class[index_of(s.label)].push_back(stone_features(*s.image, *s.mask));
  }
  std::array<FeatureVector, kNumClasses> centroids{};
  for (auto c : kAllClasses) {
    auto& feats = per_class[index_of(c)];
    if (feats.empty()) {
      throw Error(ErrorCode::MissingClass,
                  "no training sample for class " + std::string(to_string(c)));
    }
    // Fixed summation order makes the result independent of sample order.
    std::sort(feats.begin(), feats.end());
    auto& centroid = centroids[index_of(c)];
    for (const auto& f : feats) {
      for (std::size_t i = 0; i < kFeatureSize; ++i) centroid[i] += f[i];
    }
    for (auto& v : centroid) v /= static_cast<double>(feats.size());
  }
  return CentroidModel(centroids, beta);
}

void save_model(const CentroidModel& model, const fs::path& path) {
  if (!model.trained()) throw Error(ErrorCode::NotTrained, "saving an untrained model");
  nlohmann::ordered_json j;
  j["beta"] = model.beta();
  nlohmann::ordered_json cents;
  for (auto c : kAllClasses) cents[std::string(to_string(c))] = model.centroid(c);
  j["centroids"] = std::move(cents);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump() << '\n';
}

CentroidModel load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotTrained, "cannot open model " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    std::array<FeatureVector, kNumClasses> cents{};
    const auto& jc = j.at("centroids");
    for (auto c : kAllClasses) {
      const auto key = std::string(to_string(c));
      if (!jc.contains(key)) {
        throw Error(ErrorCode::MissingClass, "model lacks class " + key);
      }
      cents[index_of(c)] = jc.at(key).get<FeatureVector>();
    }
    return CentroidModel(cents, j.at("beta").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptManifest, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Score CSV

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r' && ch != ' ') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(v);
}

}  // namespace

ScoreTable parse_scores(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedRow, "missing header");
  const auto header = split_csv(line);
  if (header.size() != kNumClasses + 1 || header[0] != "frame") {
    throw Error(ErrorCode::MalformedRow, "header must be frame + five classes");
  }
  std::array<std::size_t, kNumClasses> column_class{};
  std::array<bool, kNumClasses> seen{};
  for (std::size_t i = 1; i < header.size(); ++i) {
    const auto c = parse_morph_class(header[i]);
    if (!c) throw Error(ErrorCode::UnknownClass, "unknown class column '" + header[i] + "'");
    if (seen[index_of(*c)]) {
      throw Error(ErrorCode::MalformedRow, "duplicate class column '" + header[i] + "'");
    }
    seen[index_of(*c)] = true;
    column_class[i - 1] = index_of(*c);
  }

  ScoreTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    const auto where = " (line " + std::to_string(line_no) + ")";
    if (fields.size() != kNumClasses + 1) {
      throw Error(ErrorCode::MalformedRow, "expected 6 fields" + where);
    }
    char* end = nullptr;
    const long long frame = std::strtoll(fields[0].c_str(), &end, 10);
    if (fields[0].empty() || end != fields[0].c_str() + fields[0].size() || frame < 0) {
      throw Error(ErrorCode::MalformedRow, "bad frame index '" + fields[0] + "'" + where);
    }
    ScoreMap scores{};
    double sum = 0.0;
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      double v = 0.0;
      if (!parse_double(fields[i + 1], v) || v < 0.0 || v > 1.0) {
        throw Error(ErrorCode::MalformedRow, "bad score '" + fields[i + 1] + "'" + where);
      }
      scores[column_class[i]] = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > kImportSumTolerance) {
      throw Error(ErrorCode::ScoreSumViolation,
                  "frame " + std::to_string(frame) + " scores sum to " +
                      std::to_string(sum) + where);
    }
    if (!table.emplace(frame, scores).second) {
      throw Error(ErrorCode::MalformedRow, "duplicate frame " + std::to_string(frame) + where);
    }
  }
  return table;
}

ScoreTable import_scores(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_scores(in);
}

void write_scores(std::ostream& out, const ScoreTable& table) {
  out << "frame";
  for (auto c : kAllClasses) out << ',' << to_string(c);
  out << '\n';
  char buf[32];
  for (const auto& [frame, scores] : table) {
    out << frame;
    for (double s : scores) {
      std::snprintf(buf, sizeof buf, "%.17g", s);
      out << ',' << buf;
    }
    out << '\n';
  }
}

void export_scores(const fs::path& path, const ScoreTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_scores(out, table);
}

ScoreMap ImportedScoreClassifier::predict(const FrameGrid& frame,
                                          const StoneMask& /*mask*/) const {
  const auto it = table_.find(frame.stream_index);
  if (it == table_.end()) {
    throw Error(ErrorCode::MalformedRow,
                "no imported scores for frame " + std::to_string(frame.stream_index));
  }
  // Rows are accepted within 1e-6 of unit sum; records demand 1e-9, so
  // visibly off rows are renormalized and exact ones pass through untouched.
  ScoreMap s = it->second;
  double sum = 0.0;
  for (double v : s) sum += v;
  if (std::abs(sum - 1.0) > 1e-12) {
    for (auto& v : s) v /= sum;
  }
  return s;
}

}  // namespace litho
