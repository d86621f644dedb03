#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "litho/classify.hpp"
#include "litho/image.hpp"
#include "litho/phantom.hpp"

namespace litho::testing {

inline StoneMask random_mask(std::mt19937_64& rng, int w, int h, double p) {
  std::bernoulli_distribution bit(p);
  StoneMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, bit(rng));
  }
  return m;
}

inline StoneMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  StoneMask m(w, h);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) m.set(x, y, true);
  }
  return m;
}

/// Mask of the first `n` pixels in row-major order.
inline StoneMask prefix_mask(int w, int h, std::size_t n) {
  StoneMask m(w, h);
  for (std::size_t i = 0; i < n; ++i) m.bits()[i] = 1;
  return m;
}

inline RgbImage random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> v(0, 255);
  RgbImage img(w, h);
  for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(v(rng));
  return img;
}

/// 50 stills per class from seed 1000, trained once per process.
inline const CentroidModel& reference_model() {
  static const CentroidModel model = [] {
    std::vector<LabeledFrame> stills;
    for (MorphClass c : kAllClasses) {
      auto s = training_stills(1000, c, 50);
      for (auto& f : s) stills.push_back(std::move(f));
    }
    std::vector<TrainingSample> samples;
    for (const auto& f : stills) samples.push_back({&f.image, &f.mask, f.label});
    return train_centroid(samples);
  }();
  return model;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("litho_test_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace litho::testing
