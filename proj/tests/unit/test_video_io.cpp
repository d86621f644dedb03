#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "litho/error.hpp"
#include "litho/phantom.hpp"
#include "litho/pnm.hpp"
#include "litho/video_io.hpp"

using namespace litho;
using litho::testing::TempDir;

namespace {

// Nearest timestamp by exhaustive search in integer arithmetic:
// |i/nf - k/tf| compares as |i*tf - k*nf|.
std::size_t brute_nearest(std::size_t k, long nf, long tf, std::size_t n) {
  std::size_t best = 0;
  long best_d = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const long d = std::labs(static_cast<long>(i) * tf - static_cast<long>(k) * nf);
    if (best_d < 0 || d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

RawVideo gradient_video(int n, double fps) {
  RawVideo v;
  v.video_id = "g";
  v.native_fps = fps;
  for (int i = 0; i < n; ++i) {
    RgbImage img(20, 16);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 20; ++x) {
        img.set(x, y, {static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(x * 10),
                       static_cast<std::uint8_t>(y * 10)});
      }
    }
    v.frames.push_back(img);
  }
  return v;
}

}  // namespace

TEST(Resample, TwentyFourFpsSelectsEveryThirdFrame) {
  const auto v = resample_temporal(gradient_video(72, 24.0));
  ASSERT_EQ(v.frames.size(), 24u);
  for (std::size_t k = 0; k < 24; ++k) EXPECT_EQ(v.frames[k].at(0, 0)[0], 3 * k);
  EXPECT_EQ(v.native_fps, 8.0);
}

TEST(Resample, EightFpsIsIdentity) {
  const auto in = gradient_video(13, 8.0);
  const auto out = resample_temporal(in);
  EXPECT_EQ(out.frames, in.frames);
}

TEST(Resample, ThirtyFpsIndicesMatchExhaustiveSearch) {
  // k = 2 and k = 6 sit exactly between two source frames; the earlier wins.
  const std::vector<std::size_t> expected{0, 4, 7, 11, 15, 19, 22, 26};
  ASSERT_EQ(resampled_frame_count(30, 30.0, 8.0), 8u);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_EQ(nearest_source_index(k, 30.0, 8.0, 30), expected[k]);
    EXPECT_EQ(brute_nearest(k, 30, 8, 30), expected[k]);
  }
}

TEST(Resample, AgreesWithExhaustiveSearchOverRates) {
  for (long nf : {5L, 6L, 8L, 10L, 12L, 15L, 24L, 25L, 30L, 50L, 60L}) {
    for (std::size_t n : {1u, 2u, 7u, 31u, 100u}) {
      const std::size_t m = resampled_frame_count(n, static_cast<double>(nf), 8.0);
      // Every k/8 before the end of the input, and nothing more.
      EXPECT_LT(static_cast<double>(m - 1) / 8.0, static_cast<double>(n) / nf);
      EXPECT_GE(static_cast<double>(m) / 8.0, static_cast<double>(n) / nf);
      for (std::size_t k = 0; k < m; ++k) {
        EXPECT_EQ(nearest_source_index(k, static_cast<double>(nf), 8.0, n),
                  brute_nearest(k, nf, 8, n))
            << "nf=" << nf << " n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Resample, MasksFollowFrames) {
  auto v = gradient_video(30, 30.0);
  for (int i = 0; i < 30; ++i) v.truth_masks.push_back(litho::testing::prefix_mask(20, 16, i));
  const auto out = resample_temporal(v);
  for (std::size_t k = 0; k < out.frames.size(); ++k) {
    EXPECT_EQ(out.truth_masks[k].count(), out.frames[k].at(0, 0)[0]);
  }
}

TEST(Resample, EmptyVideoThrows) {
  RawVideo v;
  try {
    resample_temporal(v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyVideo);
  }
}

TEST(Normalize, IdentityAt256) {
  std::mt19937_64 rng(5);
  const auto img = litho::testing::random_image(rng, 256, 256);
  EXPECT_EQ(normalize_image(img), img);
}

TEST(Normalize, ConstantStaysConstant) {
  const RgbImage img(512, 512, {17, 200, 99});
  const auto out = normalize_image(img);
  ASSERT_EQ(out.width(), 256);
  EXPECT_EQ(out, RgbImage(256, 256, {17, 200, 99}));
}

TEST(Normalize, CentredSquareCrop) {
  // 640x480: only the columns [80, 560) survive. Paint the outside red.
  RgbImage img(640, 480, {255, 0, 0});
  for (int y = 0; y < 480; ++y) {
    for (int x = 80; x < 560; ++x) img.set(x, y, {0, 0, 255});
  }
  const auto out = normalize_image(img);
  ASSERT_EQ(out.width(), 256);
  ASSERT_EQ(out.height(), 256);
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 256; ++x) EXPECT_EQ(out.at(x, y), (Rgb{0, 0, 255}));
  }
  StoneMask m(640, 480);
  for (int y = 0; y < 480; ++y) {
    for (int x = 80; x < 560; ++x) m.set(x, y, true);
  }
  EXPECT_EQ(normalize_mask(m).count(), 256u * 256u);
}

TEST(Normalize, TooSmallThrows) {
  try {
    normalize_image(RgbImage(15, 300));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooSmall);
  }
}

TEST(Normalize, VideoOnTheStreamGrid) {
  auto v = gradient_video(24, 24.0);
  const auto n = normalize_video(v);
  ASSERT_EQ(n.frames.size(), 8u);
  for (std::size_t k = 0; k < n.frames.size(); ++k) {
    EXPECT_EQ(n.frames[k].stream_index, static_cast<std::int64_t>(k));
    EXPECT_NEAR(n.frames[k].timestamp, k / 8.0, 1e-9);
    EXPECT_EQ(n.frames[k].width(), 256);
    EXPECT_EQ(n.frames[k].height(), 256);
  }
}

TEST(Pnm, RoundTrip) {
  TempDir dir("pnm");
  std::mt19937_64 rng(9);
  const auto img = litho::testing::random_image(rng, 31, 7);
  pnm::write_ppm(dir.path() / "a.ppm", img);
  EXPECT_EQ(pnm::read_ppm(dir.path() / "a.ppm"), img);
  const auto m = litho::testing::random_mask(rng, 31, 7, 0.4);
  pnm::write_mask_pgm(dir.path() / "a.pgm", m);
  EXPECT_EQ(pnm::read_mask_pgm(dir.path() / "a.pgm"), m);
}

TEST(Pnm, TruncatedRasterIsCorrupt) {
  TempDir dir("pnm_trunc");
  std::ofstream(dir.path() / "bad.ppm", std::ios::binary) << "P6\n4 4\n255\nabc";
  try {
    pnm::read_ppm(dir.path() / "bad.ppm");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptManifest);
  }
}

TEST(Stream, PhantomRoundTripIsBitIdentical) {
  TempDir dir("stream");
  auto spec = clean_spec(21, MorphClass::IaIIIb);
  spec.duration_s = 2.0;
  spec.events = {{EventKind::SurfaceExam, 0.0, 1.0, 1.0}, {EventKind::Fragmentation, 1.0, 2.0, 1.0}};
  auto v = generate_phantom(spec);
  v.video_id = "p";
  store_stream(v, dir.path());
  const auto back = load_stream(dir.path() / "manifest.json");
  EXPECT_EQ(back.video_id, "p");
  EXPECT_EQ(back.native_fps, 8.0);
  EXPECT_EQ(back.frames, v.frames);
  EXPECT_EQ(back.truth_masks, v.truth_masks);
  EXPECT_EQ(back.truth_label, MorphClass::IaIIIb);
}

TEST(Stream, PerFrameLabelsRoundTrip) {
  TempDir dir("labels");
  auto v = gradient_video(3, 8.0);
  v.frame_labels = {MorphClass::Ia, MorphClass::IIb, MorphClass::Ia};
  store_stream(v, dir.path());
  const auto back = load_stream(dir.path() / "manifest.json");
  EXPECT_EQ(back.frame_labels, v.frame_labels);
  EXPECT_FALSE(back.truth_label.has_value());
}

TEST(Stream, MissingFrameFile) {
  TempDir dir("missing");
  store_stream(gradient_video(3, 8.0), dir.path());
  std::filesystem::remove(dir.path() / frame_file_name(1));
  try {
    load_stream(dir.path() / "manifest.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFrame);
  }
}

TEST(Stream, UnequalFrameSizes) {
  TempDir dir("sizes");
  store_stream(gradient_video(3, 8.0), dir.path());
  pnm::write_ppm(dir.path() / frame_file_name(2), RgbImage(21, 16));
  try {
    load_stream(dir.path() / "manifest.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Stream, MalformedManifest) {
  TempDir dir("malformed");
  std::ofstream(dir.path() / "manifest.json") << "{\"video_id\": 3";
  EXPECT_THROW(load_stream(dir.path() / "manifest.json"), Error);
  std::ofstream(dir.path() / "manifest.json", std::ios::trunc)
      << R"({"video_id":"x","native_fps":8,"frame_count":2,"frames":[{"file":"frame_000000.ppm"}]})";
  try {
    load_stream(dir.path() / "manifest.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptManifest);
  }
}
