#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <limits>

#include "litho/error.hpp"
#include "litho/phantom.hpp"

using namespace litho;

namespace {

// Index of the palette whose chromaticity (r, g, b) / (r + g + b) is closest
// to the pixel's. Shading is multiplicative, so chromaticity is stable.
std::size_t nearest_palette(Rgb px, const std::vector<Palette>& palettes) {
  const double s = px[0] + px[1] + px[2] + 1e-9;
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < palettes.size(); ++i) {
    const auto& b = palettes[i].base;
    const double bs = b[0] + b[1] + b[2];
    double d = 0;
    for (int c = 0; c < 3; ++c) {
      const double diff = px[c] / s - b[c] / bs;
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Counts of truth-mask pixels nearest to each palette.
std::vector<std::size_t> palette_census(const PhantomFrame& f, const std::vector<Palette>& palettes) {
  std::vector<std::size_t> counts(palettes.size(), 0);
  for (int y = 0; y < f.truth.height(); ++y) {
    for (int x = 0; x < f.truth.width(); ++x) {
      if (f.truth.at(x, y)) ++counts[nearest_palette(f.image.at(x, y), palettes)];
    }
  }
  return counts;
}

PhantomSpec exam_frag_spec(MorphClass label, bool fragment) {
  PhantomSpec s = make_spec(77, label, 10.0);
  s.noise_sigma = 0.0;
  if (fragment) {
    s.events = {{EventKind::SurfaceExam, 0.0, 5.0, 1.0},
                {EventKind::Fragmentation, 5.0, 6.0, 1.0},
                {EventKind::SurfaceExam, 5.0, 10.0, 1.0}};
  } else {
    s.events = {{EventKind::SurfaceExam, 0.0, 10.0, 1.0}};
  }
  return s;
}

}  // namespace

TEST(Phantom, SameSpecTwiceIsBitIdentical) {
  const auto spec = default_event_mix(5, MorphClass::IaIIIb);
  const auto a = generate_phantom(spec);
  const auto b = generate_phantom(spec);
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.truth_masks, b.truth_masks);
  EXPECT_EQ(a.truth_label, MorphClass::IaIIIb);
}

TEST(Phantom, RenderFrameIsPureInSpecAndIndex) {
  const auto spec = adversarial_spec(3, MorphClass::IIb);
  const auto v = generate_phantom(spec);
  for (std::size_t k : {v.frames.size() - 1, std::size_t{0}, v.frames.size() / 2}) {
    const auto f = render_frame(spec, k);
    EXPECT_EQ(f.image, v.frames[k]);
    EXPECT_EQ(f.truth, v.truth_masks[k]);
  }
}

TEST(Phantom, FrameCountOnTheStreamGrid) {
  auto s = make_spec(1, MorphClass::Ia, 10.0);
  EXPECT_EQ(phantom_frame_count(s), 80u);
  s.duration_s = 10.01;
  EXPECT_EQ(phantom_frame_count(s), 81u);
  s.duration_s = 0.1;
  EXPECT_EQ(phantom_frame_count(s), 1u);
}

TEST(Phantom, StoneFreeThroughoutGivesEmptyMasks) {
  auto s = make_spec(9, MorphClass::IIIb, 4.0);
  s.events = {{EventKind::StoneFree, 0.0, 4.0, 1.0}};
  const auto v = generate_phantom(s);
  ASSERT_EQ(v.truth_masks.size(), 32u);
  for (const auto& m : v.truth_masks) {
    EXPECT_EQ(m.count(), 0u);
    EXPECT_EQ(m.coverage(), 0.0);
  }
}

TEST(Phantom, MixedShellOnlyBeforeFragmentationBothAfter) {
  const auto spec = exam_frag_spec(MorphClass::IaIIb, true);
  const auto& pal = spec.stone_palettes;
  ASSERT_EQ(pal.size(), 2u);
  for (std::size_t k = 0; k < phantom_frame_count(spec); ++k) {
    const auto f = render_frame(spec, k);
    const auto census = palette_census(f, pal);
    ASSERT_GT(census[0] + census[1], 0u) << "frame " << k;
    if (k < 40) {
      EXPECT_EQ(census[1], 0u) << "core visible before fragmentation, frame " << k;
    } else {
      EXPECT_GT(census[0], 0u) << "no shell after fragmentation, frame " << k;
      EXPECT_GT(census[1], 0u) << "no core after fragmentation, frame " << k;
    }
  }
}

TEST(Phantom, PureLabelsUseOnePalette) {
  const std::vector<Palette> pures{stone_palette(MorphClass::Ia), stone_palette(MorphClass::IIb),
                                   stone_palette(MorphClass::IIIb)};
  for (MorphClass c : {MorphClass::Ia, MorphClass::IIb, MorphClass::IIIb}) {
    const auto spec = exam_frag_spec(c, true);
    for (std::size_t k = 0; k < phantom_frame_count(spec); k += 3) {
      const auto census = palette_census(render_frame(spec, k), pures);
      for (std::size_t i = 0; i < 3; ++i) {
        if (i != index_of(c)) EXPECT_EQ(census[i], 0u) << to_string(c) << " frame " << k;
      }
    }
  }
}

TEST(Phantom, MixedShowsBothPalettesIffFragmented) {
  for (MorphClass c : {MorphClass::IaIIb, MorphClass::IaIIIb}) {
    for (bool frag : {false, true}) {
      const auto spec = exam_frag_spec(c, frag);
      std::size_t core = 0, shell = 0;
      for (std::size_t k = 0; k < phantom_frame_count(spec); k += 2) {
        const auto census = palette_census(render_frame(spec, k), spec.stone_palettes);
        shell += census[0];
        core += census[1];
      }
      EXPECT_GT(shell, 0u);
      EXPECT_EQ(core > 0, frag) << to_string(c);
    }
  }
}

TEST(Phantom, TruthMaskMatchesSentinelRendering) {
  for (MorphClass c : kAllClasses) {
    auto spec = clean_spec(31 + index_of(c), c);
    spec.noise_sigma = 0.0;
    for (auto& p : spec.stone_palettes) p = Palette{{0, 255, 0}};
    spec.background = Palette{{200, 40, 40}};
    for (std::size_t k = 0; k < phantom_frame_count(spec); k += 5) {
      const auto f = render_frame(spec, k);
      for (int y = 0; y < 256; ++y) {
        for (int x = 0; x < 256; ++x) {
          const Rgb px = f.image.at(x, y);
          const bool sentinel = px[0] == 0 && px[2] == 0 && px[1] > 0;
          ASSERT_EQ(sentinel, f.truth.at(x, y)) << to_string(c) << " frame " << k << " at " << x
                                                << "," << y;
        }
      }
    }
  }
}

TEST(Phantom, FragmentationNeverGrowsTheStone) {
  for (MorphClass c : kAllClasses) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto spec = clean_spec(100 + seed, c);
      const EventScript* frag = nullptr;
      for (const auto& e : spec.events) {
        if (e.kind == EventKind::Fragmentation) frag = &e;
      }
      ASSERT_NE(frag, nullptr);
      const auto k0 = static_cast<std::size_t>(std::floor(frag->t_start * 8.0));
      const auto k1 = static_cast<std::size_t>(std::ceil(frag->t_end * 8.0));
      std::size_t prev = render_frame(spec, k0 == 0 ? 0 : k0 - 1).truth.count();
      for (std::size_t k = k0; k <= k1 && k < phantom_frame_count(spec); ++k) {
        const std::size_t cur = render_frame(spec, k).truth.count();
        EXPECT_LE(static_cast<double>(cur), 1.02 * static_cast<double>(prev))
            << to_string(c) << " seed " << seed << " frame " << k;
        prev = cur;
      }
    }
  }
}

TEST(Phantom, MaterialsMatchTruth) {
  const auto spec = clean_spec(4, MorphClass::IaIIIb);
  const auto f = render_frame(spec, phantom_frame_count(spec) - 1);
  bool core = false;
  for (std::size_t i = 0; i < f.material.size(); ++i) {
    const bool stone = f.material[i] == Material::Shell || f.material[i] == Material::Core;
    EXPECT_EQ(stone, f.truth.bits()[i] != 0);
    core = core || f.material[i] == Material::Core;
  }
  EXPECT_TRUE(core);
}

TEST(EventMix, FrequenciesOverTenThousandSeeds) {
  constexpr int n = 10000;
  int frag = 0, stone_free = 0, exam_first = 0;
  for (int s = 0; s < n; ++s) {
    const auto spec = default_event_mix(static_cast<std::uint64_t>(s), kAllClasses[s % 5]);
    ASSERT_NO_THROW(validate(spec));
    bool f = false, sf = false, ex = false;
    for (const auto& e : spec.events) {
      f = f || e.kind == EventKind::Fragmentation;
      sf = sf || e.kind == EventKind::StoneFree;
      ex = ex || (e.kind == EventKind::SurfaceExam && e.t_start == 0.0);
    }
    frag += f;
    stone_free += sf;
    exam_first += ex;
  }
  EXPECT_NEAR(frag / double(n), 0.47, 0.02);
  EXPECT_NEAR(stone_free / double(n), 0.34, 0.02);
  EXPECT_NEAR(exam_first / double(n), 0.64, 0.02);
}

TEST(EventMix, DeterministicInSeed) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    EXPECT_EQ(default_event_mix(s, MorphClass::IIb), default_event_mix(s, MorphClass::IIb));
  }
}

TEST(Specs, CleanAndAdversarialAreValid) {
  for (MorphClass c : kAllClasses) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto clean = clean_spec(s, c);
      const auto adv = adversarial_spec(s, c);
      EXPECT_NO_THROW(validate(clean));
      EXPECT_NO_THROW(validate(adv));
      auto has = [](const PhantomSpec& sp, EventKind k) {
        for (const auto& e : sp.events) {
          if (e.kind == k) return true;
        }
        return false;
      };
      EXPECT_TRUE(has(clean, EventKind::Fragmentation));
      EXPECT_FALSE(has(clean, EventKind::StoneFree));
      EXPECT_TRUE(has(adv, EventKind::StoneFree));
      EXPECT_TRUE(has(adv, EventKind::Jitter));
      EXPECT_TRUE(has(adv, EventKind::InstrumentOcclusion));
      EXPECT_GT(adv.duration_s, clean.duration_s);
    }
  }
}

TEST(Specs, InvalidSpecsAreRejected) {
  auto expect_invalid = [](const PhantomSpec& s, const char* what) {
    try {
      validate(s);
      ADD_FAILURE() << "accepted: " << what;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidSpec) << what;
    }
  };
  const auto base = make_spec(1, MorphClass::IaIIb, 10.0);
  EXPECT_NO_THROW(validate(base));

  auto s = base;
  s.duration_s = 0.0;
  expect_invalid(s, "zero duration");
  s = base;
  s.events = {{EventKind::SurfaceExam, 2.0, 2.0, 1.0}};
  expect_invalid(s, "empty interval");
  s = base;
  s.events = {{EventKind::SurfaceExam, 5.0, 11.0, 1.0}};
  expect_invalid(s, "outside the video");
  s = base;
  s.events = {{EventKind::Jitter, 1.0, 2.0, 1.5}};
  expect_invalid(s, "intensity");
  s = base;
  s.events = {{EventKind::Fragmentation, 1.0, 2.0, 1.0}, {EventKind::Fragmentation, 3.0, 4.0, 1.0}};
  expect_invalid(s, "two fragmentations");
  s = base;
  s.events = {{EventKind::SurfaceExam, 0.0, 6.0, 1.0}, {EventKind::StoneFree, 5.0, 10.0, 1.0}};
  expect_invalid(s, "stone-free overlapping exam");
  s = base;
  s.stone_palettes.pop_back();
  expect_invalid(s, "palette count");
  s = base;
  s.noise_sigma = -1.0;
  expect_invalid(s, "noise");
}

TEST(Specs, JsonRoundTrip) {
  for (auto kind : {CohortKind::Clean, CohortKind::Adversarial, CohortKind::EventMix}) {
    for (const auto& e : cohort_specs(kind, 2, 42)) {
      EXPECT_EQ(spec_from_json(spec_to_json(e.spec)), e.spec) << e.video_id;
    }
  }
  EXPECT_THROW(spec_from_json("{\"seed\": 1}"), Error);
}

TEST(Cohort, CountsIdsAndDeterminism) {
  const auto a = cohort_specs(CohortKind::Clean, 3, 7);
  ASSERT_EQ(a.size(), 15u);
  EXPECT_EQ(a.front().video_id, "Ia_000");
  EXPECT_EQ(a.back().video_id, "IaIIIb_002");
  for (MorphClass c : kAllClasses) {
    EXPECT_EQ(std::count_if(a.begin(), a.end(), [&](const auto& e) { return e.spec.label == c; }),
              3);
  }
  const auto b = cohort_specs(CohortKind::Clean, 3, 7);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].spec, b[i].spec);
  EXPECT_TRUE(cohort_specs(CohortKind::Adversarial, 0, 7).empty());
  EXPECT_EQ(parse_cohort_kind("event-mix"), CohortKind::EventMix);
}

TEST(Stills, LabeledAndNonEmpty) {
  for (MorphClass c : kAllClasses) {
    const auto stills = training_stills(3, c, 6);
    ASSERT_EQ(stills.size(), 6u);
    for (const auto& s : stills) {
      EXPECT_EQ(s.label, c);
      EXPECT_GT(s.mask.coverage(), 0.10);
    }
  }
}

TEST(Palettes, MixedClassHasNoOwnPalette) {
  EXPECT_THROW(stone_palette(MorphClass::IaIIb), Error);
  EXPECT_NE(stone_palette(MorphClass::Ia), stone_palette(MorphClass::IIb));
}
