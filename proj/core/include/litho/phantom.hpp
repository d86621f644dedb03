#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "litho/image.hpp"
#include "litho/morph_class.hpp"
#include "litho/video_io.hpp"

namespace litho {

/// Intra-operative events a phantom video can script.
enum class EventKind : std::uint8_t {
  SurfaceExam,
  Fragmentation,
  StoneFree,
  InstrumentOcclusion,
  FlyingParticles,
  Jitter,
  SpecularGlare,
  BrightnessDrift,
};

std::string_view to_string(EventKind k) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view s) noexcept;

struct EventScript {
  EventKind kind = EventKind::SurfaceExam;
  double t_start = 0.0;
  double t_end = 0.0;
  double intensity = 1.0;

  bool active(double t) const noexcept { return t >= t_start && t < t_end; }
  friend bool operator==(const EventScript&, const EventScript&) = default;
};

/// Colour signature of a surface: base colour, low-frequency shading and
/// high-frequency speckle.
struct Palette {
  Rgb base{};
  double shading_amplitude = 0.0;
  double shading_period_px = 16.0;
  double speckle_amplitude = 0.0;
  double speckle_cell_px = 3.0;

  friend bool operator==(const Palette&, const Palette&) = default;
};

/// Default signature of a pure morphology.
Palette stone_palette(MorphClass pure);
Palette background_palette();

struct PhantomSpec {
  std::uint64_t seed = 0;
  MorphClass label = MorphClass::Ia;
  double duration_s = 10.0;
  std::vector<EventScript> events;
  Palette background;
  /// One palette for pure labels; shell then core for mixed labels.
  std::vector<Palette> stone_palettes;
  /// Standard deviation of per-channel sensor noise, in gray levels.
  double noise_sigma = 2.0;

  friend bool operator==(const PhantomSpec&, const PhantomSpec&) = default;
};

/// Spec with the default palettes of `label` and no events.
PhantomSpec make_spec(std::uint64_t seed, MorphClass label, double duration_s);

/// Throws InvalidSpec: non-positive duration, events outside the video,
/// empty intervals, intensity outside [0,1], StoneFree overlapping
/// SurfaceExam or Fragmentation, more than one Fragmentation, or a palette
/// count that does not match the label.
void validate(const PhantomSpec& spec);

/// Number of 8 Hz frames: all k with k / 8 < duration.
std::size_t phantom_frame_count(const PhantomSpec& spec);

enum class Material : std::uint8_t { Background, Shell, Core, Instrument, Particle };

struct PhantomFrame {
  RgbImage image;
  StoneMask truth;
  /// Per-pixel Material, row-major.
  std::vector<Material> material;
};

/// Renders frame `k` of the spec. Pure in (spec, k).
PhantomFrame render_frame(const PhantomSpec& spec, std::size_t k);

/// 8 Hz video with truth masks and label; video_id is left to the caller.
RawVideo generate_phantom(const PhantomSpec& spec);

/// Time after the end of the fragmentation at which the view alternates
/// between an overview of the fragments and a close-up of the exposed core.
inline constexpr double kViewSwitchPeriodS = 1.5;

/// Samples event presence with fixed frequencies: exam before fragmentation
/// 64 %, fragmentation 47 %, stone-free prospection 34 %, clamp 10 %, fragment
/// removal 6 %, urine 4 %, blood 1 %. Clamp and removal script an
/// InstrumentOcclusion, urine FlyingParticles and blood a BrightnessDrift.
PhantomSpec default_event_mix(std::uint64_t seed, MorphClass label);

/// Undisturbed examination: intact surface, fragmentation, then the
/// fragments. Mixed labels reveal their core after fragmentation.
PhantomSpec clean_spec(std::uint64_t seed, MorphClass label);

/// Clean stone phase disturbed by jitter, laser dust and an instrument,
/// followed by a stone-free prospection longer than the stone phase.
PhantomSpec adversarial_spec(std::uint64_t seed, MorphClass label);

enum class CohortKind : std::uint8_t { Clean, Adversarial, EventMix };
std::string_view to_string(CohortKind k) noexcept;
std::optional<CohortKind> parse_cohort_kind(std::string_view s) noexcept;

struct CohortEntry {
  std::string video_id;
  PhantomSpec spec;
};

/// `n_per_class` specs per class, deterministic in `seed`.
std::vector<CohortEntry> cohort_specs(CohortKind kind, std::size_t n_per_class,
                                      std::uint64_t seed);

struct LabeledFrame {
  RgbImage image;
  StoneMask mask;
  MorphClass label;
};

/// High-quality stills for model fitting: clean frames of the class, and for
/// mixed classes only fragment overviews where both constituents show.
std::vector<LabeledFrame> training_stills(std::uint64_t seed, MorphClass label,
                                          std::size_t n);

std::string spec_to_json(const PhantomSpec& spec);
PhantomSpec spec_from_json(std::string_view text);
void save_spec(const PhantomSpec& spec, const std::filesystem::path& path);
PhantomSpec load_spec(const std::filesystem::path& path);

}  // namespace litho
