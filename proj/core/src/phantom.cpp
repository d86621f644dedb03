#include "litho/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "litho/error.hpp"
#include "litho/rng.hpp"

namespace litho {

namespace {

using nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

// Purpose tags for CounterRng streams.
enum Purpose : std::uint64_t {
  kShapeTag = 0x5a01,
  kCameraTag,
  kJitterTag,
  kInstrumentTag,
  kParticleTag,
  kGlareTag,
  kNoiseTag,
  kTextureTag,
  kSpeckleTag,
  kMixTag,
  kCleanTag,
  kCohortTag,
  kStillTag,
};

constexpr double kCoreRatio = 0.70;
constexpr double kCloseUpZoom = 3.0;
constexpr double kJitterPxPerIntensity = 40.0;
constexpr double kDriftPx = 5.0;
constexpr int kMaxPieces = 8;

constexpr std::array<std::string_view, 8> kEventNames = {
    "SurfaceExam",  "Fragmentation", "StoneFree",     "InstrumentOcclusion",
    "FlyingParticles", "Jitter",     "SpecularGlare", "BrightnessDrift"};

struct Shape {
  double a = 0, b = 0, cos_t = 1, sin_t = 0;
  double lobe1 = 0, lobe2 = 0;
  double p1c = 1, p1s = 0, p2c = 1, p2s = 0;
  double rmax2 = 1;
  int n_seeds = 1;
  std::array<double, kMaxPieces> seed_x{}, seed_y{};
  // Full outward displacement of every piece, local coordinates.
  std::array<double, kMaxPieces> disp_u{}, disp_v{};
  double max_disp = 0;
  double tex_phase[4]{};

  double outer_radius() const { return std::max(a, b) * (1.0 + lobe1 + lobe2); }

  // Radius normalized by the boundary at that angle: < 1 inside.
  double rho(double u, double v) const {
    const double x = u / a, y = v / b;
    const double r2 = x * x + y * y;
    if (r2 < 1e-18) return 0.0;
    if (r2 > rmax2) return 2.0;
    const double r = std::sqrt(r2);
    const double c = x / r, s = y / r;
    const double c2 = c * c - s * s, s2 = 2 * c * s;
    const double c3 = c2 * c - s2 * s, s3 = c2 * s + s2 * c;
    const double c5 = c3 * c2 - s3 * s2, s5 = c3 * s2 + s3 * c2;
    const double boundary =
        1.0 + lobe1 * (s3 * p1c + c3 * p1s) + lobe2 * (s5 * p2c + c5 * p2s);
    return r / boundary;
  }

  int piece_of(double u, double v) const {
    const double x = u / a, y = v / b;
    int best = 0;
    double best_d = 1e300;
    for (int j = 0; j < n_seeds; ++j) {
      const double dx = x - seed_x[j], dy = y - seed_y[j];
      const double d = dx * dx + dy * dy;
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  }
};

Shape make_shape(std::uint64_t seed) {
  const CounterRng rng(seed, 0, kShapeTag);
  Shape s;
  s.a = rng.uniform(0, 60.0, 78.0);
  s.b = s.a * rng.uniform(1, 0.75, 0.9);
  const double theta = rng.uniform(2, 0.0, kPi);
  s.cos_t = std::cos(theta);
  s.sin_t = std::sin(theta);
  s.lobe1 = rng.uniform(3, 0.03, 0.07);
  s.lobe2 = rng.uniform(4, 0.01, 0.03);
  const double psi1 = rng.uniform(5, 0.0, 2 * kPi);
  const double psi2 = rng.uniform(6, 0.0, 2 * kPi);
  s.p1c = std::cos(psi1);
  s.p1s = std::sin(psi1);
  s.p2c = std::cos(psi2);
  s.p2s = std::sin(psi2);
  s.rmax2 = std::pow(1.0 + s.lobe1 + s.lobe2, 2);

  const int ring = 3 + static_cast<int>(rng.uniform(7) * 3.0);
  const double alpha0 = rng.uniform(8, 0.0, 2 * kPi);
  const double travel = rng.uniform(9, 14.0, 20.0);
  s.n_seeds = ring + 1;
  for (int j = 1; j <= ring; ++j) {
    const double step = 2 * kPi / ring;
    const double alpha = alpha0 + step * (j - 1) +
                         rng.uniform(10 + j, -0.2, 0.2) * step;
    s.seed_x[j] = 0.78 * std::cos(alpha);
    s.seed_y[j] = 0.78 * std::sin(alpha);
    const double du = s.a * std::cos(alpha), dv = s.b * std::sin(alpha);
    const double norm = std::hypot(du, dv);
    s.disp_u[j] = travel * du / norm;
    s.disp_v[j] = travel * dv / norm;
  }
  s.max_disp = travel;
  for (int i = 0; i < 4; ++i) s.tex_phase[i] = rng.uniform(30 + i, 0.0, 2 * kPi);
  return s;
}

double frame_time(std::size_t k) { return static_cast<double>(k) / kStreamFps; }

const EventScript* find_event(const PhantomSpec& spec, EventKind kind) {
  for (const auto& e : spec.events) {
    if (e.kind == kind) return &e;
  }
  return nullptr;
}

bool any_active(const PhantomSpec& spec, EventKind kind, double t) {
  return std::any_of(spec.events.begin(), spec.events.end(),
                     [&](const EventScript& e) { return e.kind == kind && e.active(t); });
}

struct Camera {
  double cx = 0, cy = 0, zoom = 1;
};

bool in_close_up(const PhantomSpec& spec, double t) {
  const auto* frag = find_event(spec, EventKind::Fragmentation);
  if (frag == nullptr || t < frag->t_end) return false;
  const auto phase = static_cast<long long>(std::floor((t - frag->t_end) / kViewSwitchPeriodS));
  return phase % 2 == 1;
}

Camera camera_at(const PhantomSpec& spec, std::size_t k) {
  const double t = frame_time(k);
  const CounterRng rng(spec.seed, 0, kCameraTag);
  Camera cam;
  cam.cx = kDriftPx * std::sin(2 * kPi * t / 9.0 + rng.uniform(0, 0.0, 2 * kPi));
  cam.cy = kDriftPx * std::cos(2 * kPi * t / 11.0 + rng.uniform(1, 0.0, 2 * kPi));

  for (std::size_t ei = 0; ei < spec.events.size(); ++ei) {
    const auto& e = spec.events[ei];
    if (e.kind != EventKind::Jitter || !e.active(t)) continue;
    // Consecutive directions differ by 120..240 degrees, so each frame moves
    // by at least sqrt(3) times the magnitude relative to the previous one.
    const auto first = static_cast<std::size_t>(std::ceil(e.t_start * kStreamFps - 1e-9));
    const CounterRng jr(spec.seed, ei, kJitterTag);
    double angle = jr.uniform(first, 0.0, 2 * kPi);
    for (std::size_t i = first + 1; i <= k; ++i) {
      angle += kPi + jr.uniform(i, -kPi / 3, kPi / 3);
    }
    const double m = kJitterPxPerIntensity * e.intensity;
    cam.cx += m * std::cos(angle);
    cam.cy += m * std::sin(angle);
  }
  if (in_close_up(spec, t)) cam.zoom = kCloseUpZoom;
  return cam;
}

struct Texture {
  const Palette* palette;
  double phase_u, phase_v;
  std::uint64_t speckle_key;
  double scale;
};

// Texture coordinates are scaled by the zoom so that a surface keeps the same
// apparent grain in overview and close-up.
std::array<double, 3> stone_color(const Texture& tex, double u, double v, double rho) {
  const Palette& p = *tex.palette;
  u *= tex.scale;
  v *= tex.scale;
  double shade = 1.0 - 0.15 * rho * rho;
  if (p.shading_amplitude != 0.0) {
    shade += p.shading_amplitude * std::sin(u / p.shading_period_px + tex.phase_u) *
             std::sin(v / (0.87 * p.shading_period_px) + tex.phase_v);
  }
  if (p.speckle_amplitude != 0.0) {
    const auto cu = static_cast<std::int64_t>(std::floor(u / p.speckle_cell_px));
    const auto cv = static_cast<std::int64_t>(std::floor(v / p.speckle_cell_px));
    const CounterRng rng(tex.speckle_key, 0, kSpeckleTag);
    const auto key = static_cast<std::uint64_t>((cu + (1 << 20)) << 21 | (cv + (1 << 20)));
    shade *= 1.0 + p.speckle_amplitude * rng.uniform(key, -1.0, 1.0);
  }
  return {p.base[0] * shade, p.base[1] * shade, p.base[2] * shade};
}

double ramp(double u) {
  if (u < 0.25) return u / 0.25;
  if (u > 0.75) return (1.0 - u) / 0.25;
  return 1.0;
}

double seg_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double h = len2 > 0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  h = std::clamp(h, 0.0, 1.0);
  return std::hypot(px - ax - h * vx, py - ay - h * vy);
}

struct Canvas {
  std::vector<float> rgb;
  std::vector<Material> material;

  Canvas() : rgb(3 * kFrameSize * kFrameSize), material(kFrameSize * kFrameSize) {}
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * kFrameSize + x; }
  void put(int x, int y, const std::array<double, 3>& c, Material m) {
    const auto i = idx(x, y);
    rgb[3 * i] = static_cast<float>(c[0]);
    rgb[3 * i + 1] = static_cast<float>(c[1]);
    rgb[3 * i + 2] = static_cast<float>(c[2]);
    material[i] = m;
  }
};

void draw_background(const PhantomSpec& spec, const Shape& shape, const Camera& cam,
                     Canvas& out) {
  const Palette& p = spec.background;
  std::array<double, kFrameSize> sx{}, sy{}, dsx{}, dcx{}, dsy{}, dcy{};
  const double period = p.shading_period_px;
  for (int i = 0; i < kFrameSize; ++i) {
    const double wx = cam.cx + (i + 0.5 - kFrameSize / 2.0) / cam.zoom;
    const double wy = cam.cy + (i + 0.5 - kFrameSize / 2.0) / cam.zoom;
    sx[i] = std::sin(wx / period + shape.tex_phase[0]);
    sy[i] = std::sin(wy / (1.3 * period) + shape.tex_phase[1]);
    dsx[i] = std::sin(wx / (2.1 * period) + shape.tex_phase[2]);
    dcx[i] = std::cos(wx / (2.1 * period) + shape.tex_phase[2]);
    dsy[i] = std::sin(wy / (2.1 * period) + shape.tex_phase[3]);
    dcy[i] = std::cos(wy / (2.1 * period) + shape.tex_phase[3]);
  }
  const double amp = p.shading_amplitude;
  for (int y = 0; y < kFrameSize; ++y) {
    for (int x = 0; x < kFrameSize; ++x) {
      const double shade = 1.0 + amp * sx[x] * sy[y] +
                           0.5 * amp * (dsx[x] * dcy[y] + dcx[x] * dsy[y]);
      out.put(x, y, {p.base[0] * shade, p.base[1] * shade, p.base[2] * shade},
              Material::Background);
    }
  }
}

void draw_stone(const PhantomSpec& spec, const Shape& shape, const Camera& cam,
                double t, Canvas& out) {
  const auto* frag = find_event(spec, EventKind::Fragmentation);
  const bool split = frag != nullptr && t >= frag->t_start;
  const double progress =
      split ? std::clamp((t - frag->t_start) / (frag->t_end - frag->t_start), 0.0, 1.0) : 0.0;
  const bool mixed = is_mixed(spec.label);
  const Texture shell{&spec.stone_palettes[0], shape.tex_phase[1], shape.tex_phase[2],
                      spec.seed, cam.zoom};
  const Texture core{&spec.stone_palettes[mixed ? 1 : 0], shape.tex_phase[3],
                     shape.tex_phase[0], spec.seed ^ 0x77, cam.zoom};

  const double reach = shape.outer_radius() + (split ? shape.max_disp * progress : 0.0) + 2.0;
  const double half = kFrameSize / 2.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(half + (-reach - cam.cx) * cam.zoom)));
  const int x1 = std::min(kFrameSize - 1, static_cast<int>(std::ceil(half + (reach - cam.cx) * cam.zoom)));
  const int y0 = std::max(0, static_cast<int>(std::floor(half + (-reach - cam.cy) * cam.zoom)));
  const int y1 = std::min(kFrameSize - 1, static_cast<int>(std::ceil(half + (reach - cam.cy) * cam.zoom)));

  for (int y = y0; y <= y1; ++y) {
    const double wy = cam.cy + (y + 0.5 - half) / cam.zoom;
    for (int x = x0; x <= x1; ++x) {
      const double wx = cam.cx + (x + 0.5 - half) / cam.zoom;
      const double u = shape.cos_t * wx + shape.sin_t * wy;
      const double v = -shape.sin_t * wx + shape.cos_t * wy;
      if (!split) {
        const double r = shape.rho(u, v);
        if (r < 1.0) out.put(x, y, stone_color(shell, u, v, r), Material::Shell);
        continue;
      }
      // Inverse mapping; the lowest piece index wins overlaps.
      for (int j = 0; j < shape.n_seeds; ++j) {
        const double su = u - progress * shape.disp_u[j];
        const double sv = v - progress * shape.disp_v[j];
        const double r = shape.rho(su, sv);
        if (r >= 1.0 || shape.piece_of(su, sv) != j) continue;
        const bool exposed = mixed && r < kCoreRatio;
        out.put(x, y, stone_color(exposed ? core : shell, su, sv, r),
                exposed ? Material::Core : Material::Shell);
        break;
      }
    }
  }
}

void draw_instrument(const PhantomSpec& spec, std::size_t ei, double t, Canvas& out) {
  const auto& e = spec.events[ei];
  const CounterRng rng(spec.seed, ei, kInstrumentTag);
  const int corner = static_cast<int>(rng.uniform(0) * 4.0);
  const double ex = (corner & 1) ? kFrameSize + 4.0 : -4.0;
  const double ey = (corner & 2) ? kFrameSize + 4.0 : -4.0;
  const double half = kFrameSize / 2.0;
  double angle = std::atan2(half - ey, half - ex) + rng.uniform(1, -0.25, 0.25);
  angle += 0.06 * std::sin(2 * kPi * 0.8 * t + rng.uniform(2, 0.0, 2 * kPi));
  const double u = (t - e.t_start) / (e.t_end - e.t_start);
  const double length = (110.0 + 60.0 * e.intensity) * ramp(u);
  if (length <= 0.0) return;
  const double dx = std::cos(angle), dy = std::sin(angle);
  const double tx = ex + length * dx, ty = ey + length * dy;
  const double hw = 9.0 + 4.0 * e.intensity;
  const double lx = tx + 13.0 * dx, ly = ty + 13.0 * dy;
  constexpr double kLoopR = 12.0, kWire = 1.5;

  const double minx = std::min({ex, tx, lx - kLoopR}) - hw - 2;
  const double maxx = std::max({ex, tx, lx + kLoopR}) + hw + 2;
  const double miny = std::min({ey, ty, ly - kLoopR}) - hw - 2;
  const double maxy = std::max({ey, ty, ly + kLoopR}) + hw + 2;
  for (int y = std::max(0, static_cast<int>(miny)); y <= std::min(kFrameSize - 1, static_cast<int>(maxy)); ++y) {
    for (int x = std::max(0, static_cast<int>(minx)); x <= std::min(kFrameSize - 1, static_cast<int>(maxx)); ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const double d = seg_distance(px, py, ex, ey, tx, ty);
      if (d < hw) {
        const double g = 110.0 + 100.0 * (1.0 - (d / hw) * (d / hw));
        out.put(x, y, {g, g, g + 6.0}, Material::Instrument);
      } else if (std::abs(std::hypot(px - lx, py - ly) - kLoopR) < kWire) {
        out.put(x, y, {205.0, 205.0, 212.0}, Material::Instrument);
      }
    }
  }
}

void draw_particles(const PhantomSpec& spec, std::size_t ei, std::size_t k, Canvas& out) {
  const auto& e = spec.events[ei];
  const CounterRng rng(spec.seed ^ (ei * 0x9e37), k, kParticleTag);
  const auto n = static_cast<int>(std::lround(8.0 + 60.0 * e.intensity));
  for (int i = 0; i < n; ++i) {
    const double px = rng.uniform(4 * i, 0.0, kFrameSize);
    const double py = rng.uniform(4 * i + 1, 0.0, kFrameSize);
    const double r = rng.uniform(4 * i + 2, 1.2, 3.0);
    for (int y = std::max(0, static_cast<int>(py - r)); y <= std::min(kFrameSize - 1, static_cast<int>(py + r)); ++y) {
      for (int x = std::max(0, static_cast<int>(px - r)); x <= std::min(kFrameSize - 1, static_cast<int>(px + r)); ++x) {
        if (std::hypot(x + 0.5 - px, y + 0.5 - py) < r) {
          out.put(x, y, {236.0, 228.0, 210.0}, Material::Particle);
        }
      }
    }
  }
}

void draw_glare(const PhantomSpec& spec, std::size_t ei, const Camera& cam, double t,
                Canvas& out) {
  const auto& e = spec.events[ei];
  const CounterRng rng(spec.seed, ei, kGlareTag);
  const double half = kFrameSize / 2.0;
  for (int i = 0; i < 3; ++i) {
    const double wx = rng.uniform(4 * i, -40.0, 40.0) + 6.0 * std::sin(0.7 * t + i);
    const double wy = rng.uniform(4 * i + 1, -40.0, 40.0) + 6.0 * std::cos(0.5 * t + i);
    const double r = rng.uniform(4 * i + 2, 5.0, 10.0) * cam.zoom;
    const double sx = half + (wx - cam.cx) * cam.zoom;
    const double sy = half + (wy - cam.cy) * cam.zoom;
    const double reach = 2.5 * r;
    for (int y = std::max(0, static_cast<int>(sy - reach)); y <= std::min(kFrameSize - 1, static_cast<int>(sy + reach)); ++y) {
      for (int x = std::max(0, static_cast<int>(sx - reach)); x <= std::min(kFrameSize - 1, static_cast<int>(sx + reach)); ++x) {
        const double d2 = (x + 0.5 - sx) * (x + 0.5 - sx) + (y + 0.5 - sy) * (y + 0.5 - sy);
        const double f = e.intensity * std::exp(-d2 / (r * r));
        const auto i3 = 3 * out.idx(x, y);
        for (int c = 0; c < 3; ++c) {
          out.rgb[i3 + c] += static_cast<float>((255.0 - out.rgb[i3 + c]) * f);
        }
      }
    }
  }
}

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidSpec, what);
}

bool overlaps(const EventScript& a, const EventScript& b) {
  return a.t_start < b.t_end && b.t_start < a.t_end;
}

}  // namespace

std::string_view to_string(EventKind k) noexcept {
  return kEventNames[static_cast<std::size_t>(k)];
}

std::optional<EventKind> parse_event_kind(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (kEventNames[i] == s) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

Palette stone_palette(MorphClass pure) {
  switch (pure) {
    case MorphClass::Ia:
      return Palette{{92, 62, 40}, 0.22, 12.0, 0.0, 3.0};
    case MorphClass::IIb:
      return Palette{{205, 195, 150}, 0.0, 16.0, 0.12, 3.0};
    case MorphClass::IIIb:
      return Palette{{222, 152, 92}, 0.04, 40.0, 0.0, 3.0};
    default:
      break;
  }
  throw Error(ErrorCode::InvalidArgument,
              "no single palette for mixed class " + std::string(to_string(pure)));
}

Palette background_palette() { return Palette{{150, 55, 60}, 0.10, 30.0, 0.0, 3.0}; }

PhantomSpec make_spec(std::uint64_t seed, MorphClass label, double duration_s) {
  PhantomSpec s;
  s.seed = seed;
  s.label = label;
  s.duration_s = duration_s;
  s.background = background_palette();
  for (auto c : components(label)) s.stone_palettes.push_back(stone_palette(c));
  return s;
}

void validate(const PhantomSpec& spec) {
  check(spec.duration_s > 0.0 && std::isfinite(spec.duration_s), "duration must be positive");
  check(spec.noise_sigma >= 0.0 && std::isfinite(spec.noise_sigma), "noise sigma must be >= 0");
  check(spec.stone_palettes.size() == (is_mixed(spec.label) ? 2u : 1u),
        "label " + std::string(to_string(spec.label)) + " needs " +
            (is_mixed(spec.label) ? "2" : "1") + " stone palette(s)");
  int fragmentations = 0;
  for (const auto& e : spec.events) {
    const std::string name(to_string(e.kind));
    check(e.t_start < e.t_end, name + " interval is empty");
    check(e.t_start >= 0.0 && e.t_end <= spec.duration_s, name + " interval outside the video");
    check(e.intensity >= 0.0 && e.intensity <= 1.0, name + " intensity outside [0,1]");
    if (e.kind == EventKind::Fragmentation) ++fragmentations;
  }
  check(fragmentations <= 1, "at most one Fragmentation per video");
  for (const auto& a : spec.events) {
    if (a.kind != EventKind::StoneFree) continue;
    for (const auto& b : spec.events) {
      if ((b.kind == EventKind::SurfaceExam || b.kind == EventKind::Fragmentation) &&
          overlaps(a, b)) {
        check(false, "StoneFree overlaps " + std::string(to_string(b.kind)));
      }
    }
  }
}

std::size_t phantom_frame_count(const PhantomSpec& spec) {
  // k / 8 < duration, evaluated as k < 8 * duration.
  const double end = spec.duration_s * kStreamFps;
  auto n = static_cast<std::size_t>(std::ceil(end));
  while (n > 0 && static_cast<double>(n - 1) >= end) --n;
  while (static_cast<double>(n) < end) ++n;
  return n;
}

PhantomFrame render_frame(const PhantomSpec& spec, std::size_t k) {
  validate(spec);
  const double t = frame_time(k);
  const Shape shape = make_shape(spec.seed);
  const Camera cam = camera_at(spec, k);

  Canvas canvas;
  draw_background(spec, shape, cam, canvas);
  if (!any_active(spec, EventKind::StoneFree, t)) draw_stone(spec, shape, cam, t, canvas);
  for (std::size_t ei = 0; ei < spec.events.size(); ++ei) {
    const auto& e = spec.events[ei];
    if (!e.active(t)) continue;
    if (e.kind == EventKind::InstrumentOcclusion) draw_instrument(spec, ei, t, canvas);
  }
  for (std::size_t ei = 0; ei < spec.events.size(); ++ei) {
    const auto& e = spec.events[ei];
    if (e.active(t) && e.kind == EventKind::FlyingParticles) draw_particles(spec, ei, k, canvas);
  }
  for (std::size_t ei = 0; ei < spec.events.size(); ++ei) {
    const auto& e = spec.events[ei];
    if (e.active(t) && e.kind == EventKind::SpecularGlare) draw_glare(spec, ei, cam, t, canvas);
  }
  double gain = 1.0;
  for (const auto& e : spec.events) {
    if (e.kind == EventKind::BrightnessDrift && e.active(t)) {
      gain *= 1.0 - 0.45 * e.intensity * std::sin(kPi * (t - e.t_start) / (e.t_end - e.t_start));
    }
  }

  PhantomFrame f;
  f.image = RgbImage(kFrameSize, kFrameSize);
  f.truth = StoneMask(kFrameSize, kFrameSize);
  f.material = std::move(canvas.material);
  auto bytes = f.image.bytes();
  const CounterRng noise(spec.seed, k, kNoiseTag);
  const double sigma = spec.noise_sigma * std::sqrt(6.0);
  for (std::size_t i = 0; i < f.material.size(); ++i) {
    std::uint64_t bits = spec.noise_sigma > 0.0 ? noise.bits(i) : 0;
    for (int c = 0; c < 3; ++c) {
      double v = canvas.rgb[3 * i + c] * gain;
      if (spec.noise_sigma > 0.0) {
        // Triangular noise from two 10-bit uniforms, variance sigma^2.
        const double u1 = static_cast<double>(bits & 0x3ff) / 1023.0;
        const double u2 = static_cast<double>((bits >> 10) & 0x3ff) / 1023.0;
        bits >>= 21;
        v += sigma * (u1 + u2 - 1.0) / 2.0;
      }
      bytes[3 * i + c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    const auto m = f.material[i];
    f.truth.bits()[i] = (m == Material::Shell || m == Material::Core) ? 1 : 0;
  }
  return f;
}

RawVideo generate_phantom(const PhantomSpec& spec) {
  validate(spec);
  RawVideo v;
  v.native_fps = kStreamFps;
  v.truth_label = spec.label;
  const std::size_t n = phantom_frame_count(spec);
  v.frames.reserve(n);
  v.truth_masks.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto f = render_frame(spec, k);
    v.frames.push_back(std::move(f.image));
    v.truth_masks.push_back(std::move(f.truth));
  }
  return v;
}

PhantomSpec clean_spec(std::uint64_t seed, MorphClass label) {
  const CounterRng rng(seed, 0, kCleanTag);
  const double d = rng.uniform(0, 10.0, 13.0);
  PhantomSpec s = make_spec(seed, label, d);
  const double t_frag = 0.35 * d;
  s.events = {
      {EventKind::SurfaceExam, 0.0, t_frag, 1.0},
      {EventKind::Fragmentation, t_frag, t_frag + 1.0, 1.0},
      {EventKind::SurfaceExam, t_frag + 1.0, d, 1.0},
  };
  return s;
}

PhantomSpec adversarial_spec(std::uint64_t seed, MorphClass label) {
  PhantomSpec s = clean_spec(seed, label);
  const CounterRng rng(seed, 1, kCleanTag);
  const double stone = s.duration_s;
  const double t_frag = s.events[1].t_start;
  const double t_frag_end = s.events[1].t_end;
  s.duration_s = stone * 2.3;
  const double jitter_start = rng.uniform(0, 0.5, t_frag - 2.0);
  s.events.push_back({EventKind::Jitter, jitter_start, jitter_start + 1.5, rng.uniform(1, 0.5, 0.8)});
  s.events.push_back({EventKind::FlyingParticles, t_frag, t_frag_end, rng.uniform(2, 0.4, 0.8)});
  const double inst_start = rng.uniform(3, t_frag_end + 0.5, stone - 2.5);
  s.events.push_back({EventKind::InstrumentOcclusion, inst_start, inst_start + 2.0,
                      rng.uniform(4, 0.6, 1.0)});
  s.events.push_back({EventKind::StoneFree, stone, s.duration_s, 1.0});
  return s;
}

PhantomSpec default_event_mix(std::uint64_t seed, MorphClass label) {
  const CounterRng rng(seed, 0, kMixTag);
  const double d = rng.uniform(0, 10.0, 20.0);
  const bool exam_first = rng.bernoulli(1, 0.64);
  const bool fragmentation = rng.bernoulli(2, 0.47);
  const bool stone_free = rng.bernoulli(3, 0.34);
  const bool clamp = rng.bernoulli(4, 0.10);
  const bool removal = rng.bernoulli(5, 0.06);
  const bool urine = rng.bernoulli(6, 0.04);
  const bool blood = rng.bernoulli(7, 0.01);

  PhantomSpec s = make_spec(seed, label, d);
  const double stone = stone_free ? 0.7 * d : d;
  double frag_end = 0.0;
  if (fragmentation) {
    const double t0 = exam_first ? 0.4 * stone : 0.0;
    frag_end = t0 + 1.0;
    if (exam_first) s.events.push_back({EventKind::SurfaceExam, 0.0, t0, 1.0});
    s.events.push_back({EventKind::Fragmentation, t0, frag_end, 1.0});
    s.events.push_back({EventKind::SurfaceExam, frag_end, stone, 1.0});
  } else if (exam_first) {
    s.events.push_back({EventKind::SurfaceExam, 0.0, stone, 1.0});
  } else {
    // The stone is approached while the scope is still moving.
    const double settle = 0.15 * stone;
    s.events.push_back({EventKind::Jitter, 0.0, settle, rng.uniform(8, 0.2, 0.5)});
    s.events.push_back({EventKind::SurfaceExam, settle, stone, 1.0});
  }
  if (stone_free) s.events.push_back({EventKind::StoneFree, stone, d, 1.0});
  if (clamp) {
    const double t0 = rng.uniform(9, 0.0, stone - 2.0);
    s.events.push_back({EventKind::InstrumentOcclusion, t0, t0 + 2.0, rng.uniform(10, 0.5, 1.0)});
  }
  if (removal) {
    const double lo = fragmentation ? frag_end : 0.0;
    const double t0 = rng.uniform(11, lo, std::max(lo, stone - 2.0));
    s.events.push_back({EventKind::InstrumentOcclusion, t0, std::min(t0 + 2.0, stone),
                        rng.uniform(12, 0.5, 1.0)});
  }
  if (urine) s.events.push_back({EventKind::FlyingParticles, 0.0, d, rng.uniform(13, 0.2, 0.5)});
  if (blood) s.events.push_back({EventKind::BrightnessDrift, 0.0, d, rng.uniform(14, 0.3, 0.6)});
  return s;
}

std::string_view to_string(CohortKind k) noexcept {
  switch (k) {
    case CohortKind::Clean: return "clean";
    case CohortKind::Adversarial: return "adversarial";
    case CohortKind::EventMix: return "event-mix";
  }
  return "?";
}

std::optional<CohortKind> parse_cohort_kind(std::string_view s) noexcept {
  for (auto k : {CohortKind::Clean, CohortKind::Adversarial, CohortKind::EventMix}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::vector<CohortEntry> cohort_specs(CohortKind kind, std::size_t n_per_class,
                                      std::uint64_t seed) {
  std::vector<CohortEntry> out;
  out.reserve(n_per_class * kNumClasses);
  for (auto label : kAllClasses) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const std::uint64_t s = CounterRng(seed, i, kCohortTag + 16 * index_of(label)).bits(0);
      char id[64];
      std::snprintf(id, sizeof id, "%s_%03zu", std::string(to_string(label)).c_str(), i);
      PhantomSpec spec;
      switch (kind) {
        case CohortKind::Clean: spec = clean_spec(s, label); break;
        case CohortKind::Adversarial: spec = adversarial_spec(s, label); break;
        case CohortKind::EventMix: spec = default_event_mix(s, label); break;
      }
      out.push_back({id, std::move(spec)});
    }
  }
  return out;
}

std::vector<LabeledFrame> training_stills(std::uint64_t seed, MorphClass label,
                                          std::size_t n) {
  std::vector<LabeledFrame> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CounterRng rng(seed, i, kStillTag + 16 * index_of(label));
    const PhantomSpec spec = clean_spec(rng.bits(0), label);
    const std::size_t frames = phantom_frame_count(spec);
    std::vector<std::size_t> eligible;
    const auto& frag = spec.events[1];
    for (std::size_t k = 0; k < frames; ++k) {
      const double t = frame_time(k);
      if (!is_mixed(label) || (t >= frag.t_end && !in_close_up(spec, t))) eligible.push_back(k);
    }
    const auto pick = eligible[static_cast<std::size_t>(rng.uniform(1) * eligible.size())];
    auto f = render_frame(spec, pick);
    out.push_back({std::move(f.image), std::move(f.truth), label});
  }
  return out;
}

namespace {

ordered_json palette_json(const Palette& p) {
  return ordered_json{{"base", {p.base[0], p.base[1], p.base[2]}},
                      {"shading_amplitude", p.shading_amplitude},
                      {"shading_period_px", p.shading_period_px},
                      {"speckle_amplitude", p.speckle_amplitude},
                      {"speckle_cell_px", p.speckle_cell_px}};
}

Palette palette_from(const ordered_json& j) {
  Palette p;
  const auto& base = j.at("base");
  if (!base.is_array() || base.size() != 3) throw Error(ErrorCode::InvalidSpec, "palette base needs 3 channels");
  for (int c = 0; c < 3; ++c) {
    const int v = base.at(c).get<int>();
    if (v < 0 || v > 255) throw Error(ErrorCode::InvalidSpec, "palette channel outside [0,255]");
    p.base[c] = static_cast<std::uint8_t>(v);
  }
  p.shading_amplitude = j.at("shading_amplitude").get<double>();
  p.shading_period_px = j.at("shading_period_px").get<double>();
  p.speckle_amplitude = j.at("speckle_amplitude").get<double>();
  p.speckle_cell_px = j.at("speckle_cell_px").get<double>();
  return p;
}

}  // namespace

std::string spec_to_json(const PhantomSpec& spec) {
  ordered_json j;
  j["seed"] = spec.seed;
  j["label"] = to_string(spec.label);
  j["duration_s"] = spec.duration_s;
  j["noise_sigma"] = spec.noise_sigma;
  j["background_palette"] = palette_json(spec.background);
  j["stone_palettes"] = ordered_json::array();
  for (const auto& p : spec.stone_palettes) j["stone_palettes"].push_back(palette_json(p));
  j["events"] = ordered_json::array();
  for (const auto& e : spec.events) {
    j["events"].push_back({{"kind", to_string(e.kind)},
                           {"t_start", e.t_start},
                           {"t_end", e.t_end},
                           {"intensity", e.intensity}});
  }
  return j.dump(2);
}

PhantomSpec spec_from_json(std::string_view text) {
  PhantomSpec s;
  try {
    const auto j = ordered_json::parse(text);
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto label = parse_morph_class(j.at("label").get<std::string>());
    if (!label) throw Error(ErrorCode::InvalidSpec, "unknown label");
    s.label = *label;
    s.duration_s = j.at("duration_s").get<double>();
    s.noise_sigma = j.value("noise_sigma", 2.0);
    s.background = palette_from(j.at("background_palette"));
    for (const auto& p : j.at("stone_palettes")) s.stone_palettes.push_back(palette_from(p));
    for (const auto& e : j.at("events")) {
      const auto kind = parse_event_kind(e.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::InvalidSpec, "unknown event kind");
      s.events.push_back({*kind, e.at("t_start").get<double>(), e.at("t_end").get<double>(),
                          e.at("intensity").get<double>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidSpec, ex.what());
  }
  validate(s);
  return s;
}

void save_spec(const PhantomSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << spec_to_json(spec) << '\n';
}

PhantomSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return spec_from_json(ss.str());
}

}  // namespace litho
