#include "puck/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "puck/config.hpp"

namespace puck {

namespace {

constexpr double kTwoPi = 6.283185307179586;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

uint64_t poisson(std::mt19937_64& rng, double lambda) {
  // Knuth's method; step rates here keep lambda small.
  if (lambda <= 0.0) return 0;
  const double limit = std::exp(-lambda);
  uint64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01(rng);
  } while (p > limit && k < 100000);
  return k - 1;
}

uint64_t stamp_in_step(std::mt19937_64& rng, uint64_t t0, uint64_t dt) {
  // uniform in (t0, t0+dt], microsecond resolution
  return t0 + 1 + static_cast<uint64_t>(uniform01(rng) * static_cast<double>(dt - 1) + 0.5);
}

struct Vec2 {
  double x = 0.0, y = 0.0;
};

// Advances the puck center through dt seconds inside the field rect,
// reflecting the wall-normal velocity component scaled by the restitution.
void advance_puck(Vec2& pos, Vec2& vel, double dt, const Roi& field, double restitution) {
  const double x0 = field.x, x1 = field.x + field.w;
  const double y0 = field.y, y1 = field.y + field.h;
  double remaining = dt;
  for (int guard = 0; guard < 16 && remaining > 1e-15; ++guard) {
    double t_hit = remaining;
    int wall = -1;  // 0: x0, 1: x1, 2: y0, 3: y1
    if (vel.x < 0.0) {
      const double t = (x0 - pos.x) / vel.x;
      if (t >= 0.0 && t < t_hit) { t_hit = t; wall = 0; }
    } else if (vel.x > 0.0) {
      const double t = (x1 - pos.x) / vel.x;
      if (t >= 0.0 && t < t_hit) { t_hit = t; wall = 1; }
    }
    if (vel.y < 0.0) {
      const double t = (y0 - pos.y) / vel.y;
      if (t >= 0.0 && t < t_hit) { t_hit = t; wall = 2; }
    } else if (vel.y > 0.0) {
      const double t = (y1 - pos.y) / vel.y;
      if (t >= 0.0 && t < t_hit) { t_hit = t; wall = 3; }
    }
    pos.x += vel.x * t_hit;
    pos.y += vel.y * t_hit;
    remaining -= t_hit;
    if (wall < 0) break;
    if (wall == 0) { pos.x = x0; vel.x = -vel.x * restitution; }
    else if (wall == 1) { pos.x = x1; vel.x = -vel.x * restitution; }
    else if (wall == 2) { pos.y = y0; vel.y = -vel.y * restitution; }
    else { pos.y = y1; vel.y = -vel.y * restitution; }
  }
  pos.x = std::clamp(pos.x, x0, x1);
  pos.y = std::clamp(pos.y, y0, y1);
}

bool inside_ellipse(const EllipsePose& e, int x, int y) {
  const double dx = (x - e.cx) / e.a;
  const double dy = (y - e.cy) / e.b;
  return dx * dx + dy * dy <= 1.0;
}

bool inside_disc(double cx, double cy, double r, int x, int y) {
  const double dx = x - cx, dy = y - cy;
  return dx * dx + dy * dy <= r * r;
}

// Star-polygon mask rasterized on a 1/4-pixel subgrid (table frame), even-odd
// rule. Sub-pixel sampling makes the apparent outline sweep smoothly under
// camera sway instead of jumping whole pixels at a time.
struct StarMask {
  static constexpr int kScale = 4;
  double x0 = 0.0, y0 = 0.0;  // table-frame origin of the subgrid
  int w = 0, h = 0;           // subgrid extent
  std::vector<uint8_t> mask;

  // membership of image pixel (x, y) under apparent shift s
  bool at(double x, double y, const Vec2& s) const {
    const int i = static_cast<int>(std::lround((x - s.x - x0) * kScale));
    const int j = static_cast<int>(std::lround((y - s.y - y0) * kScale));
    if (i < 0 || j < 0 || i >= w || j >= h) return false;
    return mask[static_cast<size_t>(j) * w + i] != 0;
  }
};

StarMask rasterize_star(const StarShape& s) {
  const int n = 2 * s.points;
  std::vector<double> vx(n), vy(n);
  for (int i = 0; i < n; ++i) {
    const double r = (i % 2 == 0) ? s.r_outer : s.r_inner;
    const double ang = s.phase + kTwoPi * i / n;
    vx[i] = s.cx + r * std::cos(ang);
    vy[i] = s.cy + r * std::sin(ang);
  }
  StarMask m;
  m.x0 = std::floor(s.cx - s.r_outer) - 1.0;
  m.y0 = std::floor(s.cy - s.r_outer) - 1.0;
  m.w = (static_cast<int>(std::ceil(2.0 * s.r_outer)) + 3) * StarMask::kScale;
  m.h = m.w;
  m.mask.assign(static_cast<size_t>(m.w) * m.h, 0);
  for (int j = 0; j < m.h; ++j) {
    const double py = m.y0 + static_cast<double>(j) / StarMask::kScale;
    for (int i = 0; i < m.w; ++i) {
      const double px = m.x0 + static_cast<double>(i) / StarMask::kScale;
      bool in = false;
      for (int a = 0, b = n - 1; a < n; b = a++) {
        if ((vy[a] > py) != (vy[b] > py) &&
            px < (vx[b] - vx[a]) * (py - vy[a]) / (vy[b] - vy[a]) + vx[a])
          in = !in;
      }
      if (in) m.mask[static_cast<size_t>(j) * m.w + i] = 1;
    }
  }
  return m;
}

bool inside_line(const TableLine& line, double x, double y, const Vec2& s) {
  const double px = x - s.x, py = y - s.y;
  const double dx = line.x1 - line.x0, dy = line.y1 - line.y0;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - line.x0) * dx + (py - line.y0) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double qx = line.x0 + t * dx - px;
  const double qy = line.y0 + t * dy - py;
  const double half = 0.5 * line.thickness;
  return qx * qx + qy * qy <= half * half;
}

void emit_pixel(std::vector<Event>& out, std::mt19937_64& rng, uint64_t t0, uint64_t dt,
                int x, int y, bool polarity, double density) {
  uint64_t n = static_cast<uint64_t>(density);
  if (uniform01(rng) < density - static_cast<double>(n)) ++n;
  for (uint64_t i = 0; i < n; ++i)
    out.push_back(Event{stamp_in_step(rng, t0, dt), static_cast<uint16_t>(x),
                        static_cast<uint16_t>(y), polarity});
}

}  // namespace

void SceneConfig::validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("scene resolution must be positive");
  if (!(duration_s > 0.0)) throw ConfigError("duration must be positive");
  if (!(restitution > 0.0 && restitution <= 1.0))
    throw ConfigError("restitution must be in (0, 1]");
  if (field.empty()) throw ConfigError("field must be non-empty");
  if (puck_x < field.x || puck_x > field.x + field.w || puck_y < field.y ||
      puck_y > field.y + field.h)
    throw ConfigError("puck initial position outside field");
  const double speed = std::hypot(puck_vx, puck_vy);
  if (!(speed <= 1e5) || !std::isfinite(speed))
    throw ConfigError("puck speed out of range");
  if (step_us == 0 || gt_period_us == 0 || gt_period_us % step_us != 0)
    throw ConfigError("gt_period_us must be a positive multiple of step_us");
  if (!(event_density >= 0.0)) throw ConfigError("event density must be >= 0");
  if (!(noise_rate >= 0.0)) throw ConfigError("noise rate must be >= 0");
  auto [a0, b0] = size.predict(puck_x, puck_y);
  if (!(a0 > 0.0) || !(b0 > 0.0)) throw ConfigError("size model must be positive over the field");
}

std::vector<Event> render_silhouette_events(const EllipsePose& prev, const EllipsePose& next,
                                            uint64_t t0_us, uint64_t dt_us, double density,
                                            int width, int height, std::mt19937_64& rng) {
  std::vector<Event> out;
  if (dt_us == 0) return out;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(prev.cx - prev.a, next.cx - next.a))));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(prev.cx + prev.a, next.cx + next.a))));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(prev.cy - prev.b, next.cy - next.b))));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(prev.cy + prev.b, next.cy + next.b))));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const bool was = inside_ellipse(prev, x, y);
      const bool is = inside_ellipse(next, x, y);
      if (was != is) emit_pixel(out, rng, t0_us, dt_us, x, y, is, density);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  return out;
}

SimResult simulate(const SceneConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);

  SimResult result;
  const uint64_t duration_us = static_cast<uint64_t>(config.duration_s * 1e6 + 0.5);
  const uint64_t steps = duration_us / config.step_us;
  result.header.width = static_cast<uint32_t>(config.width);
  result.header.height = static_cast<uint32_t>(config.height);
  result.header.duration_us = duration_us;

  std::vector<StarMask> star_masks;
  star_masks.reserve(config.stars.size());
  for (const StarShape& s : config.stars) star_masks.push_back(rasterize_star(s));

  const double jitter_amp = config.jitter.amplitude_px();
  const double jitter_amp_y = jitter_amp * config.jitter.amp_y_frac;
  auto jitter_at = [&](double t_s) -> Vec2 {
    if (jitter_amp == 0.0) return Vec2{0.0, 0.0};
    const double ph = kTwoPi * t_s / config.jitter.period_s + config.jitter.phase;
    return Vec2{jitter_amp * std::sin(ph), jitter_amp_y * std::sin(ph)};
  };
  auto paddle_at = [&](double t_s) -> Vec2 {
    const double ph = kTwoPi * t_s / config.paddle.period_s + config.paddle.phase;
    return Vec2{config.paddle.cx + config.paddle.amp_x * std::sin(ph), config.paddle.cy};
  };

  Vec2 pos{config.puck_x, config.puck_y};
  Vec2 vel{config.puck_vx, config.puck_vy};
  const double step_s = static_cast<double>(config.step_us) * 1e-6;
  const double noise_lambda =
      config.noise_rate * config.width * config.height * step_s;
  const uint64_t gt_every = config.gt_period_us / config.step_us;

  // Rally kinematics draw from their own stream so hit schedules do not
  // depend on how many noise events preceded them.
  std::mt19937_64 kin_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const double drag_factor =
      config.rally.drag_per_s > 0.0 ? std::exp(-config.rally.drag_per_s * step_s) : 1.0;
  uint64_t hit_period_us =
      config.rally.hit_period_s > 0.0
          ? static_cast<uint64_t>(config.rally.hit_period_s * 1e6 + 0.5)
          : 0;
  if (hit_period_us != 0) {  // align hits to step boundaries
    hit_period_us = std::max(config.step_us,
                             (hit_period_us / config.step_us) * config.step_us);
  }

  auto apparent_pose = [&](const Vec2& table_pos, const Vec2& shift) -> EllipsePose {
    EllipsePose pose;
    pose.cx = table_pos.x + shift.x;
    pose.cy = table_pos.y + shift.y;
    auto [a, b] = config.size.predict(pose.cx, pose.cy);
    pose.a = a;
    pose.b = b;
    return pose;
  };

  Vec2 shift_prev = jitter_at(0.0);
  EllipsePose puck_prev = apparent_pose(pos, shift_prev);
  Vec2 paddle_prev_c = paddle_at(0.0);
  std::vector<Event> step_events;

  for (uint64_t k = 0; k < steps; ++k) {
    const uint64_t t0 = k * config.step_us;
    const double t1_s = static_cast<double>(t0 + config.step_us) * 1e-6;

    if (k % gt_every == 0) {
      result.ground_truth.push_back(
          GroundTruthSample{t0, puck_prev.cx, puck_prev.cy, puck_prev.a, puck_prev.b});
    }

    if (hit_period_us != 0 && t0 != 0 && t0 % hit_period_us == 0) {
      const double speed = config.rally.hit_speed_min +
                           uniform01(kin_rng) *
                               (config.rally.hit_speed_max - config.rally.hit_speed_min);
      const double ang = kTwoPi * uniform01(kin_rng);
      vel.x = speed * std::cos(ang);
      vel.y = speed * std::sin(ang);
    }
    vel.x *= drag_factor;
    vel.y *= drag_factor;
    advance_puck(pos, vel, step_s, config.field, config.restitution);
    const Vec2 shift_next = jitter_at(t1_s);
    const EllipsePose puck_next = apparent_pose(pos, shift_next);
    const Vec2 paddle_next_c = {paddle_at(t1_s).x + shift_next.x,
                                paddle_at(t1_s).y + shift_next.y};
    const Vec2 paddle_prev_app = {paddle_prev_c.x + shift_prev.x,
                                  paddle_prev_c.y + shift_prev.y};

    step_events.clear();

    // Puck silhouette (never occluded; the puck is the topmost object).
    {
      std::vector<Event> ev = render_silhouette_events(puck_prev, puck_next, t0, config.step_us,
                                                       config.event_density, config.width,
                                                       config.height, rng);
      step_events.insert(step_events.end(), ev.begin(), ev.end());
    }

    // Opponent paddle.
    if (config.paddle.enabled) {
      const double r = config.paddle.radius;
      const int bx0 = std::max(0, static_cast<int>(std::floor(std::min(paddle_prev_app.x, paddle_next_c.x) - r)));
      const int bx1 = std::min(config.width - 1, static_cast<int>(std::ceil(std::max(paddle_prev_app.x, paddle_next_c.x) + r)));
      const int by0 = std::max(0, static_cast<int>(std::floor(std::min(paddle_prev_app.y, paddle_next_c.y) - r)));
      const int by1 = std::min(config.height - 1, static_cast<int>(std::ceil(std::max(paddle_prev_app.y, paddle_next_c.y) + r)));
      for (int y = by0; y <= by1; ++y) {
        for (int x = bx0; x <= bx1; ++x) {
          const bool was = inside_disc(paddle_prev_app.x, paddle_prev_app.y, r, x, y);
          const bool is = inside_disc(paddle_next_c.x, paddle_next_c.y, r, x, y);
          if (was != is && !inside_ellipse(puck_next, x, y))
            emit_pixel(step_events, rng, t0, config.step_us, x, y, is, config.event_density);
        }
      }
    }

    // Printed table patterns: static in the table frame, they emit wherever
    // the apparent shift sweeps their outline across a pixel.
    if (shift_prev.x != shift_next.x || shift_prev.y != shift_next.y) {
      auto occluded = [&](int x, int y) {
        if (inside_ellipse(puck_next, x, y)) return true;
        return config.paddle.enabled &&
               inside_disc(paddle_next_c.x, paddle_next_c.y, config.paddle.radius, x, y);
      };
      const double sx_lo = std::min(shift_prev.x, shift_next.x);
      const double sx_hi = std::max(shift_prev.x, shift_next.x);
      const double sy_lo = std::min(shift_prev.y, shift_next.y);
      const double sy_hi = std::max(shift_prev.y, shift_next.y);
      for (const StarMask& m : star_masks) {
        const int bx0 = std::max(0, static_cast<int>(std::floor(m.x0 + sx_lo)));
        const int bx1 = std::min(config.width - 1,
                                 static_cast<int>(std::ceil(m.x0 + m.w / 4.0 + sx_hi)));
        const int by0 = std::max(0, static_cast<int>(std::floor(m.y0 + sy_lo)));
        const int by1 = std::min(config.height - 1,
                                 static_cast<int>(std::ceil(m.y0 + m.h / 4.0 + sy_hi)));
        for (int y = by0; y <= by1; ++y)
          for (int x = bx0; x <= bx1; ++x) {
            const bool was = m.at(x, y, shift_prev);
            const bool is = m.at(x, y, shift_next);
            if (was != is && !occluded(x, y))
              emit_pixel(step_events, rng, t0, config.step_us, x, y, is, config.event_density);
          }
      }
      for (const TableLine& line : config.lines) {
        const double half = 0.5 * line.thickness + 1.0;
        const int bx0 = std::max(
            0, static_cast<int>(std::floor(std::min(line.x0, line.x1) - half + sx_lo)));
        const int bx1 = std::min(config.width - 1, static_cast<int>(std::ceil(
                                     std::max(line.x0, line.x1) + half + sx_hi)));
        const int by0 = std::max(
            0, static_cast<int>(std::floor(std::min(line.y0, line.y1) - half + sy_lo)));
        const int by1 = std::min(config.height - 1, static_cast<int>(std::ceil(
                                     std::max(line.y0, line.y1) + half + sy_hi)));
        for (int y = by0; y <= by1; ++y)
          for (int x = bx0; x <= bx1; ++x) {
            const bool was = inside_line(line, x, y, shift_prev);
            const bool is = inside_line(line, x, y, shift_next);
            if (was != is && !occluded(x, y))
              emit_pixel(step_events, rng, t0, config.step_us, x, y, is, config.event_density);
          }
      }
    }

    // Sensor noise, uniform over the frame.
    const uint64_t noise_n = poisson(rng, noise_lambda);
    for (uint64_t i = 0; i < noise_n; ++i) {
      const int x = static_cast<int>(uniform01(rng) * config.width);
      const int y = static_cast<int>(uniform01(rng) * config.height);
      step_events.push_back(Event{stamp_in_step(rng, t0, config.step_us),
                                  static_cast<uint16_t>(std::min(x, config.width - 1)),
                                  static_cast<uint16_t>(std::min(y, config.height - 1)),
                                  uniform01(rng) < 0.5});
    }

    std::stable_sort(step_events.begin(), step_events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    result.events.insert(result.events.end(), step_events.begin(), step_events.end());

    puck_prev = puck_next;
    shift_prev = shift_next;
    paddle_prev_c = {paddle_at(t1_s).x, paddle_at(t1_s).y};
  }

  result.header.event_count = result.events.size();
  return result;
}

SceneConfig make_scene(ScenarioKind kind, uint64_t seed) {
  SceneConfig cfg;
  cfg.seed = seed;
  cfg.duration_s = 10.0;
  cfg.stars = {
      StarShape{170.0, 175.0, 22.0, 9.0, 5, 0.35},
      StarShape{470.0, 175.0, 22.0, 9.0, 5, 1.10},
      StarShape{170.0, 335.0, 22.0, 9.0, 5, 2.02},
      StarShape{470.0, 335.0, 22.0, 9.0, 5, 0.71},
      StarShape{320.0, 390.0, 20.0, 8.0, 5, 1.57},
  };
  cfg.paddle.enabled = true;
  cfg.paddle.phase = 0.6 * static_cast<double>(seed % 7);

  // Seed-varied launch: speed 450..730 px/s, heading swept across a diagonal
  // fan so every scene crosses the star band.
  const double speed = 450.0 + 40.0 * static_cast<double>(seed % 8);
  const double angle_deg = 20.0 + 17.0 * static_cast<double>(seed % 4) +
                           ((seed % 2 == 0) ? 0.0 : 90.0);
  const double angle = angle_deg * kTwoPi / 360.0;
  cfg.puck_vx = speed * std::cos(angle);
  cfg.puck_vy = speed * std::sin(angle);

  if (kind == ScenarioKind::Moving) {
    cfg.jitter.amp_deg = 6.0;
    cfg.jitter.px_per_deg = 6.0;
    cfg.jitter.period_s = 1.9;
    cfg.jitter.phase = 0.25 * static_cast<double>(seed % 5);
  }
  return cfg;
}

SceneConfig load_scene_config(const std::string& path) {
  KvConfig kv = KvConfig::parse_file(path);
  SceneConfig cfg;
  cfg.width = static_cast<int>(kv.get_int("width", cfg.width));
  cfg.height = static_cast<int>(kv.get_int("height", cfg.height));
  cfg.field.x = static_cast<int>(kv.get_int("field_x", cfg.field.x));
  cfg.field.y = static_cast<int>(kv.get_int("field_y", cfg.field.y));
  cfg.field.w = static_cast<int>(kv.get_int("field_w", cfg.field.w));
  cfg.field.h = static_cast<int>(kv.get_int("field_h", cfg.field.h));
  cfg.size.k0 = kv.get_double("size_k0", cfg.size.k0);
  cfg.size.k1 = kv.get_double("size_k1", cfg.size.k1);
  cfg.size.k2 = kv.get_double("size_k2", cfg.size.k2);
  cfg.size.h0 = kv.get_double("size_h0", cfg.size.h0);
  cfg.size.h1 = kv.get_double("size_h1", cfg.size.h1);
  cfg.size.h2 = kv.get_double("size_h2", cfg.size.h2);
  cfg.puck_x = kv.get_double("puck_x", cfg.puck_x);
  cfg.puck_y = kv.get_double("puck_y", cfg.puck_y);
  cfg.puck_vx = kv.get_double("puck_vx", cfg.puck_vx);
  cfg.puck_vy = kv.get_double("puck_vy", cfg.puck_vy);
  cfg.restitution = kv.get_double("restitution", cfg.restitution);
  cfg.noise_rate = kv.get_double("noise_rate", cfg.noise_rate);
  cfg.event_density = kv.get_double("event_density", cfg.event_density);
  cfg.duration_s = kv.get_double("duration_s", cfg.duration_s);
  cfg.seed = static_cast<uint64_t>(kv.get_int("seed", static_cast<long long>(cfg.seed)));
  cfg.step_us = static_cast<uint64_t>(kv.get_int("step_us", static_cast<long long>(cfg.step_us)));
  cfg.gt_period_us =
      static_cast<uint64_t>(kv.get_int("gt_period_us", static_cast<long long>(cfg.gt_period_us)));

  cfg.paddle.enabled = kv.get_bool("paddle_enabled", cfg.paddle.enabled);
  cfg.paddle.radius = kv.get_double("paddle_radius", cfg.paddle.radius);
  cfg.paddle.cx = kv.get_double("paddle_x", cfg.paddle.cx);
  cfg.paddle.cy = kv.get_double("paddle_y", cfg.paddle.cy);
  cfg.paddle.amp_x = kv.get_double("paddle_amp", cfg.paddle.amp_x);
  cfg.paddle.period_s = kv.get_double("paddle_period_s", cfg.paddle.period_s);
  cfg.paddle.phase = kv.get_double("paddle_phase", cfg.paddle.phase);

  cfg.jitter.amp_deg = kv.get_double("jitter_amp_deg", cfg.jitter.amp_deg);
  cfg.jitter.px_per_deg = kv.get_double("jitter_px_per_deg", cfg.jitter.px_per_deg);
  cfg.jitter.period_s = kv.get_double("jitter_period_s", cfg.jitter.period_s);
  cfg.jitter.phase = kv.get_double("jitter_phase", cfg.jitter.phase);
  cfg.jitter.amp_y_frac = kv.get_double("jitter_amp_y_frac", cfg.jitter.amp_y_frac);

  if (kv.has("stars")) {
    cfg.stars.clear();
    std::istringstream in(kv.get_string("stars"));
    std::string tuple;
    while (std::getline(in, tuple, ';')) {
      if (tuple.find_first_not_of(" \t") == std::string::npos) continue;
      StarShape s;
      int n = 0;
      if (sscanf(tuple.c_str(), " %lf , %lf , %lf , %lf , %d , %lf", &s.cx, &s.cy, &s.r_outer,
                 &s.r_inner, &n, &s.phase) != 6)
        throw ConfigError("bad star tuple: " + tuple);
      s.points = n;
      cfg.stars.push_back(s);
    }
  }
  cfg.validate();
  return cfg;
}

void save_scene_config(const SceneConfig& cfg, const std::string& path) {
  KvConfig kv;
  kv.set("width", static_cast<long long>(cfg.width));
  kv.set("height", static_cast<long long>(cfg.height));
  kv.set("field_x", static_cast<long long>(cfg.field.x));
  kv.set("field_y", static_cast<long long>(cfg.field.y));
  kv.set("field_w", static_cast<long long>(cfg.field.w));
  kv.set("field_h", static_cast<long long>(cfg.field.h));
  kv.set("size_k0", cfg.size.k0);
  kv.set("size_k1", cfg.size.k1);
  kv.set("size_k2", cfg.size.k2);
  kv.set("size_h0", cfg.size.h0);
  kv.set("size_h1", cfg.size.h1);
  kv.set("size_h2", cfg.size.h2);
  kv.set("puck_x", cfg.puck_x);
  kv.set("puck_y", cfg.puck_y);
  kv.set("puck_vx", cfg.puck_vx);
  kv.set("puck_vy", cfg.puck_vy);
  kv.set("restitution", cfg.restitution);
  kv.set("noise_rate", cfg.noise_rate);
  kv.set("event_density", cfg.event_density);
  kv.set("duration_s", cfg.duration_s);
  kv.set("seed", static_cast<long long>(cfg.seed));
  kv.set("step_us", static_cast<long long>(cfg.step_us));
  kv.set("gt_period_us", static_cast<long long>(cfg.gt_period_us));
  kv.set("paddle_enabled", std::string(cfg.paddle.enabled ? "true" : "false"));
  kv.set("paddle_radius", cfg.paddle.radius);
  kv.set("paddle_x", cfg.paddle.cx);
  kv.set("paddle_y", cfg.paddle.cy);
  kv.set("paddle_amp", cfg.paddle.amp_x);
  kv.set("paddle_period_s", cfg.paddle.period_s);
  kv.set("paddle_phase", cfg.paddle.phase);
  kv.set("jitter_amp_deg", cfg.jitter.amp_deg);
  kv.set("jitter_px_per_deg", cfg.jitter.px_per_deg);
  kv.set("jitter_period_s", cfg.jitter.period_s);
  kv.set("jitter_phase", cfg.jitter.phase);
  kv.set("jitter_amp_y_frac", cfg.jitter.amp_y_frac);
  std::string stars;
  char buf[160];
  for (const StarShape& s : cfg.stars) {
    snprintf(buf, sizeof(buf), "%s%.10g,%.10g,%.10g,%.10g,%d,%.10g", stars.empty() ? "" : "; ",
             s.cx, s.cy, s.r_outer, s.r_inner, s.points, s.phase);
    stars += buf;
  }
  if (!stars.empty()) kv.set("stars", stars);
  kv.save(path);
}

}  // namespace puck
