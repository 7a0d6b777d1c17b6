#pragma once

#include <random>
#include <string>
#include <vector>

#include "puck/kernel.hpp"
#include "puck/types.hpp"

namespace puck {

/// Puck silhouette at one instant: sub-pixel center and half-axes.
struct EllipsePose {
  double cx = 0.0, cy = 0.0;
  double a = 0.0, b = 0.0;
};

/// Star polygon printed on the table (table frame). Rendered with alternating
/// outer/inner vertices; emits events only under apparent camera motion.
struct StarShape {
  double cx = 0.0, cy = 0.0;
  double r_outer = 20.0, r_inner = 8.0;
  int points = 5;
  double phase = 0.0;
};

/// Straight line printed on the table (table frame).
struct TableLine {
  double x0 = 0.0, y0 = 0.0;
  double x1 = 0.0, y1 = 0.0;
  double thickness = 3.0;
};

/// Opponent paddle: a disc oscillating horizontally near the far end.
struct PaddleConfig {
  bool enabled = false;
  double radius = 13.0;
  double cx = 320.0, cy = 62.0;  // oscillation center
  double amp_x = 140.0;          // pixels
  double period_s = 2.3;
  double phase = 0.0;
};

/// Rally dynamics: the puck decelerates under drag and gets hit back up to
/// speed periodically, reproducing play against an opponent.
struct RallyConfig {
  double drag_per_s = 0.0;      // speed *= exp(-drag * dt)
  double hit_period_s = 2.0;    // 0 disables hits
  double hit_speed_min = 550.0;
  double hit_speed_max = 750.0;
};

/// Sinusoidal global image translation standing in for head yaw.
struct JitterConfig {
  double amp_deg = 0.0;         // yaw oscillation amplitude
  double px_per_deg = 6.0;      // image-plane scale of yaw
  double period_s = 1.9;
  double phase = 0.0;
  double amp_y_frac = 0.0;      // vertical sway as a fraction of horizontal

  double amplitude_px() const { return amp_deg * px_per_deg; }
};

struct SceneConfig {
  int width = 640, height = 480;
  /// Bounds for the puck center; walls reflect the center specularly.
  Roi field{60, 90, 520, 330};
  /// Generating projection model: image position -> projected half-axes.
  SizeModel size{5.5, 0.0005, 0.012, 4.0, 0.0003, 0.010};
  double puck_x = 320.0, puck_y = 255.0;  // initial center
  double puck_vx = 450.0, puck_vy = 310.0;  // px/s
  double restitution = 0.96;                // wall-normal velocity scale, (0,1]
  RallyConfig rally;
  std::vector<StarShape> stars;
  std::vector<TableLine> lines;
  PaddleConfig paddle;
  JitterConfig jitter;
  double noise_rate = 0.05;     // events / s / pixel, uniform
  double event_density = 1.2;   // events per changed silhouette pixel
  double duration_s = 10.0;
  uint64_t seed = 1;
  uint64_t step_us = 1000;      // internal simulation step
  uint64_t gt_period_us = 1000; // ground truth sampling period

  void validate() const;
};

struct SimResult {
  StreamHeader header;
  std::vector<Event> events;
  std::vector<GroundTruthSample> ground_truth;
};

/// Generates the event stream and exact ground truth for a scene. Identical
/// (config, seed) yield bit-identical output. Events are sorted by t; ground
/// truth is sampled every gt_period_us starting at t=0.
SimResult simulate(const SceneConfig& config);

/// Events for one simulation step of the puck silhouette: one burst per pixel
/// whose ellipse membership differs between the two poses, timestamps uniform
/// in (t0, t0+dt]. Gained pixels emit ON, lost pixels OFF. Returned sorted.
std::vector<Event> render_silhouette_events(const EllipsePose& prev, const EllipsePose& next,
                                            uint64_t t0_us, uint64_t dt_us, double density,
                                            int width, int height, std::mt19937_64& rng);

enum class ScenarioKind { Static, Moving };

/// Scenario presets mirroring the two benchmark conditions: a static camera
/// with an opponent paddle distractor, and a moving camera that additionally
/// lights up the star patterns. The seed varies the puck launch.
SceneConfig make_scene(ScenarioKind kind, uint64_t seed);

SceneConfig load_scene_config(const std::string& path);
void save_scene_config(const SceneConfig& config, const std::string& path);

}  // namespace puck
