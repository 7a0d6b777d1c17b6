#pragma once

#include <cmath>
#include <cstdint>

#include "puck/types.hpp"

namespace puck {

/// Event-by-event cluster tracker baseline. Events farther than the gate from
/// the current position are ignored; all others pull position and extent by
/// an exponential update. Deliberately not discriminative toward the puck —
/// that failure mode is the point of the comparison.
struct ClusterConfig {
  double beta = 0.05;       // update weight, (0,1)
  double gate_px = 16.0;    // admission radius
};

struct ClusterState {
  double x = 0.0, y = 0.0;      // position estimate
  double var_x = 0.0, var_y = 0.0;  // extent estimate (EW squared deviations)
  uint64_t last_t = 0;
  uint64_t accepted = 0, ignored = 0;

  double sigma_x() const { return std::sqrt(var_x); }
  double sigma_y() const { return std::sqrt(var_y); }
};

/// Applies one event. Constant cost: a distance test plus a few multiplies.
inline void cluster_update(ClusterState& state, const ClusterConfig& cfg, const Event& e) {
  const double dx = e.x - state.x;
  const double dy = e.y - state.y;
  if (dx * dx + dy * dy > cfg.gate_px * cfg.gate_px) {
    ++state.ignored;
    return;
  }
  state.var_x = (1.0 - cfg.beta) * state.var_x + cfg.beta * dx * dx;
  state.var_y = (1.0 - cfg.beta) * state.var_y + cfg.beta * dy * dy;
  state.x += cfg.beta * dx;
  state.y += cfg.beta * dy;
  state.last_t = e.t;
  ++state.accepted;
}

}  // namespace puck
