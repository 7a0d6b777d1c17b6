#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "puck/tracker.hpp"
#include "puck/types.hpp"

namespace puck {

/// Event-time backlog probe: the temporal period of events a stage has not
/// yet consumed. `available` is the newest event timestamp the source has
/// released; `processed` is the newest timestamp the stage has incorporated.
struct LatencyProbe {
  std::atomic<uint64_t> available{0};
  std::atomic<uint64_t> processed{0};

  uint64_t backlog_us() const {
    const uint64_t a = available.load(std::memory_order_relaxed);
    const uint64_t p = processed.load(std::memory_order_relaxed);
    return a > p ? a - p : 0;
  }
};

inline uint64_t measure_latency(const LatencyProbe& probe) { return probe.backlog_us(); }

enum class PipelineMode { Sequential, Parallel };

struct PipelineConfig {
  PipelineMode mode = PipelineMode::Sequential;
  /// Event time per wall time. 0 releases everything at once
  /// (as-fast-as-possible); 1.0 replays at the recorded rate.
  double realtime_factor = 0.0;
  /// Sequential mode: run one tracker pass per this much event time.
  uint64_t pass_period_us = 1000;
  /// Parallel mode: when false, only stage 1 runs (throughput baseline).
  bool stage2_enabled = true;
  int k_eros = 8;
  /// Wall-clock cadence of backlog sampling in real-time playback.
  uint64_t sample_interval_us = 200;
};

struct LatencySummary {
  double mean_us = 0.0, median_us = 0.0, p99_us = 0.0, max_us = 0.0;
  size_t count = 0;
};

LatencySummary summarize_latency(std::span<const uint64_t> samples);

struct StageStats {
  uint64_t processed = 0;              // events (stage 1) or passes (stage 2)
  double rate_hz = 0.0;                // processed per wall second
  std::vector<uint64_t> backlog_us;    // event-time latency samples
};

struct PipelineStats {
  StageStats stage1;
  StageStats stage2;
  double wall_seconds = 0.0;
  double throughput_eps = 0.0;  // stage-1 events per wall second
  uint64_t dropped = 0;         // always 0: stage 1 is lossless by contract
};

struct PipelineResult {
  std::vector<PuckReport> reports;
  PipelineStats stats;
};

/// Runs the two-stage pipeline over an ordered event stream.
///
/// Stage 1 applies every event to the EROS surface in order, exactly once.
/// Stage 2 runs tracker passes on the live surface; each report carries the
/// newest event timestamp incorporated before its pass began.
///
/// Sequential mode interleaves the stages deterministically (one pass per
/// pass_period_us of event time) and is bit-reproducible. Parallel mode runs
/// the stages on two threads coupled only through the surface and the
/// newest-timestamp word; with a realtime factor it also collects the
/// event-time backlog samples of both stages.
PipelineResult run_pipeline(const StreamHeader& header, std::span<const Event> events,
                            PuckTracker& tracker, const PipelineConfig& config);

}  // namespace puck
