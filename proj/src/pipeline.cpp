#include "puck/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "puck/eros.hpp"

namespace puck {

namespace {

using Clock = std::chrono::steady_clock;

uint64_t elapsed_us(Clock::time_point since) {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - since).count());
}

PipelineResult run_sequential(const StreamHeader& header, std::span<const Event> events,
                              PuckTracker& tracker, const PipelineConfig& cfg) {
  PipelineResult result;
  ErosSurface surface(static_cast<int>(header.width), static_cast<int>(header.height),
                      cfg.k_eros);
  const auto wall_start = Clock::now();

  uint64_t last_t = 0;
  uint64_t next_pass_t = cfg.pass_period_us;
  uint64_t passes = 0;
  for (const Event& e : events) {
    while (cfg.stage2_enabled && e.t >= next_pass_t) {
      result.reports.push_back(tracker.pass(surface, last_t));
      ++passes;
      next_pass_t += cfg.pass_period_us;
    }
    surface.update(e);
    last_t = e.t;
  }
  if (cfg.stage2_enabled && !events.empty()) {
    result.reports.push_back(tracker.pass(surface, last_t));  // drain
    ++passes;
  }

  const double wall = static_cast<double>(elapsed_us(wall_start)) * 1e-6;
  result.stats.wall_seconds = wall;
  result.stats.stage1.processed = events.size();
  result.stats.stage2.processed = passes;
  if (wall > 0.0) {
    result.stats.stage1.rate_hz = static_cast<double>(events.size()) / wall;
    result.stats.stage2.rate_hz = static_cast<double>(passes) / wall;
    result.stats.throughput_eps = result.stats.stage1.rate_hz;
  }
  return result;
}

PipelineResult run_parallel(const StreamHeader& header, std::span<const Event> events,
                            PuckTracker& tracker, const PipelineConfig& cfg) {
  PipelineResult result;
  ErosSurface surface(static_cast<int>(header.width), static_cast<int>(header.height),
                      cfg.k_eros);

  const uint64_t end_t = events.back().t;
  const bool realtime = cfg.realtime_factor > 0.0;
  std::atomic<uint64_t> newest_incorporated{0};
  std::atomic<bool> done{false};

  LatencyProbe stage1_probe;
  stage1_probe.available.store(realtime ? 0 : end_t, std::memory_order_relaxed);

  std::vector<uint64_t> stage1_backlog;
  std::vector<uint64_t> stage2_backlog;
  std::vector<PuckReport> reports;
  uint64_t passes = 0;

  const auto wall_start = Clock::now();
  auto available_at = [&]() -> uint64_t {
    if (!realtime) return end_t;
    const double t = static_cast<double>(elapsed_us(wall_start)) * cfg.realtime_factor;
    return t >= static_cast<double>(end_t) ? end_t : static_cast<uint64_t>(t);
  };

  std::thread stage2;
  if (cfg.stage2_enabled) {
    stage2 = std::thread([&] {
      while (!done.load(std::memory_order_acquire)) {
        const uint64_t t_snap = newest_incorporated.load(std::memory_order_acquire);
        reports.push_back(tracker.pass(surface, t_snap));
        ++passes;
        if (realtime) {
          const uint64_t a = available_at();
          stage2_backlog.push_back(a > t_snap ? a - t_snap : 0);
        }
      }
      // drain: one pass over the fully updated surface
      const uint64_t t_snap = newest_incorporated.load(std::memory_order_acquire);
      reports.push_back(tracker.pass(surface, t_snap));
      ++passes;
    });
  }

  // Stage 1: the event-consuming surface writer.
  {
    size_t i = 0;
    uint64_t last_t = 0;
    uint64_t next_sample = cfg.sample_interval_us;
    while (i < events.size()) {
      const uint64_t avail = available_at();
      stage1_probe.available.store(avail, std::memory_order_relaxed);
      if (events[i].t > avail) {
        if (realtime && elapsed_us(wall_start) >= next_sample) {
          stage1_backlog.push_back(stage1_probe.backlog_us());
          next_sample += cfg.sample_interval_us;
        }
        std::this_thread::sleep_for(std::chrono::microseconds(40));
        continue;
      }
      while (i < events.size() && events[i].t <= avail) {
        surface.update(events[i]);
        last_t = events[i].t;
        newest_incorporated.store(last_t, std::memory_order_release);
        ++i;
      }
      stage1_probe.processed.store(last_t, std::memory_order_relaxed);
      if (realtime && elapsed_us(wall_start) >= next_sample) {
        stage1_probe.available.store(available_at(), std::memory_order_relaxed);
        stage1_backlog.push_back(stage1_probe.backlog_us());
        next_sample += cfg.sample_interval_us;
      }
    }
    done.store(true, std::memory_order_release);
  }
  const double stage1_wall = static_cast<double>(elapsed_us(wall_start)) * 1e-6;
  if (stage2.joinable()) stage2.join();
  const double wall = static_cast<double>(elapsed_us(wall_start)) * 1e-6;

  result.reports = std::move(reports);
  result.stats.wall_seconds = wall;
  result.stats.stage1.processed = events.size();
  result.stats.stage1.backlog_us = std::move(stage1_backlog);
  result.stats.stage2.processed = passes;
  result.stats.stage2.backlog_us = std::move(stage2_backlog);
  if (stage1_wall > 0.0) {
    result.stats.stage1.rate_hz = static_cast<double>(events.size()) / stage1_wall;
    result.stats.throughput_eps = result.stats.stage1.rate_hz;
  }
  if (wall > 0.0) result.stats.stage2.rate_hz = static_cast<double>(passes) / wall;
  return result;
}

}  // namespace

LatencySummary summarize_latency(std::span<const uint64_t> samples) {
  LatencySummary s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::vector<uint64_t> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (uint64_t v : sorted) sum += static_cast<double>(v);
  s.mean_us = sum / static_cast<double>(sorted.size());
  auto quantile = [&](double q) {
    const double idx = q * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(idx);
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = idx - static_cast<double>(lo);
    return static_cast<double>(sorted[lo]) * (1.0 - frac) + static_cast<double>(sorted[hi]) * frac;
  };
  s.median_us = quantile(0.5);
  s.p99_us = quantile(0.99);
  s.max_us = static_cast<double>(sorted.back());
  return s;
}

PipelineResult run_pipeline(const StreamHeader& header, std::span<const Event> events,
                            PuckTracker& tracker, const PipelineConfig& config) {
  tracker.reset();
  if (events.empty()) {
    PipelineResult empty;
    return empty;
  }
  return config.mode == PipelineMode::Sequential
             ? run_sequential(header, events, tracker, config)
             : run_parallel(header, events, tracker, config);
}

}  // namespace puck
