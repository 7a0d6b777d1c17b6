#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "puck/cluster.hpp"
#include "puck/pipeline.hpp"
#include "puck/sim.hpp"
#include "puck/types.hpp"

namespace puck {

/// Tracking accuracy against ground truth: Euclidean error at each GT sample
/// inside the tracked interval, associating the most recent Tracking-mode
/// report at or before the sample time.
struct AccuracyReport {
  std::vector<double> errors;  // pixels, one per associated GT sample
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0, q3 = 0.0;
  double max = 0.0;
  double valid_pct = 0.0;  // percentage of errors <= threshold_px
  double threshold_px = 0.0;
  size_t samples = 0;
};

/// Throws ValidationError when the reports contain no Tracking rows or no GT
/// sample falls inside the tracked interval. Association is independent of
/// input row order: rows are re-sorted with full-row tie-breaking.
AccuracyReport evaluate(std::span<const PuckReport> reports,
                        std::span<const GroundTruthSample> gt, double threshold_px);

/// Replays an event stream through the cluster baseline, seeded from the
/// detector position, emitting one report per report_period_us of event time.
std::vector<PuckReport> run_cluster_baseline(std::span<const Event> events,
                                             const PuckReport& seed, const ClusterConfig& cfg,
                                             uint64_t report_period_us = 1000);

struct RunManifest {
  std::string scenario;
  uint64_t seed = 0;
  std::string algorithm;
  std::map<std::string, std::string> config_digests;  // name -> fnv1a64 hex
  std::map<std::string, std::string> outputs;         // name -> path
};

void write_manifest(const RunManifest& manifest, const std::string& path);

/// Tracker configuration matched to a scene: detection zone centered on the
/// field, default thresholds.
TrackerConfig default_tracker_config(const SceneConfig& scene);

/// Kernel bank covering the apparent-position range of a scene (field plus
/// jitter sway).
KernelBank make_scene_bank(const SizeModel& model, const SceneConfig& scene);

struct SuiteOptions {
  std::vector<uint64_t> static_seeds{1, 2, 3, 4};
  std::vector<uint64_t> moving_seeds{1, 2, 3, 4};
  double duration_s = 10.0;
  PipelineMode mode = PipelineMode::Sequential;
  double realtime_factor = 0.0;
  int k_eros = 8;
  bool run_puck = true;
  bool run_cluster = true;
  double threshold_static_px = 3.5;
  double threshold_moving_px = 4.0;
  std::string out_dir;  // when non-empty, per-run CSVs and manifests land here
};

struct SuiteRow {
  std::string scenario;
  std::string algo;
  uint64_t seed = 0;
  bool ok = false;
  std::string error;
  AccuracyReport accuracy;
  PipelineStats stats;
};

/// Runs every (scenario, algorithm) combination sequentially; failed runs are
/// recorded as rows and the suite continues.
std::vector<SuiteRow> run_suite(const SuiteOptions& options);

std::string format_suite_table(std::span<const SuiteRow> rows);

/// Machine-readable summary. The accuracy columns are a pure function of
/// (configs, seeds) in sequential mode; wall-clock columns (throughput, pass
/// rate) are appended only when with_timing is set.
std::string suite_csv(std::span<const SuiteRow> rows, bool with_timing = true);

}  // namespace puck
