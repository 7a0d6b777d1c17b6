#include "puck/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "puck/config.hpp"
#include "puck/io.hpp"

namespace puck {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double idx = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(idx);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

AccuracyReport evaluate(std::span<const PuckReport> reports,
                        std::span<const GroundTruthSample> gt, double threshold_px) {
  if (reports.empty() || gt.empty())
    throw ValidationError("evaluate: reports and ground truth must be non-empty");

  std::vector<PuckReport> tracked;
  tracked.reserve(reports.size());
  for (const PuckReport& r : reports)
    if (r.mode == TrackMode::Tracking) tracked.push_back(r);
  if (tracked.empty()) throw ValidationError("evaluate: no Tracking-mode reports");

  // Full-row ordering so equal-timestamp rows associate identically no matter
  // how the input file was ordered.
  std::sort(tracked.begin(), tracked.end(), [](const PuckReport& a, const PuckReport& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.score < b.score;
  });

  const uint64_t t_begin = tracked.front().t;
  const uint64_t t_end = tracked.back().t;

  AccuracyReport acc;
  acc.threshold_px = threshold_px;
  size_t valid = 0;
  size_t cursor = 0;
  const PuckReport* last = nullptr;
  for (const GroundTruthSample& s : gt) {
    if (s.t < t_begin || s.t > t_end) continue;
    while (cursor < tracked.size() && tracked[cursor].t <= s.t) last = &tracked[cursor++];
    const double err = std::hypot(last->x - s.cx, last->y - s.cy);
    acc.errors.push_back(err);
    if (err <= threshold_px) ++valid;
  }
  if (acc.errors.empty())
    throw ValidationError("evaluate: no temporal overlap between reports and ground truth");

  std::vector<double> sorted = acc.errors;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double e : sorted) sum += e;
  acc.samples = sorted.size();
  acc.mean = sum / static_cast<double>(sorted.size());
  acc.median = quantile(sorted, 0.5);
  acc.q1 = quantile(sorted, 0.25);
  acc.q3 = quantile(sorted, 0.75);
  acc.max = sorted.back();
  acc.valid_pct = 100.0 * static_cast<double>(valid) / static_cast<double>(sorted.size());
  return acc;
}

std::vector<PuckReport> run_cluster_baseline(std::span<const Event> events,
                                             const PuckReport& seed, const ClusterConfig& cfg,
                                             uint64_t report_period_us) {
  std::vector<PuckReport> reports;
  ClusterState state;
  state.x = seed.x;
  state.y = seed.y;
  state.last_t = seed.t;

  uint64_t next_report = seed.t + report_period_us;
  uint64_t last_t = seed.t;
  for (const Event& e : events) {
    if (e.t <= seed.t) continue;  // events the detector already consumed
    while (e.t >= next_report) {
      reports.push_back(PuckReport{last_t, state.x, state.y, 0.0, TrackMode::Tracking});
      next_report += report_period_us;
    }
    cluster_update(state, cfg, e);
    last_t = e.t;
  }
  reports.push_back(PuckReport{last_t, state.x, state.y, 0.0, TrackMode::Tracking});
  return reports;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  nlohmann::json j;
  j["scenario"] = manifest.scenario;
  j["seed"] = manifest.seed;
  j["algorithm"] = manifest.algorithm;
  j["config_digests"] = manifest.config_digests;
  j["outputs"] = manifest.outputs;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

TrackerConfig default_tracker_config(const SceneConfig& scene) {
  TrackerConfig cfg;
  const int cx = scene.field.x + scene.field.w / 2;
  const int cy = scene.field.y + scene.field.h / 2;
  cfg.roi_d = Roi{cx - 36, cy - 30, 72, 60};
  return cfg;
}

KernelBank make_scene_bank(const SizeModel& model, const SceneConfig& scene) {
  const int sway_x = static_cast<int>(std::ceil(scene.jitter.amplitude_px())) + 2;
  const int sway_y =
      static_cast<int>(std::ceil(scene.jitter.amplitude_px() * scene.jitter.amp_y_frac)) + 2;
  Roi range{scene.field.x - sway_x, scene.field.y - sway_y, scene.field.w + 2 * sway_x,
            scene.field.h + 2 * sway_y};
  return KernelBank(model, range);
}

namespace {

SizeModel calibrate_from_gt(const std::vector<GroundTruthSample>& gt, const SceneConfig& scene) {
  std::vector<SizeObservation> obs;
  const size_t want = 60;
  const size_t stride = std::max<size_t>(1, gt.size() / want);
  for (size_t i = 0; i < gt.size(); i += stride)
    obs.push_back(SizeObservation{gt[i].cx, gt[i].cy, gt[i].a, gt[i].b});
  try {
    return fit_size_model(obs).model;
  } catch (const CalibrationError&) {
    // straight-line trajectory (no bounce yet): fall back to the generating model
    return scene.size;
  }
}

SuiteRow run_one(const std::string& scenario_id, ScenarioKind kind, uint64_t seed,
                 const SuiteOptions& opts) {
  SuiteRow row;
  row.scenario = scenario_id;
  row.algo = "puck";
  row.seed = seed;

  SceneConfig scene = make_scene(kind, seed);
  scene.duration_s = opts.duration_s;
  const SimResult sim = simulate(scene);

  const SizeModel model = calibrate_from_gt(sim.ground_truth, scene);
  const KernelBank bank = make_scene_bank(model, scene);
  PuckTracker tracker(default_tracker_config(scene), model, &bank);

  PipelineConfig pcfg;
  pcfg.mode = opts.mode;
  pcfg.realtime_factor = opts.realtime_factor;
  pcfg.k_eros = opts.k_eros;
  PipelineResult res = run_pipeline(sim.header, sim.events, tracker, pcfg);

  const double threshold =
      kind == ScenarioKind::Static ? opts.threshold_static_px : opts.threshold_moving_px;
  row.accuracy = evaluate(res.reports, sim.ground_truth, threshold);
  row.stats = std::move(res.stats);
  row.ok = true;

  if (!opts.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(opts.out_dir);
    const std::string base = opts.out_dir + "/" + scenario_id;
    write_ground_truth(sim.ground_truth, base + "_gt.csv");
    write_reports(res.reports, base + "_puck.csv", "puck");
    const std::string scene_path = base + "_scene.cfg";
    save_scene_config(scene, scene_path);

    RunManifest manifest;
    manifest.scenario = scenario_id;
    manifest.seed = seed;
    manifest.algorithm = "puck";
    std::ifstream sc(scene_path);
    std::string scene_text((std::istreambuf_iterator<char>(sc)), std::istreambuf_iterator<char>());
    char hex[32];
    snprintf(hex, sizeof(hex), "%016llx",
             static_cast<unsigned long long>(fnv1a64(scene_text)));
    manifest.config_digests["scene"] = hex;
    manifest.outputs["ground_truth"] = base + "_gt.csv";
    manifest.outputs["reports"] = base + "_puck.csv";
    write_manifest(manifest, base + "_puck.manifest.json");
  }
  return row;
}

SuiteRow run_one_cluster(const std::string& scenario_id, ScenarioKind kind, uint64_t seed,
                         const SuiteOptions& opts) {
  SuiteRow row;
  row.scenario = scenario_id;
  row.algo = "cluster";
  row.seed = seed;

  SceneConfig scene = make_scene(kind, seed);
  scene.duration_s = opts.duration_s;
  const SimResult sim = simulate(scene);

  const SizeModel model = calibrate_from_gt(sim.ground_truth, scene);
  const KernelBank bank = make_scene_bank(model, scene);
  PuckTracker tracker(default_tracker_config(scene), model, &bank);

  // The baseline has no detector; seed it from the first PUCK lock-on.
  PipelineConfig pcfg;
  pcfg.k_eros = opts.k_eros;
  PipelineResult det = run_pipeline(sim.header, sim.events, tracker, pcfg);
  const PuckReport* seed_report = nullptr;
  for (const PuckReport& r : det.reports) {
    if (r.mode == TrackMode::Tracking) {
      seed_report = &r;
      break;
    }
  }
  if (seed_report == nullptr) {
    row.error = "detector never locked on; cluster baseline has no seed";
    return row;
  }

  ClusterConfig ccfg;
  ccfg.gate_px = 1.5 * std::max(bank.a_max(), bank.b_max());
  const auto wall_start = std::chrono::steady_clock::now();
  std::vector<PuckReport> reports = run_cluster_baseline(sim.events, *seed_report, ccfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

  const double threshold =
      kind == ScenarioKind::Static ? opts.threshold_static_px : opts.threshold_moving_px;
  row.accuracy = evaluate(reports, sim.ground_truth, threshold);
  row.stats.stage1.processed = sim.events.size();
  row.stats.wall_seconds = wall;
  if (wall > 0.0)
    row.stats.throughput_eps = static_cast<double>(sim.events.size()) / wall;
  row.ok = true;

  if (!opts.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(opts.out_dir);
    write_reports(reports, opts.out_dir + "/" + scenario_id + "_cluster.csv", "cluster");
  }
  return row;
}

}  // namespace

std::vector<SuiteRow> run_suite(const SuiteOptions& options) {
  std::vector<SuiteRow> rows;
  auto run_kind = [&](ScenarioKind kind, const std::vector<uint64_t>& seeds, const char* prefix) {
    int idx = 0;
    for (uint64_t seed : seeds) {
      ++idx;
      const std::string id = std::string(prefix) + "-" + std::to_string(idx);
      if (options.run_puck) {
        try {
          rows.push_back(run_one(id, kind, seed, options));
        } catch (const std::exception& ex) {
          SuiteRow row;
          row.scenario = id;
          row.algo = "puck";
          row.seed = seed;
          row.error = ex.what();
          rows.push_back(row);
        }
      }
      if (options.run_cluster) {
        try {
          rows.push_back(run_one_cluster(id, kind, seed, options));
        } catch (const std::exception& ex) {
          SuiteRow row;
          row.scenario = id;
          row.algo = "cluster";
          row.seed = seed;
          row.error = ex.what();
          rows.push_back(row);
        }
      }
    }
  };
  run_kind(ScenarioKind::Static, options.static_seeds, "static");
  run_kind(ScenarioKind::Moving, options.moving_seeds, "moving");
  return rows;
}

std::string format_suite_table(std::span<const SuiteRow> rows) {
  std::ostringstream out;
  char line[256];
  snprintf(line, sizeof(line), "%-12s %-8s %6s %9s %9s %9s %8s %12s\n", "scenario", "algo",
           "seed", "mean_px", "median_px", "max_px", "valid%", "events/s");
  out << line;
  for (const SuiteRow& r : rows) {
    if (!r.ok) {
      snprintf(line, sizeof(line), "%-12s %-8s %6llu FAILED: %s\n", r.scenario.c_str(),
               r.algo.c_str(), static_cast<unsigned long long>(r.seed), r.error.c_str());
      out << line;
      continue;
    }
    snprintf(line, sizeof(line), "%-12s %-8s %6llu %9.3f %9.3f %9.2f %8.1f %12.0f\n",
             r.scenario.c_str(), r.algo.c_str(), static_cast<unsigned long long>(r.seed),
             r.accuracy.mean, r.accuracy.median, r.accuracy.max, r.accuracy.valid_pct,
             r.stats.throughput_eps);
    out << line;
  }
  return out.str();
}

std::string suite_csv(std::span<const SuiteRow> rows, bool with_timing) {
  std::ostringstream out;
  out << "scenario,algo,seed,ok,samples,mean_px,median_px,q1_px,q3_px,max_px,valid_pct,"
         "threshold_px";
  if (with_timing) out << ",throughput_eps,pass_rate_hz";
  out << "\n";
  char line[320];
  for (const SuiteRow& r : rows) {
    snprintf(line, sizeof(line), "%s,%s,%llu,%d,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.3f,%.2f",
             r.scenario.c_str(), r.algo.c_str(), static_cast<unsigned long long>(r.seed),
             r.ok ? 1 : 0, r.accuracy.samples, r.accuracy.mean, r.accuracy.median, r.accuracy.q1,
             r.accuracy.q3, r.accuracy.max, r.accuracy.valid_pct, r.accuracy.threshold_px);
    out << line;
    if (with_timing) {
      snprintf(line, sizeof(line), ",%.1f,%.1f", r.stats.throughput_eps, r.stats.stage2.rate_hz);
      out << line;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace puck
