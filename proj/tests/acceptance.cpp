// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. An optional argv list of criterion numbers restricts the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "puck/eval.hpp"
#include "puck/io.hpp"
#include "puck/pipeline.hpp"
#include "puck/sim.hpp"
#include "puck/tracker.hpp"

using namespace puck;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// --------------------------------------------------------------------------
// 1. EROS decay law

Outcome criterion1() {
  std::mt19937_64 rng(101);
  const int w = 64, h = 48;
  for (int k : {2, 4, 8}) {
    // the 0.3x law: k decays shrink a saturated cell to 76..77
    ErosSurface probe(w, h, k);
    probe.update(30, 30);
    for (int i = 0; i < k; ++i) probe.update(30 + k, 30);
    const double target = 0.3 * 255.0;
    if (std::abs(probe.at(30, 30) - target) > 1.0)
      return {false, fmt("k=%d: %d not within 1 of %.1f", k, probe.at(30, 30), target)};

    for (int seq = 0; seq < 334; ++seq) {
      ErosSurface s(w, h, k);
      oracle::ShadowEros shadow(w, h, k);
      const int n = 120 + static_cast<int>(rng() % 200);
      for (int i = 0; i < n; ++i) {
        const int x = static_cast<int>(rng() % w);
        const int y = static_cast<int>(rng() % h);
        s.update(x, y);
        shadow.update(x, y);
      }
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const int got = s.at(x, y);
          const int want = shadow.at(x, y);
          if (got < 0 || got > 255) return {false, fmt("cell out of range: %d", got)};
          if (got != want)
            return {false, fmt("k=%d seq=%d cell (%d,%d): got %d, oracle %d", k, seq, x, y,
                               got, want)};
        }
    }
  }
  return {true, "1002 random sequences, k in {2,4,8}, exact match + 0.3x law"};
}

// --------------------------------------------------------------------------
// 2. Convolution oracle

Outcome criterion2() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = 2.0 + static_cast<double>(rng() % 131) / 10.0;  // up to 15.0
    const double b = 2.0 + static_cast<double>(rng() % 131) / 10.0;
    PuckKernel kernel = build_kernel(a, b);
    Patch patch;
    patch.w = kernel.width() + 1 + static_cast<int>(rng() % 16);
    patch.h = kernel.height() + 1 + static_cast<int>(rng() % 16);
    patch.data.resize(static_cast<size_t>(patch.w) * patch.h);
    for (double& v : patch.data) v = static_cast<double>(rng() % 25500) / 100.0;

    ResponseMap got = convolve(patch, kernel);
    ResponseMap want = oracle::convolve(patch, kernel);
    for (size_t i = 0; i < got.data.size(); ++i) {
      const double err = std::abs(got.data[i] - want.data[i]);
      worst = std::max(worst, err);
      if (err >= 1e-9)
        return {false, fmt("trial %d: |impl-oracle| = %.3g >= 1e-9", trial, err)};
    }
  }
  return {true, fmt("100 random patch/kernel pairs, worst |impl-oracle| = %.2g", worst)};
}

// --------------------------------------------------------------------------
// 3. Regression recovery

Outcome criterion3() {
  const SizeModel truth{5.5, 0.0005, 0.012, 4.0, 0.0003, 0.010};
  std::mt19937_64 rng(303);

  std::vector<SizeObservation> clean;
  for (int i = 0; i < 40; ++i) {
    const double x = static_cast<double>(rng() % 640);
    const double y = static_cast<double>(rng() % 480);
    auto [a, b] = truth.predict(x, y);
    clean.push_back({x, y, a, b});
  }
  SizeFit fit = fit_size_model(clean);
  const double coef_err = std::max(
      {std::abs(fit.model.k0 - truth.k0), std::abs(fit.model.k1 - truth.k1),
       std::abs(fit.model.k2 - truth.k2), std::abs(fit.model.h0 - truth.h0),
       std::abs(fit.model.h1 - truth.h1), std::abs(fit.model.h2 - truth.h2)});
  if (coef_err >= 1e-6) return {false, fmt("noiseless coefficient error %.3g >= 1e-6", coef_err)};

  std::normal_distribution<double> noise(0.0, 0.5);
  std::vector<SizeObservation> noisy;
  for (int i = 0; i < 50; ++i) {
    const double x = static_cast<double>(rng() % 640);
    const double y = static_cast<double>(rng() % 480);
    auto [a, b] = truth.predict(x, y);
    noisy.push_back({x, y, a + noise(rng), b + noise(rng)});
  }
  SizeFit nfit = fit_size_model(noisy);
  double worst = 0.0;
  for (int y = 0; y < 480; y += 16)
    for (int x = 0; x < 640; x += 16) {
      auto [pa, pb] = nfit.model.predict(x, y);
      auto [ta, tb] = truth.predict(x, y);
      worst = std::max({worst, std::abs(pa - ta), std::abs(pb - tb)});
    }
  if (worst >= 1.0)
    return {false, fmt("noisy-fit prediction error %.3f px >= 1 px", worst)};
  return {true, fmt("noiseless %.2g, noisy prediction error %.3f px", coef_err, worst)};
}

// --------------------------------------------------------------------------
// 4/5. Scenario accuracy

struct PooledAccuracy {
  std::vector<double> puck_errors;
  std::vector<double> cluster_errors;
  std::string failure;
};

PooledAccuracy run_scenarios(ScenarioKind kind, bool with_cluster) {
  PooledAccuracy pooled;
  SuiteOptions opts;
  opts.duration_s = 10.0;
  opts.run_cluster = with_cluster;
  if (kind == ScenarioKind::Static) {
    opts.moving_seeds.clear();
  } else {
    opts.static_seeds.clear();
  }
  std::vector<SuiteRow> rows = run_suite(opts);
  for (const SuiteRow& row : rows) {
    if (!row.ok) {
      pooled.failure = row.scenario + "/" + row.algo + ": " + row.error;
      return pooled;
    }
    auto& dst = row.algo == "puck" ? pooled.puck_errors : pooled.cluster_errors;
    dst.insert(dst.end(), row.accuracy.errors.begin(), row.accuracy.errors.end());
  }
  return pooled;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double pct_within(const std::vector<double>& v, double thr) {
  if (v.empty()) return 0.0;
  size_t c = 0;
  for (double x : v)
    if (x <= thr) ++c;
  return 100.0 * static_cast<double>(c) / static_cast<double>(v.size());
}

Outcome criterion4() {
  PooledAccuracy pooled = run_scenarios(ScenarioKind::Static, false);
  if (!pooled.failure.empty()) return {false, pooled.failure};
  const double mean = mean_of(pooled.puck_errors);
  const double valid = pct_within(pooled.puck_errors, 3.5);
  const bool pass = mean <= 3.0 && valid >= 80.0;
  return {pass, fmt("4 static scenes: mean %.3f px (<= 3.0), %.1f%% within 3.5 px (>= 80), n=%zu",
                    mean, valid, pooled.puck_errors.size())};
}

Outcome criterion5() {
  PooledAccuracy pooled = run_scenarios(ScenarioKind::Moving, true);
  if (!pooled.failure.empty()) return {false, pooled.failure};
  const double mean = mean_of(pooled.puck_errors);
  const double valid = pct_within(pooled.puck_errors, 4.0);
  const double puck_median = median_of(pooled.puck_errors);
  const double cluster_median = median_of(pooled.cluster_errors);
  const double ratio = puck_median > 0.0 ? cluster_median / puck_median : 1e9;
  const bool pass = mean <= 4.0 && valid >= 80.0 && ratio >= 5.0;
  return {pass,
          fmt("4 moving scenes: mean %.3f px (<= 4.0), %.1f%% within 4 px (>= 80), "
              "cluster/puck median %.1fx (>= 5): %.2f / %.2f px",
              mean, valid, ratio, cluster_median, puck_median)};
}

// --------------------------------------------------------------------------
// 6. Throughput and decoupling

Outcome criterion6() {
  SceneConfig scene = make_scene(ScenarioKind::Moving, 2);
  scene.duration_s = 10.0;
  SimResult sim = simulate(scene);

  // tile the stream to a sustained multi-second load
  std::vector<Event> events;
  const uint64_t span = sim.header.duration_us;
  const int tiles = static_cast<int>(1 + 8000000 / std::max<size_t>(sim.events.size(), 1));
  events.reserve(sim.events.size() * tiles);
  for (int rep = 0; rep < tiles; ++rep)
    for (Event e : sim.events) {
      e.t += static_cast<uint64_t>(rep) * span;
      events.push_back(e);
    }

  const SizeModel model = scene.size;
  KernelBank bank = make_scene_bank(model, scene);
  PuckTracker tracker(default_tracker_config(scene), model, &bank);

  PipelineConfig cfg;
  cfg.mode = PipelineMode::Parallel;
  cfg.stage2_enabled = false;
  PipelineResult solo = run_pipeline(sim.header, events, tracker, cfg);

  cfg.stage2_enabled = true;
  PipelineResult both = run_pipeline(sim.header, events, tracker, cfg);

  const double eps_solo = solo.stats.throughput_eps;
  const double eps_both = both.stats.throughput_eps;
  const double degradation = (eps_solo - eps_both) / eps_solo * 100.0;
  const bool pass = eps_solo >= 5e6 && eps_both > 0.8 * eps_solo;
  return {pass,
          fmt("%zu events: stage1 alone %.2f Mev/s (>= 5), with stage2 %.2f Mev/s "
              "(degradation %.1f%% < 20%%)",
              events.size(), eps_solo / 1e6, eps_both / 1e6, degradation)};
}

// --------------------------------------------------------------------------
// 7. Tracker output rate and stage-1 backlog

Outcome criterion7() {
  // 7a: real-time moving-scene playback, stage-2 pass rate
  SceneConfig scene = make_scene(ScenarioKind::Moving, 1);
  scene.duration_s = 6.0;
  SimResult sim = simulate(scene);
  const SizeModel model = scene.size;
  KernelBank bank = make_scene_bank(model, scene);

  const int roi_w = static_cast<int>(std::lround(1.5 * (2 * bank.max_half_w() + 1)));
  const int roi_h = static_cast<int>(std::lround(1.5 * (2 * bank.max_half_h() + 1)));
  if (roi_w > 64 || roi_h > 64)
    return {false, fmt("ROI_t %dx%d exceeds the 64x64 premise", roi_w, roi_h)};

  PuckTracker tracker(default_tracker_config(scene), model, &bank);
  PipelineConfig cfg;
  cfg.mode = PipelineMode::Parallel;
  cfg.realtime_factor = 1.0;
  PipelineResult live = run_pipeline(sim.header, sim.events, tracker, cfg);
  const double pass_rate = live.stats.stage2.rate_hz;

  // 7b: stage-1 backlog under a 2 Mev/s synthetic load
  const uint64_t n_load = 5000000;
  std::vector<Event> load;
  load.reserve(n_load);
  std::mt19937_64 rng(707);
  for (uint64_t i = 0; i < n_load; ++i)
    load.push_back(Event{i / 2, static_cast<uint16_t>(rng() % 640),
                         static_cast<uint16_t>(rng() % 480), true});
  StreamHeader header;
  header.event_count = n_load;
  header.duration_us = load.back().t;

  PuckTracker tracker2(default_tracker_config(scene), model, &bank);
  PipelineResult stress = run_pipeline(header, load, tracker2, cfg);
  const LatencySummary backlog = summarize_latency(stress.stats.stage1.backlog_us);

  const bool pass = pass_rate >= 1000.0 && backlog.p99_us <= 1000.0;
  return {pass,
          fmt("ROI_t %dx%d, pass rate %.0f /s (>= 1000); 2 Mev/s backlog p99 %.0f us "
              "(<= 1000, mean %.0f, max %.0f, n=%zu)",
              roi_w, roi_h, pass_rate, backlog.p99_us, backlog.mean_us, backlog.max_us,
              backlog.count)};
}

// --------------------------------------------------------------------------
// 8. Determinism and concurrent agreement

Outcome criterion8() {
  SuiteOptions opts;
  opts.static_seeds = {1};
  opts.moving_seeds = {2};
  opts.duration_s = 4.0;
  std::vector<SuiteRow> first = run_suite(opts);
  std::vector<SuiteRow> second = run_suite(opts);
  if (suite_csv(first, false) != suite_csv(second, false))
    return {false, "sequential suite rerun differs"};
  for (const SuiteRow& row : first)
    if (!row.ok) return {false, row.scenario + "/" + row.algo + ": " + row.error};

  // concurrent trajectories vs the sequential reference
  for (ScenarioKind kind : {ScenarioKind::Static, ScenarioKind::Moving}) {
    SceneConfig scene = make_scene(kind, kind == ScenarioKind::Static ? 1 : 2);
    scene.duration_s = 4.0;
    SimResult sim = simulate(scene);
    const SizeModel model = scene.size;
    KernelBank bank = make_scene_bank(model, scene);
    PuckTracker tracker(default_tracker_config(scene), model, &bank);

    PipelineConfig seq_cfg;
    PipelineResult seq = run_pipeline(sim.header, sim.events, tracker, seq_cfg);
    PipelineConfig par_cfg;
    par_cfg.mode = PipelineMode::Parallel;
    par_cfg.realtime_factor = 4.0;
    PipelineResult par = run_pipeline(sim.header, sim.events, tracker, par_cfg);

    std::vector<PuckReport> seq_track, par_track;
    for (const auto& r : seq.reports)
      if (r.mode == TrackMode::Tracking) seq_track.push_back(r);
    for (const auto& r : par.reports)
      if (r.mode == TrackMode::Tracking) par_track.push_back(r);
    if (seq_track.empty() || par_track.empty())
      return {false, "a mode produced no tracking reports"};

    double sum = 0.0;
    size_t n = 0;
    size_t cursor = 0;
    for (const auto& r : par_track) {
      while (cursor + 1 < seq_track.size() && seq_track[cursor + 1].t <= r.t) ++cursor;
      if (seq_track[cursor].t > r.t) continue;
      sum += std::hypot(r.x - seq_track[cursor].x, r.y - seq_track[cursor].y);
      ++n;
    }
    const double budget = kind == ScenarioKind::Static ? 3.0 : 4.0;
    const double mean = n > 0 ? sum / static_cast<double>(n) : 1e9;
    if (mean > budget)
      return {false, fmt("%s: par-vs-seq mean distance %.3f px > %.1f px",
                         kind == ScenarioKind::Static ? "static" : "moving", mean, budget)};
  }
  return {true, "suite rerun bit-identical; par-vs-seq trajectories within the error budgets"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  Outcome (*fn)();
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion criteria[] = {
      {1, "EROS decay law vs multiply-truncate oracle", 10.0, criterion1},
      {2, "convolution vs brute-force oracle (1e-9)", 30.0, criterion2},
      {3, "size regression recovery", 1.0, criterion3},
      {4, "static-scenario accuracy", 120.0, criterion4},
      {5, "moving-scenario accuracy and cluster contrast", 120.0, criterion5},
      {6, "stage-1 throughput and decoupling", 60.0, criterion6},
      {7, "tracker output rate and stage-1 backlog", 60.0, criterion7},
      {8, "determinism and concurrent agreement", 0.0, criterion8},
  };

  std::set<int> filter;
  for (int i = 1; i < argc; ++i) filter.insert(atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!filter.empty() && filter.count(c.id) == 0) continue;
    const double t0 = now_seconds();
    Outcome out = c.fn();
    const double elapsed = now_seconds() - t0;
    bool pass = out.pass;
    std::string note;
    if (c.budget_s > 0.0 && elapsed > c.budget_s) {
      pass = false;
      note = fmt(" [EXCEEDED %.0f s budget]", c.budget_s);
    }
    printf("[%s] criterion %d: %s — %s (%.1f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
           out.detail.c_str(), elapsed, note.c_str());
    fflush(stdout);
    if (!pass) ++failures;
  }
  if (failures) printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
