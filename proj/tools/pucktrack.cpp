// Command-line harness for the event-camera puck tracking pipeline:
// scene generation, size-model calibration, tracking, evaluation, and the
// full benchmark suite.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "puck/config.hpp"
#include "puck/eval.hpp"
#include "puck/io.hpp"
#include "puck/pipeline.hpp"
#include "puck/sim.hpp"

namespace {

using namespace puck;

nlohmann::json latency_json(const LatencySummary& s) {
  return {{"mean_us", s.mean_us},
          {"median_us", s.median_us},
          {"p99_us", s.p99_us},
          {"max_us", s.max_us},
          {"samples", s.count}};
}

nlohmann::json stats_json(const PipelineStats& stats) {
  nlohmann::json j;
  j["wall_seconds"] = stats.wall_seconds;
  j["throughput_eps"] = stats.throughput_eps;
  j["dropped"] = stats.dropped;
  j["stage1"] = {{"processed", stats.stage1.processed},
                 {"rate_hz", stats.stage1.rate_hz},
                 {"backlog", latency_json(summarize_latency(stats.stage1.backlog_us))}};
  j["stage2"] = {{"passes", stats.stage2.processed},
                 {"pass_rate_hz", stats.stage2.rate_hz},
                 {"backlog", latency_json(summarize_latency(stats.stage2.backlog_us))}};
  return j;
}

TrackerConfig tracker_config_from_file(const std::string& path, const StreamHeader& header) {
  TrackerConfig cfg;
  cfg.roi_d = Roi{static_cast<int>(header.width) / 2 - 36,
                  static_cast<int>(header.height) / 2 - 30, 72, 60};
  if (path.empty()) return cfg;
  KvConfig kv = KvConfig::parse_file(path);
  cfg.roi_d.x = static_cast<int>(kv.get_int("roi_d_x", cfg.roi_d.x));
  cfg.roi_d.y = static_cast<int>(kv.get_int("roi_d_y", cfg.roi_d.y));
  cfg.roi_d.w = static_cast<int>(kv.get_int("roi_d_w", cfg.roi_d.w));
  cfg.roi_d.h = static_cast<int>(kv.get_int("roi_d_h", cfg.roi_d.h));
  cfg.theta_det = kv.get_double("theta_det", cfg.theta_det);
  cfg.persistence = static_cast<int>(kv.get_int("persistence", cfg.persistence));
  cfg.theta_lost = kv.get_double("theta_lost", cfg.theta_lost);
  cfg.loss_persistence =
      static_cast<int>(kv.get_int("loss_persistence", cfg.loss_persistence));
  cfg.roi_scale = kv.get_double("roi_scale", cfg.roi_scale);
  cfg.prior_sigma_frac = kv.get_double("prior_sigma_frac", cfg.prior_sigma_frac);
  cfg.argmax_frac = kv.get_double("argmax_frac", cfg.argmax_frac);
  cfg.redetect = kv.get_bool("redetect", cfg.redetect);
  return cfg;
}

int cmd_generate(const std::string& config_path, uint64_t seed, bool has_seed,
                 double duration, const std::string& out_events, const std::string& out_gt,
                 bool csv) {
  SceneConfig scene = config_path.empty() ? SceneConfig{} : load_scene_config(config_path);
  if (has_seed) scene.seed = seed;
  if (duration > 0.0) scene.duration_s = duration;
  scene.validate();

  SimResult sim = simulate(scene);
  write_stream(sim.header, sim.events, out_events,
               csv ? StreamFormat::Csv : StreamFormat::Binary);
  if (!out_gt.empty()) write_ground_truth(sim.ground_truth, out_gt);
  printf("generated %zu events over %.3f s -> %s\n", sim.events.size(), scene.duration_s,
         out_events.c_str());
  if (!out_gt.empty())
    printf("ground truth: %zu samples -> %s\n", sim.ground_truth.size(), out_gt.c_str());
  return 0;
}

int cmd_calibrate(const std::string& obs_path, const std::string& out_model) {
  std::vector<SizeObservation> obs = read_observations(obs_path);
  SizeFit fit = fit_size_model(obs);
  save_size_model(fit.model, out_model);
  printf("fit from %zu observations\n", obs.size());
  printf("a(x,y) = %.6g + %.6g*x + %.6g*y   (rms %.3f px, max %.3f px)\n", fit.model.k0,
         fit.model.k1, fit.model.k2, fit.rms_a, fit.max_abs_a);
  printf("b(x,y) = %.6g + %.6g*x + %.6g*y   (rms %.3f px, max %.3f px)\n", fit.model.h0,
         fit.model.h1, fit.model.h2, fit.rms_b, fit.max_abs_b);
  printf("saved -> %s\n", out_model.c_str());
  return 0;
}

int cmd_track(const std::string& input, const std::string& model_path,
              const std::string& tracker_cfg_path, const std::string& mode,
              double realtime, const std::string& algo, const std::string& out_reports,
              const std::string& stats_path, const std::string& dump_surface, int k_eros) {
  auto [header, events] = read_stream(input);
  SizeModel model = load_size_model(model_path);
  TrackerConfig tcfg = tracker_config_from_file(tracker_cfg_path, header);

  Roi frame{0, 0, static_cast<int>(header.width), static_cast<int>(header.height)};
  KernelBank bank(model, frame);
  PuckTracker tracker(tcfg, model, &bank);

  PipelineConfig pcfg;
  pcfg.mode = mode == "par" ? PipelineMode::Parallel : PipelineMode::Sequential;
  pcfg.realtime_factor = realtime;
  pcfg.k_eros = k_eros;

  PipelineResult result = run_pipeline(header, events, tracker, pcfg);
  std::vector<PuckReport> reports = std::move(result.reports);

  if (algo == "cluster") {
    const PuckReport* seed = nullptr;
    for (const PuckReport& r : reports)
      if (r.mode == TrackMode::Tracking) {
        seed = &r;
        break;
      }
    if (seed == nullptr) {
      fprintf(stderr, "error: detector never locked on; cannot seed the cluster baseline\n");
      return 1;
    }
    ClusterConfig ccfg;
    ccfg.gate_px = 1.5 * std::max(bank.a_max(), bank.b_max());
    reports = run_cluster_baseline(events, *seed, ccfg);
  }

  write_reports(reports, out_reports, algo);
  printf("%zu reports -> %s\n", reports.size(), out_reports.c_str());

  nlohmann::json stats = stats_json(result.stats);
  stats["algo"] = algo;
  stats["mode"] = mode;
  stats["clamped_kernel_lookups"] = tracker.clamped_lookups();
  if (stats_path.empty()) {
    printf("%s\n", stats.dump(2).c_str());
  } else {
    std::ofstream out(stats_path, std::ios::trunc);
    out << stats.dump(2) << "\n";
    printf("stats -> %s\n", stats_path.c_str());
  }

  if (!dump_surface.empty()) {
    ErosSurface surface(static_cast<int>(header.width), static_cast<int>(header.height), k_eros);
    for (const Event& e : events) surface.update(e);
    surface.save_pgm(dump_surface);
    printf("surface -> %s\n", dump_surface.c_str());
  }
  return 0;
}

int cmd_evaluate(const std::string& reports_path, const std::string& gt_path, double threshold,
                 const std::string& out_json) {
  std::vector<PuckReport> reports = read_reports(reports_path);
  std::vector<GroundTruthSample> gt = read_ground_truth(gt_path);
  AccuracyReport acc = evaluate(reports, gt, threshold);

  printf("samples:   %zu\n", acc.samples);
  printf("mean:      %.3f px\n", acc.mean);
  printf("median:    %.3f px (q1 %.3f, q3 %.3f)\n", acc.median, acc.q1, acc.q3);
  printf("max:       %.3f px\n", acc.max);
  printf("valid:     %.1f%% within %.2f px\n", acc.valid_pct, acc.threshold_px);

  if (!out_json.empty()) {
    nlohmann::json j = {{"samples", acc.samples}, {"mean_px", acc.mean},
                        {"median_px", acc.median}, {"q1_px", acc.q1},
                        {"q3_px", acc.q3},         {"max_px", acc.max},
                        {"valid_pct", acc.valid_pct}, {"threshold_px", acc.threshold_px}};
    std::ofstream out(out_json, std::ios::trunc);
    out << j.dump(2) << "\n";
    printf("report -> %s\n", out_json.c_str());
  }
  return 0;
}

int cmd_suite(const std::string& out_dir, double duration, int scenes, const std::string& mode,
              double realtime, bool no_cluster) {
  SuiteOptions opts;
  opts.duration_s = duration;
  opts.mode = mode == "par" ? PipelineMode::Parallel : PipelineMode::Sequential;
  opts.realtime_factor = realtime;
  opts.run_cluster = !no_cluster;
  opts.out_dir = out_dir;
  opts.static_seeds.clear();
  opts.moving_seeds.clear();
  for (int i = 1; i <= scenes; ++i) {
    opts.static_seeds.push_back(static_cast<uint64_t>(i));
    opts.moving_seeds.push_back(static_cast<uint64_t>(i));
  }

  std::vector<SuiteRow> rows = run_suite(opts);
  const std::string table = format_suite_table(rows);
  printf("%s", table.c_str());
  if (!out_dir.empty()) {
    std::ofstream csv(out_dir + "/summary.csv", std::ios::trunc);
    csv << suite_csv(rows);
    std::ofstream txt(out_dir + "/summary.txt", std::ios::trunc);
    txt << table;
    printf("summary -> %s/summary.csv\n", out_dir.c_str());
  }
  for (const SuiteRow& r : rows)
    if (!r.ok) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PUCK-track: event-camera air-hockey puck tracking harness"};
  app.require_subcommand(1);

  // generate
  std::string gen_config, gen_out = "events.evs", gen_gt = "gt.csv";
  uint64_t gen_seed = 0;
  double gen_duration = 0.0;
  bool gen_csv = false;
  auto* gen = app.add_subcommand("generate", "synthesize an air-hockey event stream");
  gen->add_option("--config", gen_config, "scene config file (key = value)");
  auto* seed_opt = gen->add_option("--seed", gen_seed, "override scene seed");
  gen->add_option("--duration", gen_duration, "override duration, seconds");
  gen->add_option("--out", gen_out, "output event stream path");
  gen->add_option("--gt", gen_gt, "output ground truth CSV path ('' to skip)");
  gen->add_flag("--csv", gen_csv, "write the CSV interchange format");

  // calibrate
  std::string cal_obs, cal_out = "size_model.cfg";
  auto* cal = app.add_subcommand("calibrate", "fit the size model from annotations");
  cal->add_option("--observations", cal_obs, "CSV of x,y,a,b annotations")->required();
  cal->add_option("--out", cal_out, "output size model config");

  // track
  std::string trk_input, trk_model, trk_cfg, trk_mode = "seq", trk_algo = "puck";
  std::string trk_out = "reports.csv", trk_stats, trk_dump;
  double trk_realtime = 0.0;
  int trk_keros = 8;
  auto* trk = app.add_subcommand("track", "run a tracker over an event stream");
  trk->add_option("--input", trk_input, "event stream path")->required();
  trk->add_option("--model", trk_model, "size model config")->required();
  trk->add_option("--config", trk_cfg, "tracker config file");
  trk->add_option("--mode", trk_mode, "seq | par")->check(CLI::IsMember({"seq", "par"}));
  trk->add_option("--realtime", trk_realtime,
                  "playback speed factor (0 = as fast as possible)");
  trk->add_option("--algo", trk_algo, "puck | cluster")
      ->check(CLI::IsMember({"puck", "cluster"}));
  trk->add_option("--out", trk_out, "output report CSV");
  trk->add_option("--stats", trk_stats, "stats JSON path (default: print)");
  trk->add_option("--dump-surface", trk_dump, "write final EROS surface as PGM");
  trk->add_option("--k-eros", trk_keros, "EROS neighborhood half-width");

  // evaluate
  std::string ev_reports, ev_gt, ev_json;
  double ev_threshold = 3.5;
  auto* ev = app.add_subcommand("evaluate", "compare reports against ground truth");
  ev->add_option("--reports", ev_reports, "report CSV")->required();
  ev->add_option("--gt", ev_gt, "ground truth CSV")->required();
  ev->add_option("--threshold", ev_threshold, "valid-position threshold, pixels");
  ev->add_option("--out", ev_json, "accuracy report JSON path");

  // suite
  std::string su_out, su_mode = "seq";
  double su_duration = 10.0, su_realtime = 0.0;
  int su_scenes = 4;
  bool su_no_cluster = false;
  auto* su = app.add_subcommand("suite", "run the benchmark scenario suite");
  su->add_option("--out", su_out, "artifact output directory");
  su->add_option("--duration", su_duration, "seconds per scenario");
  su->add_option("--scenes", su_scenes, "scenario count per condition");
  su->add_option("--mode", su_mode, "seq | par")->check(CLI::IsMember({"seq", "par"}));
  su->add_option("--realtime", su_realtime, "playback speed factor for par mode");
  su->add_flag("--no-cluster", su_no_cluster, "skip the cluster baseline");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate(gen_config, gen_seed, seed_opt->count() > 0, gen_duration, gen_out,
                          gen_gt, gen_csv);
    if (cal->parsed()) return cmd_calibrate(cal_obs, cal_out);
    if (trk->parsed())
      return cmd_track(trk_input, trk_model, trk_cfg, trk_mode, trk_realtime, trk_algo, trk_out,
                       trk_stats, trk_dump, trk_keros);
    if (ev->parsed()) return cmd_evaluate(ev_reports, ev_gt, ev_threshold, ev_json);
    if (su->parsed())
      return cmd_suite(su_out, su_duration, su_scenes, su_mode, su_realtime, su_no_cluster);
  } catch (const std::exception& ex) {
    fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
