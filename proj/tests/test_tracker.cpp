#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "puck/sim.hpp"
#include "puck/tracker.hpp"

using namespace puck;

namespace {

// Feeds the surface the events of a short linear slide ending with the disc
// centered at (cx, cy) — the freshest EROS state of a moving puck.
void paint_moving_ring(ErosSurface& s, std::mt19937_64& rng, double cx, double cy, double a,
                       double b, uint64_t t0 = 0, double step_px = 0.6, int steps = 6) {
  EllipsePose prev{cx - step_px * steps, cy, a, b};
  for (int i = 1; i <= steps; ++i) {
    EllipsePose next{cx - step_px * (steps - i), cy, a, b};
    for (const Event& e : render_silhouette_events(prev, next, t0 + (i - 1) * 1000, 1000, 1.0,
                                                   s.width(), s.height(), rng))
      s.update(e);
    prev = next;
  }
}

const SizeModel kFlatModel{9.0, 0.0, 0.0, 7.0, 0.0, 0.0};

TrackerConfig test_config() {
  TrackerConfig cfg;
  cfg.roi_d = Roi{280, 210, 80, 60};
  return cfg;
}

}  // namespace

TEST_CASE("convolve: all-zero patch gives an all-zero response") {
  Patch patch;
  patch.w = 40;
  patch.h = 36;
  patch.data.assign(40 * 36, 0.0);
  PuckKernel k = build_kernel(6.0, 5.0);
  ResponseMap r = convolve(patch, k);
  CHECK(r.w == 40 - k.width() + 1);
  CHECK(r.h == 36 - k.height() + 1);
  for (double v : r.data) CHECK(v == 0.0);
}

TEST_CASE("convolve: the kernel's own saturated ring scores exactly 1 at alignment") {
  PuckKernel k = build_kernel(8.0, 6.0);
  Patch patch;
  patch.w = k.width() + 20;
  patch.h = k.height() + 20;
  patch.data.assign(static_cast<size_t>(patch.w) * patch.h, 0.0);
  for (int y = 0; y < k.height(); ++y)
    for (int x = 0; x < k.width(); ++x)
      if (k.at(x, y) == 1.0) patch.at(x + 10, y + 10) = 255.0;

  ResponseMap r = convolve(patch, k);
  double best = -1;
  int bx = -1, by = -1;
  for (int j = 0; j < r.h; ++j)
    for (int i = 0; i < r.w; ++i)
      if (r.at(i, j) > best) {
        best = r.at(i, j);
        bx = i;
        by = j;
      }
  CHECK(bx == 10);
  CHECK(by == 10);
  CHECK(best == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("convolve matches the quadruple-loop oracle within 1e-9") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = 3.0 + static_cast<double>(rng() % 90) / 10.0;
    const double b = 3.0 + static_cast<double>(rng() % 90) / 10.0;
    PuckKernel k = build_kernel(a, b);
    Patch patch;
    patch.x0 = static_cast<int>(rng() % 100);
    patch.y0 = static_cast<int>(rng() % 100);
    patch.w = k.width() + 1 + static_cast<int>(rng() % 12);
    patch.h = k.height() + 1 + static_cast<int>(rng() % 12);
    patch.data.resize(static_cast<size_t>(patch.w) * patch.h);
    for (double& v : patch.data) v = static_cast<double>(rng() % 2560) / 10.0;

    ResponseMap got = convolve(patch, k);
    ResponseMap want = oracle::convolve(patch, k);
    REQUIRE(got.w == want.w);
    REQUIRE(got.h == want.h);
    REQUIRE(got.x0 == want.x0);
    for (size_t i = 0; i < got.data.size(); ++i)
      REQUIRE(std::abs(got.data[i] - want.data[i]) < 1e-9);
  }
}

TEST_CASE("convolve rejects patches smaller than the kernel") {
  PuckKernel k = build_kernel(8.0, 8.0);
  Patch patch;
  patch.w = k.width() - 1;
  patch.h = k.height() + 5;
  patch.data.assign(static_cast<size_t>(patch.w) * patch.h, 1.0);
  CHECK_THROWS_AS(convolve(patch, k), ValidationError);
}

TEST_CASE("convolution response scales linearly, argmax position is scale-invariant") {
  std::mt19937_64 rng(77);
  PuckKernel k = build_kernel(7.0, 7.0);
  Patch patch;
  patch.w = k.width() + 14;
  patch.h = k.height() + 14;
  patch.data.resize(static_cast<size_t>(patch.w) * patch.h);
  for (double& v : patch.data) v = static_cast<double>(rng() % 256);

  ResponseMap r1 = convolve(patch, k);
  Patch scaled = patch;
  for (double& v : scaled.data) v *= 3.5;
  ResponseMap r2 = convolve(scaled, k);

  size_t arg1 = 0, arg2 = 0;
  for (size_t i = 0; i < r1.data.size(); ++i) {
    if (r1.data[i] > r1.data[arg1]) arg1 = i;
    if (r2.data[i] > r2.data[arg2]) arg2 = i;
    CHECK(r2.data[i] == doctest::Approx(3.5 * r1.data[i]).epsilon(1e-9));
  }
  CHECK(arg1 == arg2);
}

TEST_CASE("gaussian prior values") {
  const double sx = 13.5, sy = 11.5;
  Patch w = gaussian_prior(320.0, 240.0, sx, sy, Roi{300, 220, 41, 41});

  SUBCASE("center value is 1") { CHECK(w.at(20, 20) == doctest::Approx(1.0)); }

  SUBCASE("offset of one kernel width gives exp(-2)") {
    // sigma is half the kernel width, so dx = 2*sigma
    Patch p = gaussian_prior(320.0, 240.0, sx, sy, Roi{293, 240, 55, 1});
    CHECK(p.at(static_cast<int>(320.0 + 2 * sx) - 293, 0) == doctest::Approx(std::exp(-2.0)));
  }

  SUBCASE("symmetric around the center") {
    for (int d = 1; d <= 20; ++d) {
      CHECK(w.at(20 + d, 20) == doctest::Approx(w.at(20 - d, 20)));
      CHECK(w.at(20, 20 + d) == doctest::Approx(w.at(20, 20 - d)));
    }
  }

  SUBCASE("two-peak prior ratio used by the tracker") {
    // a peak at 0.9 kernel widths is weighted exp(-1.62) against exp(0)
    const double kw = 2.0 * sx;
    const double dx = 0.9 * kw;
    const double expect = std::exp(-(dx * dx) / (2.0 * sx * sx));
    CHECK(expect == doctest::Approx(std::exp(-1.62)));
  }
}

TEST_CASE("detect pass") {
  const SizeModel model = kFlatModel;
  KernelBank bank(model, Roi{0, 0, 640, 480});
  TrackerConfig cfg = test_config();

  SUBCASE("empty surface stays in Detecting with a zero counter") {
    PuckTracker tracker(cfg, model, &bank);
    ErosSurface s(640, 480, 8);
    PuckReport r = tracker.pass(s, 0);
    CHECK(r.mode == TrackMode::Detecting);
    CHECK(tracker.state().detect_count == 0);
    CHECK(r.score == 0.0);
  }

  SUBCASE("a rendered ring inside ROI_d locks on within 1 px with M=1") {
    cfg.persistence = 1;
    PuckTracker tracker(cfg, model, &bank);
    ErosSurface s(640, 480, 8);
    std::mt19937_64 rng(3);
    paint_moving_ring(s, rng, 320.0, 240.0, 9.0, 7.0);
    PuckReport r = tracker.pass(s, 6000);
    CHECK(r.mode == TrackMode::Tracking);
    CHECK(std::abs(r.x - 320.0) <= 1.0);
    CHECK(std::abs(r.y - 240.0) <= 1.0);
    CHECK(r.t == 6000);
    CHECK(tracker.state().roi_t.contains(r.x, r.y));
  }

  SUBCASE("persistence M=3 needs three consistent peaks") {
    cfg.persistence = 3;
    PuckTracker tracker(cfg, model, &bank);
    ErosSurface s(640, 480, 8);
    std::mt19937_64 rng(4);
    paint_moving_ring(s, rng, 316.0, 238.0, 9.0, 7.0);
    CHECK(tracker.pass(s, 1).mode == TrackMode::Detecting);
    CHECK(tracker.state().detect_count == 1);
    CHECK(tracker.pass(s, 2).mode == TrackMode::Detecting);
    CHECK(tracker.state().detect_count == 2);
    CHECK(tracker.pass(s, 3).mode == TrackMode::Tracking);
  }

  SUBCASE("a ring outside ROI_d is ignored") {
    cfg.persistence = 1;
    PuckTracker tracker(cfg, model, &bank);
    ErosSurface s(640, 480, 8);
    std::mt19937_64 rng(5);
    paint_moving_ring(s, rng, 150.0, 120.0, 9.0, 7.0);
    PuckReport r = tracker.pass(s, 0);
    CHECK(r.mode == TrackMode::Detecting);
  }
}

TEST_CASE("track pass") {
  const SizeModel model = kFlatModel;
  KernelBank bank(model, Roi{0, 0, 640, 480});
  TrackerConfig cfg = test_config();
  cfg.persistence = 1;

  auto lock_on = [&](PuckTracker& tracker, ErosSurface& s, std::mt19937_64& rng, double cx,
                     double cy) {
    paint_moving_ring(s, rng, cx, cy, 9.0, 7.0);
    PuckReport r = tracker.pass(s, 0);
    REQUIRE(r.mode == TrackMode::Tracking);
    return r;
  };

  SUBCASE("stationary target stays put with a near-maximal score") {
    PuckTracker tracker(cfg, model, &bank);
    ErosSurface s(640, 480, 8);
    std::mt19937_64 rng(6);
    PuckReport first = lock_on(tracker, s, rng, 320.0, 240.0);
    PuckReport second = tracker.pass(s, 1000);
    CHECK(second.mode == TrackMode::Tracking);
    CHECK(std::abs(second.x - first.x) <= 1.0);
    CHECK(std::abs(second.y - first.y) <= 1.0);
    CHECK(second.score > 0.045);
  }

  SUBCASE("a second equal ring far from the prior loses") {
    PuckTracker tracker(cfg, model, &bank);
    ErosSurface s(640, 480, 8);
    std::mt19937_64 rng(7);
    PuckReport locked = lock_on(tracker, s, rng, 320.0, 240.0);
    // second identical ring at 0.9 kernel widths along +x
    const double offset = 0.9 * tracker.state().kernel->width();
    paint_moving_ring(s, rng, 320.0 + offset, 240.0, 9.0, 7.0, 10000);
    PuckReport r = tracker.pass(s, 20000);
    CHECK(std::abs(r.x - locked.x) <= 2.0);
    CHECK(std::abs(r.y - locked.y) <= 2.0);
  }

  SUBCASE("a blank ROI leaves the position at the prior peak exactly") {
    PuckTracker tracker(cfg, model, &bank);
    ErosSurface s(640, 480, 8);
    std::mt19937_64 rng(8);
    PuckReport locked = lock_on(tracker, s, rng, 320.0, 240.0);
    // fresh surface: response is uniformly zero inside the ROI; ties resolve
    // to the Gaussian prior peak, i.e. the previous position
    ErosSurface blank(640, 480, 8);
    PuckReport r = tracker.track_pass(blank, 30000);
    CHECK(r.x == locked.x);
    CHECK(r.y == locked.y);
    CHECK(r.score == 0.0);
  }

  SUBCASE("per-pass movement is bounded by the restricted window") {
    PuckTracker tracker(cfg, model, &bank);
    ErosSurface s(640, 480, 8);
    std::mt19937_64 rng(9);
    lock_on(tracker, s, rng, 320.0, 240.0);
    std::mt19937_64 noise_rng(10);
    for (int i = 0; i < 40; ++i) {
      const Roi roi = tracker.state().roi_t.clipped(640, 480);
      const double px = tracker.state().x, py = tracker.state().y;
      // hammer random events to build arbitrary clutter
      for (int n = 0; n < 500; ++n)
        s.update(static_cast<int>(noise_rng() % 640), static_cast<int>(noise_rng() % 480));
      PuckReport r = tracker.pass(s, static_cast<uint64_t>(i));
      if (tracker.state().mode != TrackMode::Tracking) break;
      CHECK(std::abs(r.x - px) <= cfg.argmax_frac / 2.0 * roi.w);
      CHECK(std::abs(r.y - py) <= cfg.argmax_frac / 2.0 * roi.h);
    }
  }

  SUBCASE("persistent loss reverts to Detecting when redetect is on") {
    cfg.loss_persistence = 4;
    PuckTracker tracker(cfg, model, &bank);
    ErosSurface s(640, 480, 8);
    std::mt19937_64 rng(11);
    lock_on(tracker, s, rng, 320.0, 240.0);
    ErosSurface blank(640, 480, 8);
    for (int i = 0; i < 3; ++i) {
      tracker.pass(blank, 0);
      CHECK(tracker.state().mode == TrackMode::Tracking);
    }
    tracker.pass(blank, 0);
    CHECK(tracker.state().mode == TrackMode::Detecting);
    CHECK(tracker.state().detect_count == 0);
  }

  SUBCASE("without redetect the tracker never reverts") {
    cfg.loss_persistence = 2;
    cfg.redetect = false;
    PuckTracker tracker(cfg, model, &bank);
    ErosSurface s(640, 480, 8);
    std::mt19937_64 rng(12);
    lock_on(tracker, s, rng, 320.0, 240.0);
    ErosSurface blank(640, 480, 8);
    for (int i = 0; i < 10; ++i) tracker.pass(blank, 0);
    CHECK(tracker.state().mode == TrackMode::Tracking);
  }

  SUBCASE("determinism: identical state and surface give identical passes") {
    ErosSurface s(640, 480, 8);
    std::mt19937_64 rng(13);
    paint_moving_ring(s, rng, 320.0, 240.0, 9.0, 7.0);
    std::mt19937_64 rng2(13);  // replay the same clutter
    for (int n = 0; n < 300; ++n)
      s.update(static_cast<int>(rng2() % 640), 200 + static_cast<int>(rng2() % 80));

    PuckTracker t1(cfg, model, &bank), t2(cfg, model, &bank);
    for (int i = 0; i < 5; ++i) {
      PuckReport r1 = t1.pass(s, static_cast<uint64_t>(i));
      PuckReport r2 = t2.pass(s, static_cast<uint64_t>(i));
      CHECK(r1.x == r2.x);
      CHECK(r1.y == r2.y);
      CHECK(r1.score == r2.score);
      CHECK(r1.mode == r2.mode);
    }
  }
}

TEST_CASE("tracker rejects inconsistent configs") {
  const SizeModel model = kFlatModel;
  KernelBank bank(model, Roi{0, 0, 640, 480});
  TrackerConfig cfg = test_config();

  SUBCASE("thresholds out of order") {
    cfg.theta_lost = 0.7;
    CHECK_THROWS_AS(PuckTracker(cfg, model, &bank), ConfigError);
  }
  SUBCASE("roi scale too small") {
    cfg.roi_scale = 0.9;
    CHECK_THROWS_AS(PuckTracker(cfg, model, &bank), ConfigError);
  }
  SUBCASE("detection zone smaller than the kernel") {
    cfg.roi_d = Roi{300, 230, 10, 10};
    CHECK_THROWS_AS(PuckTracker(cfg, model, &bank), ConfigError);
  }
}
