#include "puck/tracker.hpp"

#include <algorithm>
#include <cmath>

namespace puck {

void TrackerConfig::validate() const {
  if (roi_d.empty()) throw ConfigError("roi_d must be non-empty");
  if (!(theta_lost > 0.0 && theta_lost < theta_det && theta_det <= 1.0))
    throw ConfigError("need 0 < theta_lost < theta_det <= 1");
  if (!(roi_scale > 1.0)) throw ConfigError("roi_scale must exceed 1");
  if (!(argmax_frac > 0.0 && argmax_frac < 1.0)) throw ConfigError("argmax_frac must be in (0,1)");
  if (persistence < 1 || loss_persistence < 1)
    throw ConfigError("persistence counters must be >= 1");
  if (!(prior_sigma_frac > 0.0)) throw ConfigError("prior_sigma_frac must be positive");
}

ResponseMap convolve(const Patch& patch, const PuckKernel& kernel) {
  const int kw = kernel.width(), kh = kernel.height();
  if (patch.w < kw || patch.h < kh)
    throw ValidationError("patch (" + std::to_string(patch.w) + "x" + std::to_string(patch.h) +
                          ") smaller than kernel (" + std::to_string(kw) + "x" +
                          std::to_string(kh) + ")");
  ResponseMap resp;
  resp.x0 = patch.x0 + kernel.half_w;
  resp.y0 = patch.y0 + kernel.half_h;
  resp.w = patch.w - kw + 1;
  resp.h = patch.h - kh + 1;
  resp.data.resize(static_cast<size_t>(resp.w) * resp.h);

  const double inv_norm = 1.0 / kernel.score_norm();
  for (int j = 0; j < resp.h; ++j) {
    for (int i = 0; i < resp.w; ++i) {
      double acc = 0.0;
      for (int ky = 0; ky < kh; ++ky) {
        const double* prow = patch.data.data() + static_cast<size_t>(j + ky) * patch.w + i;
        const double* krow = kernel.weights.data() + static_cast<size_t>(ky) * kw;
        for (int kx = 0; kx < kw; ++kx) acc += krow[kx] * prow[kx];
      }
      resp.at(i, j) = acc * inv_norm;
    }
  }
  return resp;
}

Patch gaussian_prior(double cx, double cy, double sigma_x, double sigma_y, const Roi& region) {
  if (region.empty()) throw ValidationError("gaussian_prior: empty region");
  Patch p;
  p.x0 = region.x;
  p.y0 = region.y;
  p.w = region.w;
  p.h = region.h;
  p.data.resize(static_cast<size_t>(region.w) * region.h);
  const double ix = 1.0 / (2.0 * sigma_x * sigma_x);
  const double iy = 1.0 / (2.0 * sigma_y * sigma_y);
  for (int j = 0; j < region.h; ++j) {
    const double dy = region.y + j - cy;
    for (int i = 0; i < region.w; ++i) {
      const double dx = region.x + i - cx;
      p.at(i, j) = std::exp(-(dx * dx * ix + dy * dy * iy));
    }
  }
  return p;
}

namespace {

struct Peak {
  int x = 0, y = 0;    // frame coordinates
  double value = 0.0;
  bool found = false;
};

// Row-major argmax over the response cells inside `window` (frame coords);
// strict > keeps the first (smallest row-major index) among ties.
Peak argmax_in(const ResponseMap& resp, const Roi& window) {
  Peak peak;
  peak.value = -1e300;
  const int i0 = std::max(0, window.x - resp.x0);
  const int j0 = std::max(0, window.y - resp.y0);
  const int i1 = std::min(resp.w, window.x + window.w - resp.x0);
  const int j1 = std::min(resp.h, window.y + window.h - resp.y0);
  for (int j = j0; j < j1; ++j) {
    for (int i = i0; i < i1; ++i) {
      const double v = resp.at(i, j);
      if (v > peak.value) {
        peak.value = v;
        peak.x = resp.x0 + i;
        peak.y = resp.y0 + j;
        peak.found = true;
      }
    }
  }
  return peak;
}

}  // namespace

PuckTracker::PuckTracker(const TrackerConfig& cfg, const SizeModel& model, const KernelBank* bank)
    : cfg_(cfg), model_(model), bank_(bank) {
  cfg_.validate();
  if (bank_ == nullptr || bank_->size() == 0) throw ConfigError("tracker needs a kernel bank");
  const double cx = cfg_.roi_d.x + cfg_.roi_d.w / 2.0;
  const double cy = cfg_.roi_d.y + cfg_.roi_d.h / 2.0;
  detect_kernel_ = bank_->for_position(model_, cx, cy).kernel;
  if (cfg_.roi_d.w < detect_kernel_->width() || cfg_.roi_d.h < detect_kernel_->height())
    throw ConfigError("roi_d smaller than the detection kernel");
  reset();
}

void PuckTracker::reset() {
  state_ = TrackerState{};
}

const PuckKernel* PuckTracker::select_kernel(double x, double y) {
  KernelBank::Lookup lk = bank_->for_position(model_, x, y);
  if (lk.clamped) ++clamped_lookups_;
  return lk.kernel;
}

void PuckTracker::enter_tracking(double x, double y) {
  state_.mode = TrackMode::Tracking;
  state_.x = x;
  state_.y = y;
  state_.kernel = select_kernel(x, y);
  state_.loss_count = 0;
  const int w = static_cast<int>(std::lround(cfg_.roi_scale * state_.kernel->width()));
  const int h = static_cast<int>(std::lround(cfg_.roi_scale * state_.kernel->height()));
  state_.roi_t = Roi{static_cast<int>(std::lround(x)) - w / 2,
                     static_cast<int>(std::lround(y)) - h / 2, w, h};
}

void PuckTracker::register_loss() {
  ++state_.loss_count;
  if (cfg_.redetect && state_.loss_count >= cfg_.loss_persistence) {
    state_.mode = TrackMode::Detecting;
    state_.detect_count = 0;
    state_.loss_count = 0;
  }
}

PuckReport PuckTracker::make_report(uint64_t t_newest) const {
  return PuckReport{t_newest, state_.x, state_.y, state_.score, state_.mode};
}

PuckReport PuckTracker::pass(const ErosSurface& surface, uint64_t t_newest) {
  return state_.mode == TrackMode::Detecting ? detect_pass(surface, t_newest)
                                             : track_pass(surface, t_newest);
}

PuckReport PuckTracker::detect_pass(const ErosSurface& surface, uint64_t t_newest) {
  const Patch patch = surface.blurred_roi(cfg_.roi_d);
  const ResponseMap resp = convolve(patch, *detect_kernel_);
  const Peak peak = argmax_in(resp, Roi{resp.x0, resp.y0, resp.w, resp.h});

  if (peak.found && peak.value >= cfg_.theta_det) {
    const double dx = peak.x - state_.anchor_x, dy = peak.y - state_.anchor_y;
    if (state_.detect_count > 0 && dx * dx + dy * dy <= 4.0)
      ++state_.detect_count;
    else
      state_.detect_count = 1;
    state_.anchor_x = peak.x;
    state_.anchor_y = peak.y;
    state_.x = peak.x;
    state_.y = peak.y;
    state_.score = peak.value;
    if (state_.detect_count >= cfg_.persistence) enter_tracking(peak.x, peak.y);
  } else {
    state_.detect_count = 0;
    state_.score = peak.found ? peak.value : 0.0;
  }
  return make_report(t_newest);
}

PuckReport PuckTracker::track_pass(const ErosSurface& surface, uint64_t t_newest) {
  if (state_.mode != TrackMode::Tracking)
    throw ValidationError("track_pass called while not tracking");

  const PuckKernel& kernel = *state_.kernel;
  const Roi clipped = state_.roi_t.clipped(surface.width(), surface.height());
  if (clipped.w < kernel.width() || clipped.h < kernel.height()) {
    // Target pushed the ROI off the frame: the pass reports a loss.
    state_.score = 0.0;
    register_loss();
    return make_report(t_newest);
  }

  const Patch patch = surface.blurred_roi(clipped);
  ResponseMap resp = convolve(patch, kernel);
  const Patch prior =
      gaussian_prior(state_.x, state_.y, cfg_.prior_sigma_frac * kernel.width(),
                     cfg_.prior_sigma_frac * kernel.height(), Roi{resp.x0, resp.y0, resp.w, resp.h});
  for (size_t i = 0; i < resp.data.size(); ++i) resp.data[i] *= prior.data[i];

  // Restricted argmax: central argmax_frac window around the last position.
  // Ties resolve toward the higher prior (closer to the last position), then
  // by row-major index.
  const int half_wx = std::max(1, static_cast<int>(std::floor(cfg_.argmax_frac * clipped.w / 2.0 - 0.5)));
  const int half_wy = std::max(1, static_cast<int>(std::floor(cfg_.argmax_frac * clipped.h / 2.0 - 0.5)));
  const int cx = static_cast<int>(std::lround(state_.x));
  const int cy = static_cast<int>(std::lround(state_.y));
  const Roi window{cx - half_wx, cy - half_wy, 2 * half_wx + 1, 2 * half_wy + 1};
  Peak peak;
  {
    peak.value = -1e300;
    double best_prior = -1.0;
    const int i0 = std::max(0, window.x - resp.x0);
    const int j0 = std::max(0, window.y - resp.y0);
    const int i1 = std::min(resp.w, window.x + window.w - resp.x0);
    const int j1 = std::min(resp.h, window.y + window.h - resp.y0);
    for (int j = j0; j < j1; ++j) {
      for (int i = i0; i < i1; ++i) {
        const double v = resp.at(i, j);
        const double pw = prior.at(i, j);
        if (v > peak.value || (v == peak.value && pw > best_prior)) {
          peak.value = v;
          best_prior = pw;
          peak.x = resp.x0 + i;
          peak.y = resp.y0 + j;
          peak.found = true;
        }
      }
    }
  }
  if (!peak.found) {
    // Last position sits outside the evaluable response (frame-border clip):
    // fall back to the response cell nearest to it.
    const int nx = std::clamp(cx, resp.x0, resp.x0 + resp.w - 1);
    const int ny = std::clamp(cy, resp.y0, resp.y0 + resp.h - 1);
    peak = Peak{nx, ny, resp.at(nx - resp.x0, ny - resp.y0), true};
  }

  state_.x = peak.x;
  state_.y = peak.y;
  state_.score = peak.value;

  if (peak.value < cfg_.theta_lost) {
    register_loss();
  } else {
    state_.loss_count = 0;
  }

  if (state_.mode == TrackMode::Tracking) {
    state_.kernel = select_kernel(state_.x, state_.y);
    const int w = static_cast<int>(std::lround(cfg_.roi_scale * state_.kernel->width()));
    const int h = static_cast<int>(std::lround(cfg_.roi_scale * state_.kernel->height()));
    state_.roi_t = Roi{static_cast<int>(std::lround(state_.x)) - w / 2,
                       static_cast<int>(std::lround(state_.y)) - h / 2, w, h};
  }
  return make_report(t_newest);
}

}  // namespace puck
