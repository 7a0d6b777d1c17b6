#pragma once

#include <cstdint>

#include "puck/eros.hpp"
#include "puck/kernel.hpp"
#include "puck/types.hpp"

namespace puck {

struct TrackerConfig {
  Roi roi_d;                      // detection zone, clutter-free field area
  double theta_det = 0.045;       // normalized detection threshold
  int persistence = 3;            // M consecutive detections to lock on
  double theta_lost = 0.013;      // loss threshold
  int loss_persistence = 10;      // L consecutive losses to drop tracking
  double roi_scale = 1.5;         // ROI_t extent as a multiple of the kernel extent
  double prior_sigma_frac = 0.5;  // prior sigma as a fraction of kernel extent
  double argmax_frac = 0.5;       // restricted-argmax window as a fraction of ROI_t
  bool redetect = true;           // revert to Detecting after L losses

  void validate() const;
};

struct TrackerState {
  TrackMode mode = TrackMode::Detecting;
  double x = 0.0, y = 0.0;               // last position estimate
  Roi roi_t;                             // tracking region (Tracking mode)
  const PuckKernel* kernel = nullptr;    // current template
  double score = 0.0;                    // last normalized peak response
  int detect_count = 0;                  // consecutive consistent detections
  double anchor_x = 0.0, anchor_y = 0.0; // detection persistence anchor
  int loss_count = 0;                    // consecutive sub-threshold passes
};

/// Valid-region cross-correlation of the template over a blurred surface
/// patch: response(p) = sum_q kernel(q) * patch(p+q), divided by the kernel's
/// score normalization so a saturated perfect ring scores 1.0. The response
/// is anchored at the kernel-center frame coordinates. Throws ValidationError
/// when the patch is smaller than the kernel.
ResponseMap convolve(const Patch& patch, const PuckKernel& kernel);

/// w(p) = exp(-((px-cx)^2/(2*sx^2) + (py-cy)^2/(2*sy^2))) over `region`,
/// value 1 at the center.
Patch gaussian_prior(double cx, double cy, double sigma_x, double sigma_y, const Roi& region);

/// Detection -> tracking state machine over an EROS surface.
///
/// Detecting: convolve the fixed center-of-ROI_d kernel over ROI_d; after
/// `persistence` consecutive peaks above theta_det within 2 px of each other,
/// lock on and size ROI_t from the kernel extent.
///
/// Tracking: convolve the position-selected kernel over ROI_t, multiply by a
/// Gaussian prior centered on the last position, take the argmax restricted
/// to the central argmax_frac window, then recenter ROI_t and re-select the
/// kernel at the new position.
class PuckTracker {
 public:
  PuckTracker(const TrackerConfig& cfg, const SizeModel& model, const KernelBank* bank);

  /// One detection or tracking pass; t_newest is the newest event timestamp
  /// incorporated into the surface before the pass began.
  PuckReport pass(const ErosSurface& surface, uint64_t t_newest);

  PuckReport detect_pass(const ErosSurface& surface, uint64_t t_newest);
  PuckReport track_pass(const ErosSurface& surface, uint64_t t_newest);

  const TrackerState& state() const { return state_; }
  const TrackerConfig& config() const { return cfg_; }
  const SizeModel& size_model() const { return model_; }

  /// Number of kernel lookups that fell outside the bank range (diagnostics).
  uint64_t clamped_lookups() const { return clamped_lookups_; }

  void reset();

 private:
  const PuckKernel* select_kernel(double x, double y);
  void enter_tracking(double x, double y);
  void register_loss();
  PuckReport make_report(uint64_t t_newest) const;

  TrackerConfig cfg_;
  SizeModel model_;
  const KernelBank* bank_;
  const PuckKernel* detect_kernel_ = nullptr;
  TrackerState state_;
  uint64_t clamped_lookups_ = 0;
};

}  // namespace puck
