#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "puck/types.hpp"

namespace puck {

/// Ellipse ring template. Weights take exactly three values: +1 on the ring,
/// 0 strictly inside, w_neg (< 0) strictly outside. A pixel at offset (dx,dy)
/// from the center is classified by r = sqrt(dx^2/a^2 + dy^2/b^2):
/// ring when |r - 1| <= tau, inside when r < 1 - tau, outside otherwise.
struct PuckKernel {
  double a = 0.0;  // half-axis along x, pixels
  double b = 0.0;  // half-axis along y, pixels
  int half_w = 0;  // matrix extent is (2*half_w+1) x (2*half_h+1)
  int half_h = 0;
  double w_neg = 0.0;
  int ring_count = 0;
  int inside_count = 0;
  int outside_count = 0;
  std::vector<double> weights;  // row-major

  int width() const { return 2 * half_w + 1; }
  int height() const { return 2 * half_h + 1; }
  double at(int x, int y) const { return weights[static_cast<size_t>(y) * width() + x]; }

  /// Score denominator: a perfect ring at saturation (255 on every ring
  /// pixel) scores exactly 1.0.
  double score_norm() const { return 255.0 * ring_count; }
};

struct KernelOptions {
  double tau = 0.25;  // ring half-width in normalized radius
  /// Fixed surround weight; when unset, w_neg = -ring_count/outside_count so
  /// the kernel sums to zero (response invariant to uniform offsets).
  std::optional<double> w_neg;
};

/// Builds the ring template for half-axes (a, b) >= 2 px. The surround margin
/// is max(2, ceil(0.3*max(a,b))). Throws ValidationError for degenerate axes.
PuckKernel build_kernel(double a, double b, const KernelOptions& opts = {});

/// Affine map from image position to projected puck half-axes:
///   a(x,y) = k0 + k1*x + k2*y,  b(x,y) = h0 + h1*x + h2*y.
struct SizeModel {
  double k0 = 0.0, k1 = 0.0, k2 = 0.0;
  double h0 = 0.0, h1 = 0.0, h2 = 0.0;

  std::pair<double, double> predict(double x, double y) const {
    return {k0 + k1 * x + k2 * y, h0 + h1 * x + h2 * y};
  }
};

struct SizeObservation {
  double x = 0.0, y = 0.0;  // puck image position
  double a = 0.0, b = 0.0;  // annotated half-axes
};

struct SizeFit {
  SizeModel model;
  double rms_a = 0.0, rms_b = 0.0;          // fit residuals, pixels
  double max_abs_a = 0.0, max_abs_b = 0.0;  // worst residuals
};

/// Least-squares fit of the two linear size models from annotated
/// observations. Needs >= 3 non-collinear positions; collinear designs raise
/// CalibrationError.
SizeFit fit_size_model(std::span<const SizeObservation> observations);

/// Calibration file helpers: CSV of `x,y,a,b` annotations and the six named
/// coefficients in key=value form.
std::vector<SizeObservation> read_observations(const std::string& path);
void write_observations(std::span<const SizeObservation> obs, const std::string& path);
SizeModel load_size_model(const std::string& path);
void save_size_model(const SizeModel& model, const std::string& path);

/// Precomputed kernels on a quantized (a, b) grid covering the size-model
/// range over a field region, so tracking never rebuilds a template.
class KernelBank {
 public:
  /// Covers [a_min, a_max] x [b_min, b_max] with the given step (pixels).
  KernelBank(double a_min, double a_max, double b_min, double b_max, double step = 1.0,
             const KernelOptions& opts = {});

  /// Covers the model's predictions over the corners of `field`.
  KernelBank(const SizeModel& model, const Roi& field, double step = 1.0,
             const KernelOptions& opts = {});

  struct Lookup {
    const PuckKernel* kernel = nullptr;
    bool clamped = false;  // prediction fell outside the bank range
  };

  /// Entry nearest to (a, b) in size space; ties break toward smaller sizes.
  /// Out-of-range requests clamp to the boundary entry and set `clamped`.
  Lookup nearest(double a, double b) const;

  /// Entry for the model's prediction at an image position.
  Lookup for_position(const SizeModel& model, double x, double y) const;

  size_t size() const { return kernels_.size(); }
  double step() const { return step_; }
  double a_min() const { return a0_; }
  double a_max() const { return a0_ + step_ * (na_ - 1); }
  double b_min() const { return b0_; }
  double b_max() const { return b0_ + step_ * (nb_ - 1); }
  int max_half_w() const { return max_half_w_; }
  int max_half_h() const { return max_half_h_; }

 private:
  void build(double a_min, double a_max, double b_min, double b_max, const KernelOptions& opts);

  double a0_ = 0.0, b0_ = 0.0, step_ = 1.0;
  int na_ = 0, nb_ = 0;
  int max_half_w_ = 0, max_half_h_ = 0;
  std::vector<PuckKernel> kernels_;  // row-major over (b index, a index)
};

}  // namespace puck
