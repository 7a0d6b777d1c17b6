#include "puck/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "puck/config.hpp"

namespace puck {

PuckKernel build_kernel(double a, double b, const KernelOptions& opts) {
  if (!(a >= 2.0) || !(b >= 2.0))
    throw ValidationError("kernel half-axes must be >= 2 px (got a=" + std::to_string(a) +
                          ", b=" + std::to_string(b) + ")");
  if (!(opts.tau > 0.0 && opts.tau < 1.0))
    throw ValidationError("ring half-width tau must be in (0,1)");

  PuckKernel k;
  k.a = a;
  k.b = b;
  const int margin = std::max(2, static_cast<int>(std::ceil(0.3 * std::max(a, b))));
  k.half_w = static_cast<int>(std::ceil(a + margin));
  k.half_h = static_cast<int>(std::ceil(b + margin));
  const int w = k.width(), h = k.height();
  k.weights.assign(static_cast<size_t>(w) * h, 0.0);

  for (int y = 0; y < h; ++y) {
    const double dy = y - k.half_h;
    for (int x = 0; x < w; ++x) {
      const double dx = x - k.half_w;
      const double r = std::sqrt((dx * dx) / (a * a) + (dy * dy) / (b * b));
      if (std::abs(r - 1.0) <= opts.tau) {
        k.weights[static_cast<size_t>(y) * w + x] = 1.0;
        ++k.ring_count;
      } else if (r < 1.0 - opts.tau) {
        ++k.inside_count;
      } else {
        k.weights[static_cast<size_t>(y) * w + x] = -1.0;  // placeholder, scaled below
        ++k.outside_count;
      }
    }
  }
  if (k.ring_count == 0 || k.outside_count == 0)
    throw ValidationError("degenerate kernel: empty ring or surround");

  k.w_neg = opts.w_neg ? *opts.w_neg
                       : -static_cast<double>(k.ring_count) / static_cast<double>(k.outside_count);
  if (!(k.w_neg < 0.0)) throw ValidationError("surround weight w_neg must be negative");
  for (double& wgt : k.weights)
    if (wgt < 0.0) wgt = k.w_neg;
  return k;
}

namespace {

// Solves the 3x3 system M x = r in place, partial pivoting. Returns false on
// a (near-)singular matrix.
bool solve3(double m[3][3], double r[3], double out[3]) {
  int idx[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::abs(m[idx[row]][col]) > std::abs(m[idx[piv]][col])) piv = row;
    std::swap(idx[col], idx[piv]);
    const double diag = m[idx[col]][col];
    if (std::abs(diag) < 1e-9) return false;
    for (int row = col + 1; row < 3; ++row) {
      const double f = m[idx[row]][col] / diag;
      for (int c = col; c < 3; ++c) m[idx[row]][c] -= f * m[idx[col]][c];
      r[idx[row]] -= f * r[idx[col]];
    }
  }
  for (int col = 2; col >= 0; --col) {
    double acc = r[idx[col]];
    for (int c = col + 1; c < 3; ++c) acc -= m[idx[col]][c] * out[c];
    out[col] = acc / m[idx[col]][col];
  }
  return true;
}

}  // namespace

SizeFit fit_size_model(std::span<const SizeObservation> observations) {
  if (observations.size() < 3)
    throw CalibrationError("need at least 3 observations, got " +
                           std::to_string(observations.size()));

  // Normal equations for the shared design [1, x, y]. Positions are centered
  // first so the pivot threshold is scale-independent.
  double mx = 0.0, my = 0.0;
  for (const auto& o : observations) {
    mx += o.x;
    my += o.y;
  }
  mx /= static_cast<double>(observations.size());
  my /= static_cast<double>(observations.size());

  double ata[3][3] = {};
  double atb_a[3] = {}, atb_b[3] = {};
  for (const auto& o : observations) {
    const double row[3] = {1.0, o.x - mx, o.y - my};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) ata[i][j] += row[i] * row[j];
      atb_a[i] += row[i] * o.a;
      atb_b[i] += row[i] * o.b;
    }
  }

  double ca[3], cb[3];
  double m1[3][3], m2[3][3];
  memcpy(m1, ata, sizeof(ata));
  memcpy(m2, ata, sizeof(ata));
  if (!solve3(m1, atb_a, ca) || !solve3(m2, atb_b, cb))
    throw CalibrationError("rank-deficient design: calibration positions are collinear");

  SizeFit fit;
  fit.model.k1 = ca[1];
  fit.model.k2 = ca[2];
  fit.model.k0 = ca[0] - ca[1] * mx - ca[2] * my;
  fit.model.h1 = cb[1];
  fit.model.h2 = cb[2];
  fit.model.h0 = cb[0] - cb[1] * mx - cb[2] * my;

  double se_a = 0.0, se_b = 0.0;
  for (const auto& o : observations) {
    auto [pa, pb] = fit.model.predict(o.x, o.y);
    const double ra = pa - o.a, rb = pb - o.b;
    se_a += ra * ra;
    se_b += rb * rb;
    fit.max_abs_a = std::max(fit.max_abs_a, std::abs(ra));
    fit.max_abs_b = std::max(fit.max_abs_b, std::abs(rb));
  }
  fit.rms_a = std::sqrt(se_a / static_cast<double>(observations.size()));
  fit.rms_b = std::sqrt(se_b / static_cast<double>(observations.size()));
  return fit;
}

std::vector<SizeObservation> read_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<SizeObservation> obs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || (line[0] != '-' && !isdigit(line[0]))) continue;
    SizeObservation o;
    const char* p = line.c_str();
    const char* end = p + line.size();
    auto field = [&](double& out, bool last) {
      auto [next, ec] = std::from_chars(p, end, out);
      if (ec != std::errc()) return false;
      p = next;
      if (last) return true;
      if (p == end || *p != ',') return false;
      ++p;
      return true;
    };
    if (!field(o.x, false) || !field(o.y, false) || !field(o.a, false) || !field(o.b, true))
      throw ParseError("malformed observation at line " + std::to_string(line_no), line_no);
    obs.push_back(o);
  }
  return obs;
}

void write_observations(std::span<const SizeObservation> obs, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "x,y,a,b\n";
  char line[128];
  for (const auto& o : obs) {
    snprintf(line, sizeof(line), "%.10g,%.10g,%.10g,%.10g\n", o.x, o.y, o.a, o.b);
    out << line;
  }
}

SizeModel load_size_model(const std::string& path) {
  KvConfig cfg = KvConfig::parse_file(path);
  SizeModel m;
  m.k0 = cfg.get_double("k0");
  m.k1 = cfg.get_double("k1");
  m.k2 = cfg.get_double("k2");
  m.h0 = cfg.get_double("h0");
  m.h1 = cfg.get_double("h1");
  m.h2 = cfg.get_double("h2");
  return m;
}

void save_size_model(const SizeModel& model, const std::string& path) {
  KvConfig cfg;
  cfg.set("k0", model.k0);
  cfg.set("k1", model.k1);
  cfg.set("k2", model.k2);
  cfg.set("h0", model.h0);
  cfg.set("h1", model.h1);
  cfg.set("h2", model.h2);
  cfg.save(path);
}

KernelBank::KernelBank(double a_min, double a_max, double b_min, double b_max, double step,
                       const KernelOptions& opts)
    : step_(step) {
  build(a_min, a_max, b_min, b_max, opts);
}

KernelBank::KernelBank(const SizeModel& model, const Roi& field, double step,
                       const KernelOptions& opts)
    : step_(step) {
  // The model is affine, so its extrema over the field sit at the corners.
  double a_min = 1e30, a_max = -1e30, b_min = 1e30, b_max = -1e30;
  const double xs[2] = {static_cast<double>(field.x), static_cast<double>(field.x + field.w)};
  const double ys[2] = {static_cast<double>(field.y), static_cast<double>(field.y + field.h)};
  for (double x : xs) {
    for (double y : ys) {
      auto [a, b] = model.predict(x, y);
      a_min = std::min(a_min, a);
      a_max = std::max(a_max, a);
      b_min = std::min(b_min, b);
      b_max = std::max(b_max, b);
    }
  }
  if (!(a_min > 0.0) || !(b_min > 0.0))
    throw ValidationError("size model predicts non-positive axes over the field");
  build(a_min, a_max, b_min, b_max, opts);
}

void KernelBank::build(double a_min, double a_max, double b_min, double b_max,
                       const KernelOptions& opts) {
  if (!(step_ > 0.0)) throw ValidationError("bank quantization step must be positive");
  if (a_max < a_min || b_max < b_min) throw ValidationError("invalid bank size range");
  // Grid nodes at multiples of the step; sizes below the 2 px kernel floor
  // are clamped up.
  a_min = std::max(a_min, 2.0);
  b_min = std::max(b_min, 2.0);
  a_max = std::max(a_max, a_min);
  b_max = std::max(b_max, b_min);
  a0_ = std::floor(a_min / step_) * step_;
  b0_ = std::floor(b_min / step_) * step_;
  if (a0_ < 2.0) a0_ = 2.0;
  if (b0_ < 2.0) b0_ = 2.0;
  na_ = static_cast<int>(std::ceil((a_max - a0_) / step_ - 1e-12)) + 1;
  nb_ = static_cast<int>(std::ceil((b_max - b0_) / step_ - 1e-12)) + 1;

  kernels_.reserve(static_cast<size_t>(na_) * nb_);
  for (int bi = 0; bi < nb_; ++bi) {
    for (int ai = 0; ai < na_; ++ai) {
      kernels_.push_back(build_kernel(a0_ + ai * step_, b0_ + bi * step_, opts));
      max_half_w_ = std::max(max_half_w_, kernels_.back().half_w);
      max_half_h_ = std::max(max_half_h_, kernels_.back().half_h);
    }
  }
}

KernelBank::Lookup KernelBank::nearest(double a, double b) const {
  // Round half toward the smaller grid node (stated tiebreak).
  auto index_of = [this](double v, double v0, int n, bool& clamped) {
    if (v < v0 - 1e-9 || v > v0 + step_ * (n - 1) + 1e-9) clamped = true;
    long i = static_cast<long>(std::ceil((v - v0) / step_ - 0.5));
    if (i < 0) i = 0;
    if (i >= n) i = n - 1;
    return static_cast<int>(i);
  };
  Lookup out;
  const int ai = index_of(a, a0_, na_, out.clamped);
  const int bi = index_of(b, b0_, nb_, out.clamped);
  out.kernel = &kernels_[static_cast<size_t>(bi) * na_ + ai];
  return out;
}

KernelBank::Lookup KernelBank::for_position(const SizeModel& model, double x, double y) const {
  auto [a, b] = model.predict(x, y);
  return nearest(a, b);
}

}  // namespace puck
