#include "puck/eros.hpp"

#include <array>
#include <fstream>

namespace puck {

namespace {

// Normalized 5-tap Gaussian, sigma = 1.0.
std::array<double, 5> blur_taps() {
  std::array<double, 5> taps;
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    taps[i] = std::exp(-0.5 * (i - 2) * (i - 2));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

}  // namespace

ErosSurface::ErosSurface(int width, int height, int k_eros)
    : width_(width), height_(height), k_(k_eros),
      cells_(static_cast<size_t>(width) * height, 0) {
  if (width <= 0 || height <= 0) throw ConfigError("surface dimensions must be positive");
  if (k_ < 1) throw ConfigError("k_eros must be >= 1");
  d_ = std::pow(0.3, 1.0 / k_);
  for (int v = 0; v < 256; ++v) lut_[v] = static_cast<uint8_t>(v * d_);

  // Find a Q16 multiplier that reproduces trunc(v*d) for every byte value.
  // One exists for every practical k; when it does not, update() falls back
  // to the scalar LUT path.
  for (uint64_t cand = static_cast<uint64_t>(d_ * 65536.0);
       cand <= static_cast<uint64_t>(d_ * 65536.0) + 1 && cand < 65536; ++cand) {
    bool exact = true;
    for (uint32_t v = 0; v < 256; ++v) {
      if (((v * cand) >> 16) != lut_[v]) {
        exact = false;
        break;
      }
    }
    if (exact) {
      dfix_ = static_cast<uint32_t>(cand);
      vectorizable_ = true;
      break;
    }
  }
}

Snapshot ErosSurface::snapshot_roi(const Roi& roi) const {
  Roi c = roi.clipped(width_, height_);
  Snapshot snap;
  snap.x0 = c.x;
  snap.y0 = c.y;
  snap.w = c.w;
  snap.h = c.h;
  snap.data.resize(static_cast<size_t>(c.w) * c.h);
  for (int y = 0; y < c.h; ++y) {
    const uint8_t* src = cells_.data() + static_cast<size_t>(c.y + y) * width_ + c.x;
    uint8_t* dst = snap.data.data() + static_cast<size_t>(y) * c.w;
    for (int x = 0; x < c.w; ++x) dst[x] = load_cell(src + x);
  }
  return snap;
}

Patch ErosSurface::blurred_roi(const Roi& roi) const {
  Roi c = roi.clipped(width_, height_);
  if (c.empty()) throw ValidationError("blurred_roi: clipped ROI is empty");
  Snapshot snap = snapshot_roi(c);

  static const std::array<double, 5> taps = blur_taps();
  const int w = c.w, h = c.h;
  std::vector<double> tmp(static_cast<size_t>(w) * h);

  // horizontal pass, replicate at patch edges
  for (int y = 0; y < h; ++y) {
    const uint8_t* src = snap.data.data() + static_cast<size_t>(y) * w;
    double* dst = tmp.data() + static_cast<size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -2; i <= 2; ++i) {
        int xi = x + i;
        if (xi < 0) xi = 0;
        if (xi >= w) xi = w - 1;
        acc += taps[i + 2] * src[xi];
      }
      dst[x] = acc;
    }
  }

  Patch patch;
  patch.x0 = c.x;
  patch.y0 = c.y;
  patch.w = w;
  patch.h = h;
  patch.data.resize(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -2; i <= 2; ++i) {
        int yi = y + i;
        if (yi < 0) yi = 0;
        if (yi >= h) yi = h - 1;
        acc += taps[i + 2] * tmp[static_cast<size_t>(yi) * w + x];
      }
      patch.at(x, y) = acc;
    }
  }
  return patch;
}

void ErosSurface::save_pgm(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P5\n" << width_ << " " << height_ << "\n255\n";
  Snapshot snap = snapshot_roi(Roi{0, 0, width_, height_});
  out.write(reinterpret_cast<const char*>(snap.data.data()),
            static_cast<std::streamsize>(snap.data.size()));
  if (!out) throw std::runtime_error("write failure on " + path);
}

}  // namespace puck
