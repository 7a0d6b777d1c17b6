#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

#include "puck/types.hpp"

namespace puck {

/// Raw integer excerpt of the surface, anchored in frame coordinates.
struct Snapshot {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;
  std::vector<uint8_t> data;  // row-major, w*h

  uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * w + x]; }
};

/// Exponential Reduced Ordinal Surface.
///
/// Each event multiplies every cell of the (2*k_eros+1)^2 neighborhood around
/// it by d = 0.3^(1/k_eros) (integer truncation), then sets its own cell to
/// 255. The surface reads as a grey image in [0,255].
///
/// Concurrency contract: exactly one thread calls update(); at most one other
/// thread may concurrently call snapshot_roi()/blurred_roi()/at(). Cells are
/// single bytes, so per-cell reads are torn-free; readers may observe a mix of
/// older and newer cells across the ROI. The writer never blocks on readers.
class ErosSurface {
 public:
  ErosSurface(int width, int height, int k_eros = 8);

  int width() const { return width_; }
  int height() const { return height_; }
  int k_eros() const { return k_; }
  double decay_factor() const { return d_; }

  void update(const Event& e) { update(static_cast<int>(e.x), static_cast<int>(e.y)); }

  /// Decays the neighborhood (center included), then writes 255 at (ex, ey).
  /// Neighborhoods are clipped at the frame border; a fully out-of-frame event
  /// only decays whatever part of its neighborhood intersects the frame.
  void update(int ex, int ey) {
    const int x0 = ex - k_ < 0 ? 0 : ex - k_;
    const int x1 = ex + k_ >= width_ ? width_ - 1 : ex + k_;
    const int y0 = ey - k_ < 0 ? 0 : ey - k_;
    const int y1 = ey + k_ >= height_ ? height_ - 1 : ey + k_;
    if (x1 < x0 || y1 < y0) return;
    const int row_w = x1 - x0 + 1;
#if defined(__SSE2__)
    if (vectorizable_) {
      const __m128i vd = _mm_set1_epi16(static_cast<short>(dfix_));
      const __m128i zero = _mm_setzero_si128();
      for (int y = y0; y <= y1; ++y) {
        uint8_t* row = cells_.data() + static_cast<size_t>(y) * width_ + x0;
        int x = 0;
        for (; x + 16 <= row_w; x += 16) {
          __m128i v = _mm_loadu_si128(reinterpret_cast<const __m128i*>(row + x));
          // all-zero chunks decay to themselves; skip the store
          if (_mm_movemask_epi8(_mm_cmpeq_epi8(v, zero)) == 0xFFFF) continue;
          __m128i lo = _mm_mulhi_epu16(_mm_unpacklo_epi8(v, zero), vd);
          __m128i hi = _mm_mulhi_epu16(_mm_unpackhi_epi8(v, zero), vd);
          _mm_storeu_si128(reinterpret_cast<__m128i*>(row + x), _mm_packus_epi16(lo, hi));
        }
        for (; x < row_w; ++x)
          if (row[x]) row[x] = lut_[row[x]];
      }
    } else
#endif
    {
      for (int y = y0; y <= y1; ++y) {
        uint8_t* row = cells_.data() + static_cast<size_t>(y) * width_ + x0;
        for (int x = 0; x < row_w; ++x)
          if (row[x]) row[x] = lut_[row[x]];
      }
    }
    if (ex >= 0 && ex < width_ && ey >= 0 && ey < height_)
      cells_[static_cast<size_t>(ey) * width_ + ex] = 255;
  }

  /// Torn-free read of one cell.
  uint8_t at(int x, int y) const {
    return load_cell(cells_.data() + static_cast<size_t>(y) * width_ + x);
  }

  /// Copies the clipped ROI. Each returned value is one that was stored at
  /// that cell at some instant during the copy.
  Snapshot snapshot_roi(const Roi& roi) const;

  /// Gaussian-blurred (5x5, sigma 1.0) copy of the clipped ROI, replicate
  /// padding at the patch edges. Throws ValidationError when the clipped ROI
  /// is empty.
  Patch blurred_roi(const Roi& roi) const;

  /// Debug export of the full surface as binary PGM.
  void save_pgm(const std::string& path) const;

 private:
  static uint8_t load_cell(const uint8_t* p) {
#if defined(__GNUC__) || defined(__clang__)
    return __atomic_load_n(p, __ATOMIC_RELAXED);
#else
    return *p;
#endif
  }

  int width_;
  int height_;
  int k_;
  double d_;
  uint32_t dfix_ = 0;        // fixed-point d in Q16, exact against trunc(v*d)
  bool vectorizable_ = false;
  uint8_t lut_[256];
  std::vector<uint8_t> cells_;
};

}  // namespace puck
