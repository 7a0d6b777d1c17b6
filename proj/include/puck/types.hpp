#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace puck {

/// A single camera event: pixel coordinates, microsecond timestamp, polarity.
/// Streams are ordered by t; equal timestamps are legal and keep file order.
struct Event {
  uint64_t t = 0;  // microseconds
  uint16_t x = 0;
  uint16_t y = 0;
  bool p = false;  // ON/OFF; carried through the pipeline but unused by the tracker
};

inline bool operator==(const Event& a, const Event& b) {
  return a.t == b.t && a.x == b.x && a.y == b.y && a.p == b.p;
}

/// Stream metadata. Binary files start with magic "EVS1" followed by these
/// fields, little-endian.
struct StreamHeader {
  uint32_t width = 640;
  uint32_t height = 480;
  uint64_t duration_us = 0;
  uint64_t event_count = 0;
};

/// True puck state at one instant: sub-pixel center and projected half-axes.
struct GroundTruthSample {
  uint64_t t = 0;  // microseconds
  double cx = 0.0;
  double cy = 0.0;
  double a = 0.0;  // half-axis along x, pixels
  double b = 0.0;  // half-axis along y, pixels
};

/// Axis-aligned pixel rectangle. All surface/tracker accesses clip it against
/// the frame first.
struct Roi {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool empty() const { return w <= 0 || h <= 0; }

  /// Intersection with a width x height frame anchored at (0,0).
  Roi clipped(int frame_w, int frame_h) const {
    int x0 = x < 0 ? 0 : x;
    int y0 = y < 0 ? 0 : y;
    int x1 = x + w > frame_w ? frame_w : x + w;
    int y1 = y + h > frame_h ? frame_h : y + h;
    if (x1 <= x0 || y1 <= y0) return Roi{0, 0, 0, 0};
    return Roi{x0, y0, x1 - x0, y1 - y0};
  }

  bool contains(double px, double py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
};

inline bool operator==(const Roi& a, const Roi& b) {
  return a.x == b.x && a.y == b.y && a.w == b.w && a.h == b.h;
}

/// Dense real-valued patch anchored in frame coordinates. Used both for
/// blurred surface excerpts and for convolution response maps.
struct Patch {
  int x0 = 0;  // frame coordinate of column 0
  int y0 = 0;  // frame coordinate of row 0
  int w = 0;
  int h = 0;
  std::vector<double> data;  // row-major, w*h

  double& at(int x, int y) { return data[static_cast<size_t>(y) * w + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * w + x]; }
};

using ResponseMap = Patch;

enum class TrackMode { Detecting, Tracking };

inline const char* to_string(TrackMode m) {
  return m == TrackMode::Tracking ? "Tracking" : "Detecting";
}

/// One tracker output row: newest event timestamp incorporated into the
/// surface before the pass, the position estimate, the normalized peak score
/// and the state-machine mode.
struct PuckReport {
  uint64_t t = 0;  // microseconds, event time
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
  TrackMode mode = TrackMode::Detecting;
};

// ---------------------------------------------------------------------------
// Error types

/// Malformed file content; offset is the byte position of the offending
/// header field, record or line start.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, size_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

/// Well-formed input that violates a contract (unsorted timestamps,
/// out-of-bounds coordinates, empty ROI, no temporal overlap, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration value or file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate calibration input (rank-deficient regression design).
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace puck
