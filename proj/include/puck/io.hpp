#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "puck/types.hpp"

namespace puck {

enum class StreamFormat { Binary, Csv };

/// Binary event file layout (all little-endian):
///   magic "EVS1" | u32 width | u32 height | u64 duration_us | u64 event_count
/// followed by event_count records of 13 bytes: u64 t | u16 x | u16 y | u8 p.
///
/// CSV mode is the debugging interchange format: a "# EVS1 w h duration count"
/// comment line followed by `t,x,y,p` lines. Plain `t,x,y,p` files without the
/// comment line are accepted and assume the default 640x480 resolution.
inline constexpr size_t kStreamHeaderBytes = 28;
inline constexpr size_t kEventRecordBytes = 13;

/// Writes a stream. Throws ValidationError if events are unsorted or out of
/// the header's bounds; I/O failures surface as std::runtime_error.
void write_stream(const StreamHeader& header, std::span<const Event> events,
                  const std::string& path, StreamFormat format = StreamFormat::Binary);

/// Reads a stream, sniffing binary vs CSV from the magic. Events come back in
/// file order; timestamp regressions raise ValidationError, malformed content
/// raises ParseError with the byte offset.
std::pair<StreamHeader, std::vector<Event>> read_stream(const std::string& path);

/// Ground truth CSV: header line `t,cx,cy,a,b`, one sample per line,
/// strictly increasing t, positive half-axes.
void write_ground_truth(std::span<const GroundTruthSample> samples, const std::string& path);
std::vector<GroundTruthSample> read_ground_truth(const std::string& path);

/// Tracker report CSV: header `t_us,x,y,score,mode,algo`. The algo tag names
/// the producing algorithm (e.g. "puck", "cluster").
void write_reports(std::span<const PuckReport> reports, const std::string& path,
                   const std::string& algo = "puck");
std::vector<PuckReport> read_reports(const std::string& path);

}  // namespace puck
