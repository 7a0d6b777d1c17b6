#include "puck/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <system_error>

namespace puck {

namespace {

constexpr char kMagic[4] = {'E', 'V', 'S', '1'};

void put_u16(std::string& buf, uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint16_t get_u16(const char* p) {
  auto b = reinterpret_cast<const unsigned char*>(p);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32(const char* p) {
  auto b = reinterpret_cast<const unsigned char*>(p);
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint64_t get_u64(const char* p) {
  uint64_t v = 0;
  auto b = reinterpret_cast<const unsigned char*>(p);
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void validate_events(const StreamHeader& header, std::span<const Event> events) {
  uint64_t prev_t = 0;
  for (size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.t < prev_t)
      throw ValidationError("events not sorted by timestamp at index " + std::to_string(i));
    prev_t = e.t;
    if (e.x >= header.width || e.y >= header.height)
      throw ValidationError("event coordinates out of bounds at index " + std::to_string(i));
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("read failure on " + path);
  return content;
}

void write_all(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failure on " + path);
}

// Parses one unsigned/double field up to the next delimiter. Returns false on
// malformed input.
template <typename T>
bool parse_field(const char*& p, const char* end, char delim, T& out) {
  auto [next, ec] = std::from_chars(p, end, out);
  if (ec != std::errc()) return false;
  p = next;
  if (delim == '\0') return true;
  if (p == end || *p != delim) return false;
  ++p;
  return true;
}

std::pair<StreamHeader, std::vector<Event>> read_stream_csv(const std::string& content) {
  StreamHeader header;  // defaults apply when no comment header is present
  std::vector<Event> events;
  bool have_header = false;

  const char* p = content.data();
  const char* end = p + content.size();
  size_t offset = 0;
  uint64_t prev_t = 0;

  while (p < end) {
    const char* line_start = p;
    const char* nl = static_cast<const char*>(memchr(p, '\n', static_cast<size_t>(end - p)));
    const char* line_end = nl ? nl : end;
    size_t line_offset = offset;
    offset += static_cast<size_t>(line_end - line_start) + (nl ? 1 : 0);
    p = nl ? nl + 1 : end;

    if (line_start == line_end) continue;
    if (*line_start == '#') {
      unsigned long long w, h, dur, cnt;
      if (sscanf(line_start, "# EVS1 %llu %llu %llu %llu", &w, &h, &dur, &cnt) == 4) {
        header.width = static_cast<uint32_t>(w);
        header.height = static_cast<uint32_t>(h);
        header.duration_us = dur;
        header.event_count = cnt;
        have_header = true;
      }
      continue;
    }
    if (!have_header && (*line_start == 't')) continue;  // column header row

    Event e;
    const char* q = line_start;
    unsigned pol = 0;
    if (!parse_field(q, line_end, ',', e.t) || !parse_field(q, line_end, ',', e.x) ||
        !parse_field(q, line_end, ',', e.y) || !parse_field(q, line_end, '\0', pol))
      throw ParseError("malformed CSV event line", line_offset);
    e.p = pol != 0;
    if (e.t < prev_t) throw ValidationError("timestamp regression in " + std::string("CSV stream"));
    prev_t = e.t;
    events.push_back(e);
  }

  if (have_header && header.event_count != events.size())
    throw ParseError("event count mismatch: header says " + std::to_string(header.event_count) +
                         ", file has " + std::to_string(events.size()),
                     0);
  if (!have_header) {
    header.event_count = events.size();
    header.duration_us = events.empty() ? 0 : events.back().t;
  }
  for (const Event& e : events)
    if (e.x >= header.width || e.y >= header.height)
      throw ValidationError("CSV event coordinates out of bounds");
  return {header, std::move(events)};
}

std::pair<StreamHeader, std::vector<Event>> read_stream_binary(const std::string& content) {
  if (content.size() < kStreamHeaderBytes) throw ParseError("truncated header", content.size());
  StreamHeader header;
  header.width = get_u32(content.data() + 4);
  header.height = get_u32(content.data() + 8);
  header.duration_us = get_u64(content.data() + 12);
  header.event_count = get_u64(content.data() + 20);

  size_t expected = kStreamHeaderBytes + header.event_count * kEventRecordBytes;
  if (content.size() != expected)
    throw ParseError("file size " + std::to_string(content.size()) + " does not match header (" +
                         std::to_string(expected) + " expected)",
                     content.size() < expected ? content.size() : expected);

  std::vector<Event> events;
  events.reserve(header.event_count);
  uint64_t prev_t = 0;
  const char* p = content.data() + kStreamHeaderBytes;
  for (uint64_t i = 0; i < header.event_count; ++i, p += kEventRecordBytes) {
    Event e;
    e.t = get_u64(p);
    e.x = get_u16(p + 8);
    e.y = get_u16(p + 10);
    unsigned char pol = static_cast<unsigned char>(p[12]);
    if (pol > 1)
      throw ParseError("bad polarity byte", kStreamHeaderBytes + i * kEventRecordBytes + 12);
    e.p = pol != 0;
    if (e.t < prev_t)
      throw ValidationError("timestamp regression at record " + std::to_string(i));
    prev_t = e.t;
    if (e.x >= header.width || e.y >= header.height)
      throw ValidationError("event coordinates out of bounds at record " + std::to_string(i));
    events.push_back(e);
  }
  return {header, std::move(events)};
}

void append_double(std::string& buf, double v) {
  char tmp[40];
  snprintf(tmp, sizeof(tmp), "%.10g", v);
  buf += tmp;
}

}  // namespace

void write_stream(const StreamHeader& header, std::span<const Event> events,
                  const std::string& path, StreamFormat format) {
  if (header.event_count != events.size())
    throw ValidationError("header event_count does not match event sequence length");
  validate_events(header, events);

  std::string buf;
  if (format == StreamFormat::Binary) {
    buf.reserve(kStreamHeaderBytes + events.size() * kEventRecordBytes);
    buf.append(kMagic, 4);
    put_u32(buf, header.width);
    put_u32(buf, header.height);
    put_u64(buf, header.duration_us);
    put_u64(buf, header.event_count);
    for (const Event& e : events) {
      put_u64(buf, e.t);
      put_u16(buf, e.x);
      put_u16(buf, e.y);
      buf.push_back(e.p ? 1 : 0);
    }
  } else {
    char line[64];
    snprintf(line, sizeof(line), "# EVS1 %u %u %llu %llu\n", header.width, header.height,
             static_cast<unsigned long long>(header.duration_us),
             static_cast<unsigned long long>(header.event_count));
    buf += line;
    for (const Event& e : events) {
      snprintf(line, sizeof(line), "%llu,%u,%u,%u\n", static_cast<unsigned long long>(e.t),
               static_cast<unsigned>(e.x), static_cast<unsigned>(e.y), e.p ? 1u : 0u);
      buf += line;
    }
  }
  write_all(path, buf);
}

std::pair<StreamHeader, std::vector<Event>> read_stream(const std::string& path) {
  std::string content = slurp(path);
  if (content.size() >= 4 && memcmp(content.data(), kMagic, 4) == 0)
    return read_stream_binary(content);
  return read_stream_csv(content);
}

void write_ground_truth(std::span<const GroundTruthSample> samples, const std::string& path) {
  uint64_t prev_t = 0;
  bool first = true;
  for (const GroundTruthSample& s : samples) {
    if (!first && s.t <= prev_t)
      throw ValidationError("ground truth timestamps must be strictly increasing");
    if (s.a <= 0.0 || s.b <= 0.0) throw ValidationError("ground truth half-axes must be positive");
    prev_t = s.t;
    first = false;
  }
  std::string buf = "t,cx,cy,a,b\n";
  for (const GroundTruthSample& s : samples) {
    buf += std::to_string(s.t);
    buf.push_back(',');
    append_double(buf, s.cx);
    buf.push_back(',');
    append_double(buf, s.cy);
    buf.push_back(',');
    append_double(buf, s.a);
    buf.push_back(',');
    append_double(buf, s.b);
    buf.push_back('\n');
  }
  write_all(path, buf);
}

std::vector<GroundTruthSample> read_ground_truth(const std::string& path) {
  std::string content = slurp(path);
  std::vector<GroundTruthSample> samples;
  const char* p = content.data();
  const char* end = p + content.size();
  size_t offset = 0;
  bool first_line = true;

  while (p < end) {
    const char* line_start = p;
    const char* nl = static_cast<const char*>(memchr(p, '\n', static_cast<size_t>(end - p)));
    const char* line_end = nl ? nl : end;
    size_t line_offset = offset;
    offset += static_cast<size_t>(line_end - line_start) + (nl ? 1 : 0);
    p = nl ? nl + 1 : end;

    if (line_start == line_end || *line_start == '#') continue;
    if (first_line && (*line_start < '0' || *line_start > '9')) {
      first_line = false;  // column header
      continue;
    }
    first_line = false;

    GroundTruthSample s;
    const char* q = line_start;
    if (!parse_field(q, line_end, ',', s.t) || !parse_field(q, line_end, ',', s.cx) ||
        !parse_field(q, line_end, ',', s.cy) || !parse_field(q, line_end, ',', s.a) ||
        !parse_field(q, line_end, '\0', s.b))
      throw ParseError("malformed ground truth line", line_offset);
    if (!samples.empty() && s.t <= samples.back().t)
      throw ValidationError("ground truth timestamps must be strictly increasing");
    if (s.a <= 0.0 || s.b <= 0.0) throw ValidationError("ground truth half-axes must be positive");
    samples.push_back(s);
  }
  return samples;
}

void write_reports(std::span<const PuckReport> reports, const std::string& path,
                   const std::string& algo) {
  std::string buf = "t_us,x,y,score,mode,algo\n";
  for (const PuckReport& r : reports) {
    buf += std::to_string(r.t);
    buf.push_back(',');
    append_double(buf, r.x);
    buf.push_back(',');
    append_double(buf, r.y);
    buf.push_back(',');
    append_double(buf, r.score);
    buf.push_back(',');
    buf += to_string(r.mode);
    buf.push_back(',');
    buf += algo;
    buf.push_back('\n');
  }
  write_all(path, buf);
}

std::vector<PuckReport> read_reports(const std::string& path) {
  std::string content = slurp(path);
  std::vector<PuckReport> reports;
  const char* p = content.data();
  const char* end = p + content.size();
  size_t offset = 0;

  while (p < end) {
    const char* line_start = p;
    const char* nl = static_cast<const char*>(memchr(p, '\n', static_cast<size_t>(end - p)));
    const char* line_end = nl ? nl : end;
    size_t line_offset = offset;
    offset += static_cast<size_t>(line_end - line_start) + (nl ? 1 : 0);
    p = nl ? nl + 1 : end;

    if (line_start == line_end || *line_start == '#') continue;
    if (*line_start < '0' || *line_start > '9') continue;  // header row

    PuckReport r;
    const char* q = line_start;
    if (!parse_field(q, line_end, ',', r.t) || !parse_field(q, line_end, ',', r.x) ||
        !parse_field(q, line_end, ',', r.y) || !parse_field(q, line_end, ',', r.score))
      throw ParseError("malformed report line", line_offset);
    r.mode = (q + 8 <= line_end && memcmp(q, "Tracking", 8) == 0) ? TrackMode::Tracking
                                                                  : TrackMode::Detecting;
    reports.push_back(r);
  }
  return reports;
}

}  // namespace puck
