#include "stcf/event_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>

namespace stcf {
namespace {

constexpr char kMagic[4] = {'T', 'P', 'X', 'E'};
constexpr uint16_t kCurrentVersion = 1;

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back(v >> 8);
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

uint16_t get_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void validate_stream(const std::vector<PixelHit>& hits) {
  const PixelHit* prev = nullptr;
  for (size_t i = 0; i < hits.size(); ++i) {
    const PixelHit& h = hits[i];
    if (h.col > 255 || h.row > 255)
      throw std::invalid_argument("hit " + std::to_string(i) +
                                  ": col/row outside [0, 255]");
    if (h.tot_ns == 0)
      throw std::invalid_argument("hit " + std::to_string(i) + ": tot_ns == 0");
    if (h.toa_ps < 0)
      throw std::invalid_argument("hit " + std::to_string(i) + ": negative toa");
    if (prev && hit_less(h, *prev))
      throw std::invalid_argument("hit " + std::to_string(i) +
                                  ": stream not sorted");
    prev = &h;
  }
}

}  // namespace

std::vector<uint8_t> encode_events(const EventFile& file) {
  validate_stream(file.hits);
  std::vector<uint8_t> out;
  out.reserve(kEventHeaderSize + file.hits.size() * kEventRecordSize);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, file.version);
  put_u64(out, file.config_digest);
  for (const PixelHit& h : file.hits) {
    put_u16(out, h.col);
    put_u16(out, h.row);
    put_u64(out, static_cast<uint64_t>(h.toa_ps));
    put_u16(out, h.tot_ns);
  }
  return out;
}

EventFile decode_events(std::span<const uint8_t> bytes) {
  if (bytes.size() < kEventHeaderSize)
    throw ParseError("truncated header", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ParseError("bad magic", 0);
  EventFile file;
  file.version = get_u16(bytes.data() + 4);
  if (file.version != kCurrentVersion)
    throw ParseError("unsupported version " + std::to_string(file.version), 4);
  file.config_digest = get_u64(bytes.data() + 6);

  size_t body = bytes.size() - kEventHeaderSize;
  if (body % kEventRecordSize != 0)
    throw ParseError("truncated record",
                     kEventHeaderSize + (body / kEventRecordSize) * kEventRecordSize);
  size_t n = body / kEventRecordSize;
  file.hits.resize(n);
  const PixelHit* prev = nullptr;
  for (size_t i = 0; i < n; ++i) {
    size_t off = kEventHeaderSize + i * kEventRecordSize;
    const uint8_t* p = bytes.data() + off;
    PixelHit& h = file.hits[i];
    h.col = get_u16(p);
    h.row = get_u16(p + 2);
    uint64_t toa = get_u64(p + 4);
    h.tot_ns = get_u16(p + 12);
    if (h.col > 255) throw ParseError("col outside [0, 255]", off);
    if (h.row > 255) throw ParseError("row outside [0, 255]", off + 2);
    if (toa > static_cast<uint64_t>(INT64_MAX))
      throw ParseError("toa_ps overflows signed range", off + 4);
    h.toa_ps = static_cast<int64_t>(toa);
    if (h.tot_ns == 0) throw ParseError("tot_ns == 0", off + 12);
    if (prev && hit_less(h, *prev)) throw ParseError("stream not sorted", off);
    prev = &h;
  }
  return file;
}

void write_events(const EventFile& file, const std::string& path) {
  std::vector<uint8_t> bytes = encode_events(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

EventFile read_events(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw std::runtime_error("read failed: " + path);
  return decode_events(bytes);
}

void write_events_csv(const EventFile& file, const std::string& path) {
  validate_stream(file.hits);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "col,row,toa_ps,tot_ns\n";
  for (const PixelHit& h : file.hits)
    out << h.col << ',' << h.row << ',' << h.toa_ps << ',' << h.tot_ns << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

EventFile read_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  size_t offset = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 0);
  if (line != "col,row,toa_ps,tot_ns")
    throw ParseError("bad csv header", 0);
  offset += line.size() + 1;

  EventFile file;
  const PixelHit* prev = nullptr;
  auto parse_int = [&](const char*& p, const char* end, int64_t& v,
                       bool last) {
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{})
      throw ParseError("bad csv field",
                       offset + static_cast<size_t>(p - line.data()));
    if (!last) {
      if (next >= end || *next != ',')
        throw ParseError("expected comma",
                         offset + static_cast<size_t>(next - line.data()));
      ++next;
    } else if (next != end) {
      throw ParseError("trailing characters",
                       offset + static_cast<size_t>(next - line.data()));
    }
    p = next;
  };

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      offset += 1;
      continue;
    }
    const char* p = line.data();
    const char* end = p + line.size();
    int64_t col, row, toa, tot;
    parse_int(p, end, col, false);
    parse_int(p, end, row, false);
    parse_int(p, end, toa, false);
    parse_int(p, end, tot, true);
    if (col < 0 || col > 255) throw ParseError("col outside [0, 255]", offset);
    if (row < 0 || row > 255) throw ParseError("row outside [0, 255]", offset);
    if (toa < 0) throw ParseError("negative toa_ps", offset);
    if (tot <= 0 || tot > 65535) throw ParseError("tot_ns outside (0, 65535]", offset);
    PixelHit h{static_cast<uint16_t>(col), static_cast<uint16_t>(row), toa,
               static_cast<uint16_t>(tot)};
    if (prev && hit_less(h, *prev)) throw ParseError("stream not sorted", offset);
    file.hits.push_back(h);
    prev = &file.hits.back();
    offset += line.size() + 1;
  }
  return file;
}

}  // namespace stcf
