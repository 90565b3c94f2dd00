#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stcf/types.hpp"

namespace stcf {

// Binary container for a sorted PixelHit stream.
// Layout (little-endian): "TPXE", u16 version, u64 config digest, then
// packed records {u16 col, u16 row, u64 toa_ps, u16 tot_ns}.
struct EventFile {
  uint16_t version = 1;
  uint64_t config_digest = 0;
  std::vector<PixelHit> hits;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, size_t byte_offset)
      : std::runtime_error(msg + " (byte offset " +
                           std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  size_t byte_offset() const { return byte_offset_; }

 private:
  size_t byte_offset_;
};

inline constexpr size_t kEventRecordSize = 14;
inline constexpr size_t kEventHeaderSize = 14;

// Throws std::invalid_argument if the stream violates the container
// invariants (unsorted, col/row > 255, tot == 0).
void write_events(const EventFile& file, const std::string& path);
EventFile read_events(const std::string& path);

// In-memory codec used by both the file functions and the fuzz tests.
std::vector<uint8_t> encode_events(const EventFile& file);
EventFile decode_events(std::span<const uint8_t> bytes);

// CSV variant, header "col,row,toa_ps,tot_ns". The digest is not stored.
void write_events_csv(const EventFile& file, const std::string& path);
EventFile read_events_csv(const std::string& path);

}  // namespace stcf
