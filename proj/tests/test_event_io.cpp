#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stcf/event_io.hpp"
#include "stcf/json_io.hpp"
#include "stcf/rng.hpp"

using namespace stcf;
namespace fs = std::filesystem;

namespace {

EventFile sample_file() {
  EventFile f;
  f.config_digest = 0xdeadbeefcafef00dull;
  f.hits = {
      {10, 20, 1000, 150},
      {11, 20, 1000, 151},   // same toa: ordered by col
      {11, 21, 1000, 152},   // same toa and col: ordered by row
      {200, 180, 2500, 25},
      {0, 0, 999999999999, 2000},
  };
  return f;
}

fs::path temp_path(const std::string& stem) {
  return fs::temp_directory_path() /
         (stem + "_" + std::to_string(::getpid()) + ".bin");
}

}  // namespace

TEST_CASE("binary roundtrip preserves every field") {
  EventFile f = sample_file();
  fs::path p = temp_path("events_rt");
  write_events(f, p.string());
  EventFile g = read_events(p.string());
  CHECK(g.version == f.version);
  CHECK(g.config_digest == f.config_digest);
  REQUIRE(g.hits.size() == f.hits.size());
  for (size_t i = 0; i < f.hits.size(); ++i) CHECK(g.hits[i] == f.hits[i]);
  fs::remove(p);
}

TEST_CASE("empty stream roundtrips as a bare header") {
  EventFile f;
  f.config_digest = 7;
  std::vector<uint8_t> bytes = encode_events(f);
  CHECK(bytes.size() == kEventHeaderSize);
  EventFile g = decode_events(bytes);
  CHECK(g.hits.empty());
  CHECK(g.config_digest == 7);
}

TEST_CASE("encoded size is header plus fixed-width records") {
  EventFile f = sample_file();
  std::vector<uint8_t> bytes = encode_events(f);
  CHECK(bytes.size() == kEventHeaderSize + f.hits.size() * kEventRecordSize);
}

TEST_CASE("writer rejects streams that violate container invariants") {
  EventFile f = sample_file();
  std::swap(f.hits[0], f.hits[3]);  // unsorted
  CHECK_THROWS_AS(encode_events(f), std::invalid_argument);

  f = sample_file();
  f.hits[1].tot_ns = 0;
  CHECK_THROWS_AS(encode_events(f), std::invalid_argument);

  f = sample_file();
  f.hits[2].col = 300;
  CHECK_THROWS_AS(encode_events(f), std::invalid_argument);

  f = sample_file();
  f.hits[2].toa_ps = -5;
  CHECK_THROWS_AS(encode_events(f), std::invalid_argument);
}

TEST_CASE("decode errors carry the byte offset of the defect") {
  std::vector<uint8_t> good = encode_events(sample_file());

  SUBCASE("truncated header") {
    std::vector<uint8_t> b(good.begin(), good.begin() + 6);
    try {
      decode_events(b);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.byte_offset() == 6);
    }
  }

  SUBCASE("bad magic") {
    std::vector<uint8_t> b = good;
    b[0] = 'X';
    try {
      decode_events(b);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.byte_offset() == 0);
      CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
  }

  SUBCASE("unsupported version") {
    std::vector<uint8_t> b = good;
    b[4] = 99;
    try {
      decode_events(b);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.byte_offset() == 4);
    }
  }

  SUBCASE("truncated record") {
    std::vector<uint8_t> b(good.begin(), good.end() - 3);
    try {
      decode_events(b);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      // offset points at the start of the partial record
      CHECK(e.byte_offset() == kEventHeaderSize + 4 * kEventRecordSize);
    }
  }

  SUBCASE("column out of range") {
    std::vector<uint8_t> b = good;
    size_t off = kEventHeaderSize + 1 * kEventRecordSize;
    b[off] = 0xff;
    b[off + 1] = 0xff;
    try {
      decode_events(b);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.byte_offset() == off);
    }
  }

  SUBCASE("zero time-over-threshold") {
    std::vector<uint8_t> b = good;
    size_t off = kEventHeaderSize + 2 * kEventRecordSize + 12;
    b[off] = 0;
    b[off + 1] = 0;
    try {
      decode_events(b);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.byte_offset() == off);
    }
  }

  SUBCASE("unsorted stream") {
    EventFile f = sample_file();
    std::vector<uint8_t> b = encode_events(f);
    // swap records 0 and 3 at the byte level to bypass the writer's check
    size_t a = kEventHeaderSize, c = kEventHeaderSize + 3 * kEventRecordSize;
    for (size_t i = 0; i < kEventRecordSize; ++i) std::swap(b[a + i], b[c + i]);
    try {
      decode_events(b);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.byte_offset() >= kEventHeaderSize);
    }
  }
}

TEST_CASE("csv roundtrip") {
  EventFile f = sample_file();
  fs::path p = temp_path("events_csv");
  write_events_csv(f, p.string());
  EventFile g = read_events_csv(p.string());
  REQUIRE(g.hits.size() == f.hits.size());
  for (size_t i = 0; i < f.hits.size(); ++i) CHECK(g.hits[i] == f.hits[i]);
  fs::remove(p);
}

TEST_CASE("csv reader rejects malformed input") {
  fs::path p = temp_path("events_badcsv");

  SUBCASE("wrong header") {
    write_text_file(p.string(), "col,row,toa\n1,2,3\n");
    CHECK_THROWS_AS(read_events_csv(p.string()), ParseError);
  }
  SUBCASE("non-numeric field") {
    write_text_file(p.string(), "col,row,toa_ps,tot_ns\n1,2,abc,4\n");
    CHECK_THROWS_AS(read_events_csv(p.string()), ParseError);
  }
  SUBCASE("out-of-range column") {
    write_text_file(p.string(), "col,row,toa_ps,tot_ns\n900,2,3,4\n");
    CHECK_THROWS_AS(read_events_csv(p.string()), ParseError);
  }
  fs::remove(p);
}

// Mutation fuzzing: whatever bytes arrive, decode either succeeds or throws
// ParseError. Anything else (crash, other exception type) is a defect.
TEST_CASE("decoder survives random mutations") {
  EventFile big;
  big.config_digest = 1;
  Rng gen(606);
  int64_t toa = 0;
  for (int i = 0; i < 200; ++i) {
    toa += static_cast<int64_t>(gen.uniform(0, 1e6));
    big.hits.push_back({static_cast<uint16_t>(gen.uniform(0, 256)),
                        static_cast<uint16_t>(gen.uniform(0, 256)), toa,
                        static_cast<uint16_t>(1 + gen.uniform(0, 2000))});
  }
  const std::vector<uint8_t> base = encode_events(big);

  Rng fuzz(707);
  int parsed = 0, rejected = 0;
  for (int round = 0; round < 2000; ++round) {
    std::vector<uint8_t> b = base;
    int flips = 1 + static_cast<int>(fuzz.uniform(0, 8));
    for (int k = 0; k < flips; ++k) {
      size_t pos = static_cast<size_t>(fuzz.uniform(0, double(b.size())));
      b[pos] = static_cast<uint8_t>(fuzz.raw());
    }
    if (fuzz.uniform() < 0.3)
      b.resize(static_cast<size_t>(fuzz.uniform(0, double(b.size()))));
    try {
      decode_events(b);
      parsed++;
    } catch (const ParseError&) {
      rejected++;
    }
  }
  CHECK(parsed + rejected == 2000);
  CHECK(rejected > 0);  // the mutations do hit the validators
}
