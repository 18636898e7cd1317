#include <random>

#include "doctest.h"
#include "mavkit/catalog.hpp"
#include "mavkit/frame.hpp"
#include "mavkit/messages.hpp"
#include "mavkit/parser.hpp"

using namespace mavkit;

namespace {

Bytes hex(std::string_view s) {
  auto nib = [](char c) {
    return uint8_t(c <= '9' ? c - '0' : c - 'a' + 10);
  };
  Bytes out;
  for (std::size_t i = 0; i + 1 < s.size(); i += 2)
    out.push_back(uint8_t(nib(s[i]) << 4 | nib(s[i + 1])));
  return out;
}

// The reference heartbeat used across the fixture tests; field values are
// part of the frozen byte fixtures, do not change them.
Bytes fixture_payload() {
  Heartbeat hb;
  hb.type = uint8_t(MavType::Quadrotor);
  hb.autopilot = uint8_t(MavAutopilot::ArduPilotMega);
  hb.base_mode = kBaseManual | kBaseStabilize | kBaseReserved;  // 81
  hb.custom_mode = uint32_t(FlightMode::Guided);
  hb.system_status = uint8_t(MavState::Active);
  return hb.encode();
}

}  // namespace

TEST_CASE("frame: wire size law 8+len for v1, 12+len and 25+len for v2") {
  FrameV1 v1;
  v1.msgid = 0;
  seal(v1, 117);
  CHECK(to_wire(v1).size() == 8);  // empty payload, the v1 minimum

  v1.payload.assign(255, 0xAB);
  seal(v1, 117);
  CHECK(to_wire(v1).size() == 263);  // the v1 maximum

  FrameV2 v2;
  seal(v2, 117);
  CHECK(to_wire(v2).size() == 12);

  v2.incompat_flags = kIncompatSigned;
  v2.signature.emplace();
  seal(v2, 117);
  CHECK(to_wire(v2).size() == 25);

  v2.payload.assign(255, 0xCD);
  seal(v2, 117);
  CHECK(to_wire(v2).size() == 25 + 255);

  // arbitrary lengths follow the same law
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const std::size_t len = rng() % 256;
    FrameV1 a;
    a.payload.assign(len, uint8_t(i));
    seal(a, 0);
    CHECK(to_wire(a).size() == kV1Overhead + len);
    FrameV2 b;
    b.payload.assign(len, uint8_t(i));
    seal(b, 0);
    CHECK(to_wire(b).size() == kV2Overhead + len);
  }
}

TEST_CASE("frame: payload over 255 bytes refuses to serialize") {
  FrameV1 v1;
  v1.payload.assign(256, 0);
  CHECK_THROWS_AS((void)to_wire(v1), PayloadTooLong);
  FrameV2 v2;
  v2.payload.assign(256, 0);
  CHECK_THROWS_AS((void)to_wire(v2), PayloadTooLong);
}

TEST_CASE("frame: signature presence must match the incompat bit") {
  FrameV2 f;
  f.incompat_flags = kIncompatSigned;  // flagged but no block attached
  seal(f, 117);
  CHECK_THROWS_AS((void)to_wire(f), FlagSignatureMismatch);

  FrameV2 g;
  g.signature.emplace();  // block attached but not flagged
  seal(g, 117);
  CHECK_THROWS_AS((void)to_wire(g), FlagSignatureMismatch);
}

TEST_CASE("frame: v1 reference fixture is byte-exact") {
  FrameV1 f;
  f.seq = 7;
  f.sysid = 1;
  f.compid = 1;
  f.msgid = 0;
  f.payload = fixture_payload();
  // frozen from an independent CRC implementation
  CHECK(serialize(f, 117) == hex("fe0907010100020351040000000402a700"));
}

TEST_CASE("frame: v2 reference fixture is byte-exact") {
  FrameV2 f;
  f.seq = 7;
  f.sysid = 1;
  f.compid = 1;
  f.msgid = 0;
  f.payload = fixture_payload();
  CHECK(serialize(f, 117) ==
        hex("fd090000070101000000020351040000000402f901"));

  // the signed portion of the same frame with the incompat bit set
  FrameV2 s = f;
  s.incompat_flags = kIncompatSigned;
  seal(s, 117);
  CHECK(wire_stx_to_crc(s) ==
        hex("fd0901000701010000000203510400000004021ef9"));
}

TEST_CASE("frame: v2 msgid is 24-bit little-endian on the wire") {
  FrameV2 f;
  f.msgid = 0x012345;
  seal(f, 0);
  const Bytes w = to_wire(f);
  CHECK(w[7] == 0x45);
  CHECK(w[8] == 0x23);
  CHECK(w[9] == 0x01);
}

TEST_CASE("frame: sequence number wraps 255 to 0") {
  CHECK(seq_next(0) == 1);
  CHECK(seq_next(254) == 255);
  CHECK(seq_next(255) == 0);
}

TEST_CASE("frame: 1000 random round-trips per message per version") {
  const Catalog catalog = Catalog::builtin();
  std::mt19937_64 rng(0x5eed);
  std::uniform_int_distribution<int> byte_dist(0, 255);

  for (const MessageDef* def : catalog.all()) {
    for (int i = 0; i < 1000; ++i) {
      Bytes payload(def->wire_size());
      for (uint8_t& b : payload) b = uint8_t(byte_dist(rng));
      const uint8_t seq = uint8_t(rng() % 256);
      const uint8_t sysid = uint8_t(1 + rng() % 255);
      const uint8_t compid = uint8_t(1 + rng() % 255);

      StreamParser parser(catalog.seed_lookup());

      if (def->id <= 0xFF) {
        FrameV1 v1;
        v1.seq = seq;
        v1.sysid = sysid;
        v1.compid = compid;
        v1.msgid = uint8_t(def->id);
        v1.payload = payload;
        seal(v1, def->seed());
        const auto got = parser.feed(to_wire(v1));
        REQUIRE(got.size() == 1);
        CHECK(got[0].verdict == CrcVerdict::Ok);
        REQUIRE(std::holds_alternative<FrameV1>(got[0].frame));
        CHECK(std::get<FrameV1>(got[0].frame) == v1);
      }

      FrameV2 v2;
      v2.seq = seq;
      v2.sysid = sysid;
      v2.compid = compid;
      v2.msgid = def->id;
      v2.payload = payload;
      seal(v2, def->seed());
      const auto got = parser.feed(to_wire(v2));
      REQUIRE(got.size() == 1);
      CHECK(got[0].verdict == CrcVerdict::Ok);
      REQUIRE(std::holds_alternative<FrameV2>(got[0].frame));
      CHECK(std::get<FrameV2>(got[0].frame) == v2);
    }
  }
}

TEST_CASE("frame: every single-bit flip over a 9-byte-payload frame is "
          "detected") {
  FrameV2 f;
  f.seq = 7;
  f.sysid = 1;
  f.compid = 1;
  f.msgid = 0;
  f.payload = fixture_payload();
  REQUIRE(f.payload.size() == 9);
  const Bytes wire = serialize(f, 117);

  const Catalog catalog = Catalog::builtin();
  for (std::size_t byte = 0; byte < wire.size(); ++byte) {
    for (int bit = 0; bit < 8; ++bit) {
      Bytes mutated = wire;
      mutated[byte] ^= uint8_t(1u << bit);
      StreamParser parser(catalog.seed_lookup());
      const auto got = parser.feed(mutated);
      // Whatever the parser managed to extract, it must never report the
      // mutated bytes as this frame with a good CRC.
      for (const ParsedFrame& pf : got) {
        if (pf.verdict != CrcVerdict::Ok) continue;
        REQUIRE(std::holds_alternative<FrameV2>(pf.frame));
        CHECK(to_wire(std::get<FrameV2>(pf.frame)) != wire);
        CHECK_FALSE(std::get<FrameV2>(pf.frame) == f);
      }
    }
  }
}

TEST_CASE("frame: accessor helpers cover both versions") {
  FrameV1 v1;
  v1.seq = 9;
  v1.sysid = 3;
  v1.compid = 4;
  v1.msgid = 77;
  v1.payload = {1, 2, 3};
  const Frame f1 = v1;
  CHECK(frame_seq(f1) == 9);
  CHECK(frame_sysid(f1) == 3);
  CHECK(frame_compid(f1) == 4);
  CHECK(frame_msgid(f1) == 77);
  CHECK(frame_payload(f1) == Bytes{1, 2, 3});

  FrameV2 v2;
  v2.seq = 200;
  v2.sysid = 255;
  v2.compid = 190;
  v2.msgid = 0xABCDE;
  const Frame f2 = v2;
  CHECK(frame_seq(f2) == 200);
  CHECK(frame_sysid(f2) == 255);
  CHECK(frame_compid(f2) == 190);
  CHECK(frame_msgid(f2) == 0xABCDE);
}
