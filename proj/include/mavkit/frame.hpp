#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mavkit/errors.hpp"

namespace mavkit {

// MAVLink 1.0 frame:
//   ┌──────┬─────┬─────┬─────┬──────┬─────┬─────────┬─────┬─────┐
//   │ STX  │ LEN │ SEQ │ SYS │ COMP │ MSG │ payload │ CKA │ CKB │
//   │ 0xFE │ u8  │ u8  │ u8  │ u8   │ u8  │ LEN     │ crc lo/hi │
//   └──────┴─────┴─────┴─────┴──────┴─────┴─────────┴─────┴─────┘
// wire size = 8 + LEN (min 8, max 263)
//
// MAVLink 2.0 frame:
//   ┌──────┬─────┬──────────┬────────┬─────┬─────┬──────┬───────────┬─────────┬─────┬───────────┐
//   │ STX  │ LEN │ INCOMPAT │ COMPAT │ SEQ │ SYS │ COMP │ MSGID     │ payload │ CRC │ signature │
//   │ 0xFD │ u8  │ u8       │ u8     │ u8  │ u8  │ u8   │ u24 LE    │ LEN     │ u16 │ 13 bytes  │
//   └──────┴─────┴──────────┴────────┴─────┴─────┴──────┴───────────┴─────────┴─────┴───────────┘
// wire size = 12 + LEN, +13 when INCOMPAT bit 0x01 is set (signed).
//
// The CRC is CRC-16/X.25 over LEN..payload (STX excluded) followed by the
// per-message seed byte. The signature block is never covered by the CRC.

inline constexpr uint8_t kStxV1 = 0xFE;
inline constexpr uint8_t kStxV2 = 0xFD;
inline constexpr uint8_t kIncompatSigned = 0x01;
inline constexpr std::size_t kSignatureWireLen = 13;
inline constexpr std::size_t kMaxPayload = 255;
inline constexpr std::size_t kV1Overhead = 8;
inline constexpr std::size_t kV2Overhead = 12;

using Bytes = std::vector<uint8_t>;

// 13-byte MAVLink 2.0 signature trailer.
// timestamp is 48 bits, in 10 microsecond units since 2015-01-01T00:00:00 GMT,
// strictly increasing per outgoing stream.
struct SignatureBlock {
  uint8_t link_id = 0;
  uint64_t timestamp = 0;  // low 48 bits significant
  std::array<uint8_t, 6> sig48{};

  bool operator==(const SignatureBlock&) const = default;
};

struct FrameV1 {
  uint8_t seq = 0;
  uint8_t sysid = 0;
  uint8_t compid = 0;
  uint8_t msgid = 0;
  Bytes payload;
  uint16_t crc = 0;

  bool operator==(const FrameV1&) const = default;
};

struct FrameV2 {
  uint8_t incompat_flags = 0;
  uint8_t compat_flags = 0;  // parsed and preserved, never interpreted
  uint8_t seq = 0;
  uint8_t sysid = 0;
  uint8_t compid = 0;
  uint32_t msgid = 0;  // 24-bit
  Bytes payload;
  uint16_t crc = 0;
  std::optional<SignatureBlock> signature;

  bool is_signed() const { return (incompat_flags & kIncompatSigned) != 0; }
  bool operator==(const FrameV2&) const = default;
};

using Frame = std::variant<FrameV1, FrameV2>;

uint8_t frame_sysid(const Frame& f);
uint8_t frame_compid(const Frame& f);
uint8_t frame_seq(const Frame& f);
uint32_t frame_msgid(const Frame& f);
const Bytes& frame_payload(const Frame& f);

/// CRC over LEN..MSGID + payload + seed byte (STX excluded).
uint16_t frame_crc(const FrameV1& f, uint8_t seed);
uint16_t frame_crc(const FrameV2& f, uint8_t seed);

/// Recompute and store the frame's CRC for the given per-message seed.
void seal(FrameV1& f, uint8_t seed);
void seal(FrameV2& f, uint8_t seed);

/// Emit the frame exactly as stored (CRC is not recomputed).
/// Throws PayloadTooLong, and FlagSignatureMismatch when signature presence
/// disagrees with the incompat bit.
Bytes to_wire(const FrameV1& f);
Bytes to_wire(const FrameV2& f);

/// STX through CRC as stored, signature block omitted and flag agreement not
/// checked. This byte range is the signed portion of a v2 frame.
Bytes wire_stx_to_crc(const FrameV2& f);

/// seal() + to_wire() in one step.
Bytes serialize(FrameV1 f, uint8_t seed);
Bytes serialize(FrameV2 f, uint8_t seed);

Bytes serialize(Frame f, uint8_t seed);

/// Rolling 8-bit sequence number: 255 wraps to 0.
inline uint8_t seq_next(uint8_t current) {
  return static_cast<uint8_t>(current + 1);
}

}  // namespace mavkit
