#pragma once

#include <cstdint>
#include <span>

namespace mavkit {

// CRC-16/X.25: reflected polynomial 0x1021 (0x8408 in shift-right form),
// initial value 0xFFFF, byte-wise accumulation, no final inversion.
//
// Two independent paths are provided on purpose: crc_x25_ref() walks every
// bit and serves as the reference, crc_x25() uses a precomputed table. They
// must always agree; tests cross-check them on random inputs.

/// Bit-by-bit reference implementation.
uint16_t crc_x25_ref(std::span<const uint8_t> data);

/// Table-driven fast path.
uint16_t crc_x25(std::span<const uint8_t> data);

/// Incremental accumulator (table-driven).
class Crc16X25 {
 public:
  void update(uint8_t byte);
  void update(std::span<const uint8_t> data);
  uint16_t value() const { return crc_; }

 private:
  uint16_t crc_ = 0xFFFF;
};

}  // namespace mavkit
