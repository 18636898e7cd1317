#include "mavkit/crc.hpp"

#include <array>

namespace mavkit {

namespace {

constexpr uint16_t kPolyReflected = 0x8408;

constexpr std::array<uint16_t, 256> make_table() {
  std::array<uint16_t, 256> table{};
  for (uint16_t i = 0; i < 256; ++i) {
    uint16_t crc = i;
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 1) ? static_cast<uint16_t>((crc >> 1) ^ kPolyReflected)
                      : static_cast<uint16_t>(crc >> 1);
    }
    table[i] = crc;
  }
  return table;
}

constexpr auto kTable = make_table();

}  // namespace

uint16_t crc_x25_ref(std::span<const uint8_t> data) {
  uint16_t crc = 0xFFFF;
  for (uint8_t byte : data) {
    crc ^= byte;
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 1) ? static_cast<uint16_t>((crc >> 1) ^ kPolyReflected)
                      : static_cast<uint16_t>(crc >> 1);
    }
  }
  return crc;
}

void Crc16X25::update(uint8_t byte) {
  crc_ = static_cast<uint16_t>((crc_ >> 8) ^ kTable[(crc_ ^ byte) & 0xFF]);
}

void Crc16X25::update(std::span<const uint8_t> data) {
  for (uint8_t byte : data) update(byte);
}

uint16_t crc_x25(std::span<const uint8_t> data) {
  Crc16X25 acc;
  acc.update(data);
  return acc.value();
}

}  // namespace mavkit
