#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "mavkit/frame.hpp"

namespace mavkit {

// One captured wire frame. On-disk record layout, all little-endian:
//   [u64 timestamp microseconds][u8 direction][u16 length][length bytes]
// direction: 0 = to-vehicle, 1 = to-gcs.
struct CaptureRecord {
  uint64_t ts_us = 0;
  uint8_t dir = 0;
  Bytes bytes;

  bool operator==(const CaptureRecord&) const = default;
};

inline constexpr uint8_t kDirToVehicle = 0;
inline constexpr uint8_t kDirToGcs = 1;

void capture_write(const std::filesystem::path& path,
                   std::span<const CaptureRecord> records);

/// Throws CaptureCorrupt naming the byte offset of a truncated record.
std::vector<CaptureRecord> capture_read(const std::filesystem::path& path);

// Incremental writer for long-running sessions.
class CaptureWriter {
 public:
  explicit CaptureWriter(const std::filesystem::path& path);
  void append(const CaptureRecord& rec);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

}  // namespace mavkit
