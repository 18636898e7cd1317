#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mavkit/frame.hpp"

namespace mavkit {

enum class CrcVerdict { Ok, Bad };

struct ParsedFrame {
  Frame frame;
  CrcVerdict verdict = CrcVerdict::Ok;
};

/// Returns the CRC seed for a message id, or nullopt when unknown.
using SeedLookup = std::function<std::optional<uint8_t>(uint32_t msgid)>;

// Streaming frame scanner. Accepts arbitrary byte garbage; v1 and v2 frames
// may interleave on one stream. A candidate starts at any 0xFE/0xFD byte and
// spans the length its LEN (and signature flag) claims. Candidates that fail
// CRC, or whose msgid has no known seed, are emitted with verdict CrcBad and
// the scan resumes one byte past the candidate STX, so a real frame whose
// start fell inside a corrupted candidate is still found.
//
// Signature blocks are carried through raw; signature verification belongs
// to the signing layer, not here.
//
// Single-owner: one parser per input stream, no concurrent feeding.
class StreamParser {
 public:
  explicit StreamParser(SeedLookup seed_lookup);

  /// Consume bytes, return every frame completed by them, in stream order.
  std::vector<ParsedFrame> feed(std::span<const uint8_t> data);

  uint64_t frames_ok() const { return frames_ok_; }
  uint64_t frames_bad_crc() const { return frames_bad_crc_; }
  uint64_t bytes_discarded() const { return bytes_discarded_; }

 private:
  // Attempts the candidate at buf_[pos_]. Returns the number of bytes the
  // scan may advance (0 = need more data).
  std::size_t try_candidate(std::vector<ParsedFrame>& out);

  SeedLookup seed_lookup_;
  std::vector<uint8_t> buf_;
  std::size_t pos_ = 0;
  uint64_t frames_ok_ = 0;
  uint64_t frames_bad_crc_ = 0;
  uint64_t bytes_discarded_ = 0;
};

}  // namespace mavkit
