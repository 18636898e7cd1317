#include "mavkit/parser.hpp"

#include <utility>

#include "mavkit/crc.hpp"

namespace mavkit {

namespace {

constexpr std::size_t kNoCandidate = static_cast<std::size_t>(-1);

bool is_stx(uint8_t b) { return b == kStxV1 || b == kStxV2; }

uint16_t read_u16le(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

StreamParser::StreamParser(SeedLookup seed_lookup)
    : seed_lookup_(std::move(seed_lookup)) {}

std::vector<ParsedFrame> StreamParser::feed(std::span<const uint8_t> data) {
  buf_.insert(buf_.end(), data.begin(), data.end());
  std::vector<ParsedFrame> out;

  for (;;) {
    // Hunt for the next candidate STX, discarding everything before it.
    std::size_t stx = kNoCandidate;
    for (std::size_t i = pos_; i < buf_.size(); ++i) {
      if (is_stx(buf_[i])) {
        stx = i;
        break;
      }
    }
    if (stx == kNoCandidate) {
      bytes_discarded_ += buf_.size() - pos_;
      buf_.clear();
      pos_ = 0;
      return out;
    }
    bytes_discarded_ += stx - pos_;
    pos_ = stx;

    std::size_t advance = try_candidate(out);
    if (advance == 0) break;  // incomplete candidate, wait for more bytes
    pos_ += advance;
  }

  buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
  pos_ = 0;
  return out;
}

std::size_t StreamParser::try_candidate(std::vector<ParsedFrame>& out) {
  const uint8_t* p = buf_.data() + pos_;
  const std::size_t avail = buf_.size() - pos_;
  const bool v2 = p[0] == kStxV2;

  // Enough header to know the candidate's full extent?
  if (avail < (v2 ? 3u : 2u)) return 0;
  const std::size_t len = p[1];
  const bool sig = v2 && (p[2] & kIncompatSigned);
  const std::size_t total =
      (v2 ? kV2Overhead : kV1Overhead) + len + (sig ? kSignatureWireLen : 0);
  if (avail < total) return 0;

  // CRC covers LEN through payload, never the STX or the signature.
  const std::size_t crc_span = (v2 ? 9 : 5) + len;
  const uint32_t msgid =
      v2 ? static_cast<uint32_t>(p[7] | (p[8] << 8) | (p[9] << 16)) : p[5];
  const std::optional<uint8_t> seed = seed_lookup_(msgid);

  const uint16_t wire_crc = read_u16le(p + 1 + crc_span);
  bool ok = false;
  if (seed) {
    Crc16X25 acc;
    acc.update(std::span<const uint8_t>(p + 1, crc_span));
    acc.update(*seed);
    ok = acc.value() == wire_crc;
  }

  ParsedFrame parsed;
  parsed.verdict = ok ? CrcVerdict::Ok : CrcVerdict::Bad;
  if (v2) {
    FrameV2 f;
    f.incompat_flags = p[2];
    f.compat_flags = p[3];
    f.seq = p[4];
    f.sysid = p[5];
    f.compid = p[6];
    f.msgid = msgid;
    f.payload.assign(p + 10, p + 10 + len);
    f.crc = wire_crc;
    if (sig) {
      SignatureBlock b;
      const uint8_t* s = p + 1 + crc_span + 2;
      b.link_id = s[0];
      b.timestamp = 0;
      for (int i = 0; i < 6; ++i)
        b.timestamp |= static_cast<uint64_t>(s[1 + i]) << (8 * i);
      for (int i = 0; i < 6; ++i) b.sig48[static_cast<std::size_t>(i)] = s[7 + i];
      f.signature = b;
    }
    parsed.frame = std::move(f);
  } else {
    FrameV1 f;
    f.seq = p[2];
    f.sysid = p[3];
    f.compid = p[4];
    f.msgid = p[5];
    f.payload.assign(p + 6, p + 6 + len);
    f.crc = wire_crc;
    parsed.frame = std::move(f);
  }
  out.push_back(std::move(parsed));

  if (ok) {
    ++frames_ok_;
    return total;
  }
  // Bad CRC or unknown msgid: the LEN byte cannot be trusted, so resume the
  // scan a single byte in rather than skipping the claimed extent.
  ++frames_bad_crc_;
  ++bytes_discarded_;
  return 1;
}

}  // namespace mavkit
