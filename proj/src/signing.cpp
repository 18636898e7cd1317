#include "mavkit/signing.hpp"

#include <chrono>
#include <fstream>
#include <random>
#include <utility>

#include "mavkit/errors.hpp"
#include "mavkit/sha256.hpp"

namespace mavkit {

std::string_view verify_result_name(VerifyResult r) {
  switch (r) {
    case VerifyResult::Accept: return "Accept";
    case VerifyResult::BadSignature: return "BadSignature";
    case VerifyResult::ReplayOrStale: return "ReplayOrStale";
    case VerifyResult::ClockSkew: return "ClockSkew";
    case VerifyResult::UnsignedRejected: return "UnsignedRejected";
  }
  return "?";
}

uint64_t timestamp_from_unix_us(int64_t unix_us) {
  const int64_t epoch_us = int64_t(kSigningEpochUnixSec) * 1'000'000;
  if (unix_us <= epoch_us) return 0;
  return (uint64_t(unix_us - epoch_us) / 10) & kTimestampMask;
}

uint64_t timestamp_now() {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return timestamp_from_unix_us(
      std::chrono::duration_cast<std::chrono::microseconds>(now).count());
}

SigningContext::SigningContext(SecretKey key, Clock clock,
                               UnsignedPolicy policy)
    : key_(key), clock_(std::move(clock)), policy_(policy) {
  if (!clock_) clock_ = [] { return timestamp_now(); };
}

std::array<uint8_t, 6> SigningContext::compute_sig48(
    const FrameV2& frame, uint8_t link_id, uint64_t timestamp) const {
  Sha256 h;
  h.update(key_.bytes);
  const Bytes core = wire_stx_to_crc(frame);
  h.update(core);
  h.update(std::span<const uint8_t>(&link_id, 1));
  uint8_t ts[6];
  for (int i = 0; i < 6; ++i) ts[i] = uint8_t(timestamp >> (8 * i));
  h.update(ts);
  const Sha256::Digest d = h.finish();
  std::array<uint8_t, 6> sig;
  std::copy(d.begin(), d.begin() + 6, sig.begin());
  return sig;
}

FrameV2 SigningContext::sign_frame(FrameV2 frame, uint8_t link_id,
                                   uint8_t seed) {
  frame.incompat_flags |= kIncompatSigned;
  seal(frame, seed);

  // +1 keeps the stream strictly monotone even when the clock stalls.
  const uint64_t ts =
      std::max(clock_() & kTimestampMask, (out_timestamp_ + 1) & kTimestampMask);
  SignatureBlock block;
  block.link_id = link_id;
  block.timestamp = ts;
  block.sig48 = compute_sig48(frame, link_id, ts);
  frame.signature = block;
  out_timestamp_ = ts;
  return frame;
}

VerifyResult SigningContext::verify_frame(const FrameV2& frame) {
  if (!frame.is_signed() || !frame.signature) {
    return policy_ == UnsignedPolicy::Accept ? VerifyResult::Accept
                                             : VerifyResult::UnsignedRejected;
  }
  const SignatureBlock& sig = *frame.signature;
  const uint64_t ts = sig.timestamp & kTimestampMask;

  if (compute_sig48(frame, sig.link_id, ts) != sig.sig48)
    return VerifyResult::BadSignature;

  const StreamKey stream{frame.sysid, frame.compid, sig.link_id};
  const auto it = last_timestamp_.find(stream);
  if (it != last_timestamp_.end() && ts <= it->second)
    return VerifyResult::ReplayOrStale;

  const uint64_t now = clock_() & kTimestampMask;
  const uint64_t skew = ts > now ? ts - now : now - ts;
  if (skew > kSkewWindowUnits) return VerifyResult::ClockSkew;

  last_timestamp_[stream] = ts;
  return VerifyResult::Accept;
}

SecretKey keygen(std::optional<uint64_t> seed) {
  std::mt19937_64 rng(seed ? *seed : std::random_device{}());
  SecretKey key;
  for (std::size_t i = 0; i < key.bytes.size(); i += 8) {
    const uint64_t word = rng();
    for (std::size_t j = 0; j < 8; ++j)
      key.bytes[i + j] = uint8_t(word >> (8 * j));
  }
  return key;
}

namespace {

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

SecretKey load_key(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadKeyFile("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (text.size() != 65 || text.back() != '\n')
    throw BadKeyFile(path.string() +
                     ": expected exactly 64 hex characters and a newline");
  SecretKey key;
  for (std::size_t i = 0; i < 32; ++i) {
    const int hi = hex_nibble(text[2 * i]);
    const int lo = hex_nibble(text[2 * i + 1]);
    if (hi < 0 || lo < 0)
      throw BadKeyFile(path.string() + ": non-hex character at offset " +
                       std::to_string(2 * i));
    key.bytes[i] = uint8_t(hi << 4 | lo);
  }
  return key;
}

void store_key(const SecretKey& key, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BadKeyFile("cannot write " + path.string());
  static constexpr char kHex[] = "0123456789abcdef";
  for (uint8_t b : key.bytes) {
    out.put(kHex[b >> 4]);
    out.put(kHex[b & 0xF]);
  }
  out.put('\n');
  if (!out) throw BadKeyFile("write failed for " + path.string());
}

}  // namespace mavkit
