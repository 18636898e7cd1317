#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string_view>

#include "mavkit/frame.hpp"

namespace mavkit {

// Signature timestamps count 10 microsecond units from this instant
// (2015-01-01T00:00:00 GMT, as unix seconds).
inline constexpr uint64_t kSigningEpochUnixSec = 1420070400;
// One minute of acceptable clock skew, in timestamp units.
inline constexpr uint64_t kSkewWindowUnits = 6'000'000;
inline constexpr uint64_t kTimestampMask = (uint64_t(1) << 48) - 1;

struct SecretKey {
  std::array<uint8_t, 32> bytes{};
  bool operator==(const SecretKey&) const = default;
};

// Anti-replay state is tracked per (sysid, compid, link_id) stream.
struct StreamKey {
  uint8_t sysid = 0;
  uint8_t compid = 0;
  uint8_t link_id = 0;
  auto operator<=>(const StreamKey&) const = default;
};

enum class VerifyResult {
  Accept,
  BadSignature,
  ReplayOrStale,
  ClockSkew,
  UnsignedRejected,
};
std::string_view verify_result_name(VerifyResult r);

enum class UnsignedPolicy { Reject, Accept };

/// Unix microseconds to signature timestamp units (48-bit truncated;
/// instants before the 2015 epoch clamp to 0).
uint64_t timestamp_from_unix_us(int64_t unix_us);

/// Current wall-clock time in timestamp units.
uint64_t timestamp_now();

// Signing and verification endpoint for one link. Owns the outgoing
// timestamp and the per-stream last-seen table; callers serialize access.
class SigningContext {
 public:
  using Clock = std::function<uint64_t()>;  // returns timestamp units

  /// Default clock is the wall clock; tests and the simulator inject one.
  explicit SigningContext(SecretKey key, Clock clock = {},
                          UnsignedPolicy policy = UnsignedPolicy::Reject);

  /// Sets the incompat bit, seals the CRC with `seed`, then attaches the
  /// signature block: timestamp = max(now, out_timestamp + 1), sig48 = first
  /// 6 bytes of SHA-256(key | frame STX..CRC | link_id | timestamp LE48).
  FrameV2 sign_frame(FrameV2 frame, uint8_t link_id, uint8_t seed);

  /// Verdict for a CRC-clean inbound frame. Rule order: signature first,
  /// then replay, then skew, so forged frames cannot probe replay state.
  VerifyResult verify_frame(const FrameV2& frame);

  uint64_t out_timestamp() const { return out_timestamp_; }
  UnsignedPolicy unsigned_policy() const { return policy_; }
  void set_unsigned_policy(UnsignedPolicy p) { policy_ = p; }

 private:
  std::array<uint8_t, 6> compute_sig48(const FrameV2& frame, uint8_t link_id,
                                       uint64_t timestamp) const;

  SecretKey key_;
  Clock clock_;
  UnsignedPolicy policy_;
  std::map<StreamKey, uint64_t> last_timestamp_;
  uint64_t out_timestamp_ = 0;
};

/// Fresh random 32-byte key; pass a seed for reproducible tests.
SecretKey keygen(std::optional<uint64_t> seed = std::nullopt);

// Key files hold exactly 64 hex characters plus one trailing newline.
// Anything else loads as BadKeyFile.
SecretKey load_key(const std::filesystem::path& path);
void store_key(const SecretKey& key, const std::filesystem::path& path);

}  // namespace mavkit
