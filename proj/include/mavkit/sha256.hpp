#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace mavkit {

// FIPS 180-4 SHA-256. Self-contained so the toolkit needs no crypto library;
// validated in the tests against the published known-answer vectors.
class Sha256 {
 public:
  using Digest = std::array<uint8_t, 32>;

  Sha256();
  void update(std::span<const uint8_t> data);
  /// Finalizes and returns the digest; the object must not be reused after.
  Digest finish();

  static Digest hash(std::span<const uint8_t> data);

 private:
  void compress(const uint8_t* block);

  std::array<uint32_t, 8> h_;
  std::array<uint8_t, 64> buf_;
  std::size_t buf_len_ = 0;
  uint64_t total_len_ = 0;
};

}  // namespace mavkit
