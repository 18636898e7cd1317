#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mavkit/frame.hpp"

namespace mavkit {

// SEQ-gap loss accounting for one inbound stream.
struct LinkStats {
  std::optional<uint8_t> last_seq;
  uint64_t received = 0;
  uint64_t lost = 0;

  /// Fold in the SEQ of the next received frame. The gap to the previous
  /// SEQ counts as loss only when < 128; larger gaps are indistinguishable
  /// from reordering and are ignored.
  void update(uint8_t seq);

  double drop_ratio() const {
    const uint64_t total = lost + received;
    return total == 0 ? 0.0 : double(lost) / double(total);
  }
};

// Byte transport. send() takes one whole frame; recv() drains whatever has
// arrived without blocking. UDP preserves frame boundaries (one frame per
// datagram); TCP returns stream chunks for a StreamParser to reassemble.
// One sender plus one receiver at a time; no other concurrent use.
class Link {
 public:
  virtual ~Link() = default;
  virtual void send(std::span<const uint8_t> bytes) = 0;
  virtual std::vector<Bytes> recv() = 0;
};

/// Binds `local` ("host:port" or ":port"); sends to `remote`, or when
/// `remote` is empty, to wherever the last inbound datagram came from.
std::unique_ptr<Link> open_udp(const std::string& local,
                               const std::string& remote);

/// connect=true dials host:port; connect=false listens on ":port" and
/// accepts one peer at a time (the accept happens lazily inside send/recv;
/// until someone connects, sends are dropped).
std::unique_ptr<Link> open_tcp(const std::string& endpoint, bool connect);

struct SimLinkConfig {
  double drop_probability = 0.0;
  double corrupt_probability = 0.0;  // corrupt flips one random bit
  uint64_t delay_us = 0;
  uint64_t rng_seed = 0;
  // Frames deliverable per direction per advance() call; everything beyond
  // is congestion-dropped. Models link saturation under flooding. 0 means
  // unlimited.
  std::size_t capacity_per_advance = 0;
};

// Deterministic in-process bidirectional link. Messages become visible to
// the peer only after advance(now_us) passes their delivery time; the whole
// arrangement is bit-reproducible for a fixed seed.
class SimLink {
 public:
  explicit SimLink(SimLinkConfig cfg);

  class Endpoint : public Link {
   public:
    void send(std::span<const uint8_t> bytes) override;
    std::vector<Bytes> recv() override;

   private:
    friend class SimLink;
    SimLink* owner_ = nullptr;
    int side_ = 0;
  };

  Endpoint& a() { return ends_[0]; }  // conventionally the GCS side
  Endpoint& b() { return ends_[1]; }  // conventionally the vehicle side

  /// Deliver every queued message due at or before now_us.
  void advance(uint64_t now_us);

  uint64_t frames_dropped() const { return dropped_; }
  uint64_t frames_congestion_dropped() const { return congestion_dropped_; }

 private:
  struct Pending {
    uint64_t due_us;
    Bytes bytes;
  };

  void enqueue(int from_side, std::span<const uint8_t> bytes);

  SimLinkConfig cfg_;
  std::mt19937_64 rng_;
  uint64_t now_us_ = 0;
  std::deque<Pending> pending_[2];  // index = destination side
  std::deque<Bytes> inbox_[2];
  Endpoint ends_[2];
  uint64_t dropped_ = 0;
  uint64_t congestion_dropped_ = 0;
};

}  // namespace mavkit
