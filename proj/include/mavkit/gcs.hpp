#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mavkit/catalog.hpp"
#include "mavkit/messages.hpp"
#include "mavkit/parser.hpp"
#include "mavkit/signing.hpp"
#include "mavkit/transport.hpp"
#include "mavkit/vehicle.hpp"  // EndpointConfig

namespace mavkit {

// Everything the GCS believes about one vehicle, rebuilt from telemetry.
struct VehicleView {
  uint8_t sysid = 0;
  double last_heartbeat_s = -1;  // -1 until the first heartbeat
  uint32_t custom_mode = 0;
  uint8_t base_mode = 0;
  bool armed = false;
  uint8_t system_status = 0;
  double lat_deg = 0, lon_deg = 0;
  double abs_alt_m = 0, relative_alt_m = 0;
  double battery_pct = -1;  // -1 until the first SYS_STATUS
  LinkStats link;

  std::string mode_name() const { return flight_mode_name(custom_mode); }
  /// A heartbeat arrived within the liveness window (3x the 1 s period).
  bool alive(double now_s) const {
    return last_heartbeat_s >= 0 && now_s - last_heartbeat_s <= 3.0;
  }
};

struct Alert {
  enum Rule { HeartbeatGap, SeqLossSpike, TimestampAnomaly, FloodRate };
  Rule rule;
  double t_s = 0;
  std::string evidence;
};
std::string_view alert_rule_name(Alert::Rule rule);

struct DetectorConfig {
  double heartbeat_period_s = 1.0;
  double heartbeat_gap_factor = 3.0;  // fire when gap > factor x period
  double loss_ratio_threshold = 0.2;  // SeqLossSpike, over loss_window_s
  double loss_window_s = 10.0;
  double flood_rate_fps = 100.0;  // FloodRate, frames/s over flood_window_s
  double flood_window_s = 1.0;
};

// Telemetry fusion plus the four rule-based detectors. HeartbeatGap,
// SeqLossSpike, and FloodRate fire once per episode and re-arm when the
// condition clears; TimestampAnomaly fires once per signing rejection.
class GcsCore {
 public:
  GcsCore(uint8_t vehicle_sysid, DetectorConfig cfg = {});

  /// Telemetry/ack bookkeeping for one accepted frame.
  void ingest(const Frame& frame, double now_s);
  /// Rate accounting for any arriving frame, accepted or not.
  void note_arrival(double now_s);
  /// One TimestampAnomaly alert per signed frame the signing layer rejects.
  void note_signing_rejection(VerifyResult reason, double now_s);
  /// Evaluate the time-window rules; newly fired alerts are appended to
  /// alerts() and also returned.
  std::vector<Alert> detector_step(double now_s);

  const VehicleView& view() const { return view_; }
  const std::vector<Alert>& alerts() const { return alerts_; }
  uint64_t alert_count(Alert::Rule rule) const;

 private:
  DetectorConfig cfg_;
  VehicleView view_;
  std::vector<Alert> alerts_;

  std::deque<double> arrivals_;  // sliding window for FloodRate
  struct LossSample {
    double t_s;
    uint64_t received, lost;
  };
  std::deque<LossSample> loss_samples_;
  bool heartbeat_gap_armed_ = true;
  bool loss_spike_armed_ = true;
  bool flood_armed_ = true;
};

enum class CommandOutcome { Pending, Success, Timeout };

// Wire endpoint of the ground station: parses, verifies signing, keeps the
// vehicle view, runs detectors, and drives command/mission state machines.
class GcsActor {
 public:
  GcsActor(Link& link, const Catalog& catalog, EndpointConfig cfg,
           uint8_t vehicle_sysid = 1, DetectorConfig det = {});

  void step(double now_s);

  /// Sends a COMMAND_LONG, then up to `retries` re-sends with incrementing
  /// confirmation bytes, one ack_timeout_s apart. One command at a time.
  void start_command(CommandLong cmd, double now_s, int retries = 3,
                     double ack_timeout_s = 1.0);
  /// Per-item acked upload; items must carry seq 0,1,2,... in order.
  /// Throws NonContiguousSeq otherwise.
  void start_mission_upload(std::vector<MissionItem> items, double now_s,
                            int retries = 3, double ack_timeout_s = 1.0);

  bool action_pending() const { return phase_ != Phase::Idle; }
  CommandOutcome last_outcome() const { return outcome_; }
  /// The ack that settled the last command, empty after a timeout.
  std::optional<CommandAck> last_ack() const { return last_ack_; }
  /// Mission seqs acked during the last (or running) upload.
  const std::vector<uint16_t>& acked_seqs() const { return acked_seqs_; }
  uint64_t frames_sent() const { return frames_sent_; }

  GcsCore& core() { return core_; }
  const GcsCore& core() const { return core_; }
  const std::vector<Bytes>& accepted_log() const { return accepted_; }
  std::optional<MissionItem> last_home_reply() const { return home_reply_; }

 private:
  enum class Phase { Idle, Command, Mission };

  void dispatch(const Frame& frame, double now_s);
  void send_payload(uint32_t msgid, const Bytes& payload);
  void action_step(double now_s);
  void send_current_mission_item();

  Link& link_;
  const Catalog& catalog_;
  EndpointConfig cfg_;
  uint8_t vehicle_sysid_;
  StreamParser parser_;
  std::optional<SigningContext> signing_;
  GcsCore core_;
  std::vector<Bytes> accepted_;
  std::optional<MissionItem> home_reply_;
  uint8_t seq_ = 0;
  uint64_t frames_sent_ = 0;
  double hb_next_s_ = 0;

  Phase phase_ = Phase::Idle;
  CommandOutcome outcome_ = CommandOutcome::Success;
  std::optional<CommandAck> last_ack_;
  CommandLong pending_cmd_{};
  std::vector<MissionItem> pending_items_;
  std::size_t item_index_ = 0;
  std::vector<uint16_t> acked_seqs_;
  int retries_left_ = 0;
  int retries_budget_ = 0;
  double ack_timeout_s_ = 1.0;
  double next_deadline_s_ = 0;
  bool awaiting_ack_ = false;
};

}  // namespace mavkit
