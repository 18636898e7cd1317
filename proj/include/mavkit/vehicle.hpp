#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mavkit/catalog.hpp"
#include "mavkit/messages.hpp"
#include "mavkit/parser.hpp"
#include "mavkit/signing.hpp"
#include "mavkit/transport.hpp"

namespace mavkit {

// Flat-earth local frame: north/east meters from the spawn origin, flat
// terrain at the origin's altitude. Good to well under 1% over the few
// hundred meters a desk-scale mission covers.
inline constexpr double kMetersPerDegLat = 111320.0;

struct GeoOrigin {
  double lat_deg = 0;
  double lon_deg = 0;
  double alt_m = 0;  // absolute (sea level) altitude of the ground
};

struct SimParams {
  int tick_hz = 50;
  double loiter_speed_cms = 500.0;  // horizontal and vertical speed cap
  double max_accel_cms2 = 250.0;    // half of loiter_speed per second
  double alt_p_gain = 1.0;          // 1/s, also used horizontally
  uint8_t battery_failsafe_pct = 20;
  FlightMode failsafe_action = FlightMode::Rtl;  // LAND or RTL
  double heartbeat_period_s = 1.0;
  double battery_drain_pct_per_s = 0.05;  // while armed
  double waypoint_radius_m = 2.0;
};

struct VehicleEvent {
  enum Kind {
    Touchdown,
    GroundCollision,
    FailsafeTriggered,
    MissionResetInFlight,
  };
  Kind kind;
  double t_s;
  std::string detail;
};

// Snapshot of the autopilot state in wire units.
struct VehicleState {
  int32_t lat_e7 = 0;
  int32_t lon_e7 = 0;
  int32_t abs_alt_mm = 0;
  bool home_set = false;
  int32_t home_lat_e7 = 0;
  int32_t home_lon_e7 = 0;
  int32_t home_abs_alt_mm = 0;
  int32_t relative_alt_mm = 0;
  int16_t vx_cms = 0;  // north
  int16_t vy_cms = 0;  // east
  int16_t vz_cms = 0;  // positive up (our sign convention)
  uint16_t heading_cdeg = 0;
  FlightMode mode = FlightMode::Stabilize;
  bool armed = false;
  double battery_pct = 100.0;
  bool gps_fix_3d = true;
  double hdop = 1.0;
  std::vector<MissionItem> mission;
  std::size_t mission_index = 0;
  uint8_t system_status = uint8_t(MavState::Standby);
};

struct CommandResponse {
  CommandAck ack;
  std::optional<MissionItem> home_reply;  // GET_HOME answers with seq 0
};

// The simulated autopilot proper: point-mass kinematics at a fixed step,
// the flight-mode state machine, command/mission handling and failsafes.
// Pure simulation; all wire concerns live in VehicleActor.
class Vehicle {
 public:
  Vehicle(SimParams params, GeoOrigin origin);

  /// One integration step; dt is expected to be 1/tick_hz.
  void tick(double dt);

  CommandResponse handle_command(const CommandLong& cmd);
  /// Upload protocol (seq 0 restarts, then contiguous appends) or, when
  /// airborne in GUIDED, a single goto target. Ack carries command = 39.
  CommandAck handle_mission_item(const MissionItem& item);
  bool set_mode(FlightMode mode);
  bool arming_allowed() const;
  void failsafe_check();

  /// Payloads due since the last call: HEARTBEAT and SYS_STATUS at 1 Hz,
  /// GLOBAL_POSITION at 4 Hz. drop_rate_permyriad feeds SYS_STATUS.
  std::vector<std::pair<uint32_t, Bytes>> emit_telemetry(
      double now_s, uint16_t drop_rate_permyriad, uint16_t errors_comm);

  // Scenario/environment hooks.
  void set_gps(bool fix_3d, double hdop);
  void set_battery(double pct);
  void set_wind(double north_ms, double east_ms);

  VehicleState state() const;
  FlightMode mode() const { return mode_; }
  bool armed() const { return armed_; }
  bool airborne() const { return airborne_; }
  bool crashed() const { return crashed_; }
  bool mission_complete() const { return mission_complete_; }
  double relative_alt_m() const { return up_m_; }
  double horizontal_speed_ms() const;
  double distance_to_home_m() const;
  const std::vector<MissionItem>& mission() const { return mission_; }
  const std::vector<uint16_t>& visited_waypoints() const { return visited_; }
  const std::vector<VehicleEvent>& events() const { return events_; }

 private:
  struct Target {
    double n = 0, e = 0, up = 0;
    bool active = false;
  };

  Target current_target() const;
  void arrive_checks();
  void ground_contact();
  void land_here();
  MissionItem home_item() const;
  void geo_to_local(double lat_deg, double lon_deg, double& n,
                    double& e) const;
  void local_to_geo(double n, double e, double& lat_deg,
                    double& lon_deg) const;
  double item_target_up(const MissionItem& item) const;

  SimParams params_;
  GeoOrigin origin_;

  double now_s_ = 0;
  double n_m_ = 0, e_m_ = 0, up_m_ = 0;   // position, up relative to ground
  double vn_ms_ = 0, ve_ms_ = 0, vu_ms_ = 0;
  double heading_deg_ = 0;
  double wind_n_ms_ = 0, wind_e_ms_ = 0;

  FlightMode mode_ = FlightMode::Stabilize;
  bool armed_ = false;
  bool airborne_ = false;
  bool crashed_ = false;
  double battery_pct_ = 100.0;
  bool gps_fix_3d_ = true;
  double hdop_ = 1.0;
  bool failsafe_latched_ = false;

  bool home_set_ = false;
  double home_n_ = 0, home_e_ = 0, home_up_ = 0;
  double home_lat_deg_ = 0, home_lon_deg_ = 0, home_alt_m_ = 0;

  std::vector<MissionItem> mission_;
  std::size_t mission_index_ = 0;
  bool mission_complete_ = false;
  std::vector<uint16_t> visited_;

  Target guided_target_;
  Target hold_target_;  // LOITER / ALT_HOLD / STABILIZE / LAND anchor
  bool rtl_descending_ = false;
  double rtl_cruise_up_ = 0;

  double hb_next_s_ = 0, pos_next_s_ = 0, sys_next_s_ = 0;

  std::vector<VehicleEvent> events_;
};

// Identity and signing setup shared by the wire endpoints.
struct EndpointConfig {
  uint8_t sysid = 1;  // 0 is reserved; 255 is conventionally the GCS
  uint8_t compid = 1;
  bool signing = false;
  SecretKey key{};
  uint8_t link_id = 0;
  SigningContext::Clock clock;  // defaults to wall clock when empty
};

// Wire endpoint around a Vehicle: drains the link, enforces signing,
// dispatches commands and mission items, sends acks and telemetry.
class VehicleActor {
 public:
  VehicleActor(Vehicle vehicle, Link& link, const Catalog& catalog,
               EndpointConfig cfg);

  /// Drain inbound, advance the simulation by dt, emit due telemetry.
  void step(double now_s, double dt);

  Vehicle& vehicle() { return vehicle_; }
  const Vehicle& vehicle() const { return vehicle_; }

  /// Raw wire bytes of every frame this endpoint accepted (CRC and, when
  /// signing is on, signature both good) since construction.
  const std::vector<Bytes>& accepted_log() const { return accepted_; }

  /// Called for every signed inbound frame the signing layer rejected.
  std::function<void(VerifyResult, double now_s)> on_signing_reject;

  const LinkStats& stats() const { return stats_; }

 private:
  void dispatch(const Frame& frame, double now_s);
  void send_payload(uint32_t msgid, const Bytes& payload);

  Vehicle vehicle_;
  Link& link_;
  const Catalog& catalog_;
  EndpointConfig cfg_;
  StreamParser parser_;
  std::optional<SigningContext> signing_;
  LinkStats stats_;
  std::vector<Bytes> accepted_;
  uint8_t seq_ = 0;
};

}  // namespace mavkit
