#include <cmath>

#include "doctest.h"
#include "mavkit/messages.hpp"
#include "mavkit/vehicle.hpp"

using namespace mavkit;

namespace {

constexpr double kDt = 0.02;
const GeoOrigin kRiyadh{24.68773, 46.72185, 612.0};

Vehicle fresh_vehicle() { return Vehicle(SimParams{}, kRiyadh); }

void run(Vehicle& v, double seconds) {
  const int ticks = int(std::lround(seconds / kDt));
  for (int i = 0; i < ticks; ++i) v.tick(kDt);
}

CommandLong cmd_arm(double p1) {
  CommandLong c;
  c.command = uint16_t(MavCmd::ArmDisarm);
  c.param1 = p1;
  return c;
}

CommandLong cmd_takeoff(double alt) {
  CommandLong c;
  c.command = uint16_t(MavCmd::Takeoff);
  c.param7 = alt;
  return c;
}

// The standard departure: GUIDED, arm, take off, climb until settled.
void takeoff_to(Vehicle& v, double alt) {
  REQUIRE(v.set_mode(FlightMode::Guided));
  REQUIRE(v.handle_command(cmd_arm(1)).ack.result ==
          uint8_t(CmdResult::Accepted));
  REQUIRE(v.handle_command(cmd_takeoff(alt)).ack.result ==
          uint8_t(CmdResult::Accepted));
  run(v, 30.0);
}

MissionItem wp(uint16_t seq, double lat, double lon, double z,
               MavFrame frame = MavFrame::GlobalRelativeAlt) {
  MissionItem it;
  it.seq = seq;
  it.frame = uint8_t(frame);
  it.x = lat;
  it.y = lon;
  it.z = z;
  return it;
}

// Offsets in meters north/east of the origin, matching the vehicle's own
// flat-earth conversion.
MissionItem wp_local(uint16_t seq, double north_m, double east_m, double z) {
  const double lat = kRiyadh.lat_deg + north_m / kMetersPerDegLat;
  const double lon =
      kRiyadh.lon_deg +
      east_m / (kMetersPerDegLat *
                std::cos(kRiyadh.lat_deg * 3.14159265358979323846 / 180.0));
  return wp(seq, lat, lon, z);
}

void upload_square_mission(Vehicle& v) {
  REQUIRE(v.handle_mission_item(
               wp(0, kRiyadh.lat_deg, kRiyadh.lon_deg, 612.0,
                  MavFrame::Global))
              .result == uint8_t(CmdResult::Accepted));
  REQUIRE(v.handle_mission_item(wp_local(1, 25, 0, 10)).result ==
          uint8_t(CmdResult::Accepted));
  REQUIRE(v.handle_mission_item(wp_local(2, 25, 25, 10)).result ==
          uint8_t(CmdResult::Accepted));
  REQUIRE(v.handle_mission_item(wp_local(3, 0, 25, 10)).result ==
          uint8_t(CmdResult::Accepted));
}

}  // namespace

TEST_CASE("vehicle: takeoff to 10 m settles within half a meter in 30 s") {
  Vehicle v = fresh_vehicle();
  takeoff_to(v, 10.0);
  CHECK(v.relative_alt_m() == doctest::Approx(10.0).epsilon(0.05));
  CHECK(std::abs(v.relative_alt_m() - 10.0) <= 0.5);
  CHECK(v.airborne());
  CHECK(v.armed());
  // absolute altitude reads ground plus height: the 612 + 10 case
  const VehicleState s = v.state();
  CHECK(std::abs(double(s.abs_alt_mm) / 1000.0 - 622.0) <= 0.5);
  CHECK(std::abs(double(s.relative_alt_mm) / 1000.0 - 10.0) <= 0.5);
}

TEST_CASE("vehicle: horizontal speed never exceeds the cap plus one tick of "
          "acceleration") {
  Vehicle v = fresh_vehicle();
  upload_square_mission(v);
  takeoff_to(v, 10.0);
  REQUIRE(v.set_mode(FlightMode::Auto));
  const double cap = 5.0 + 2.5 * kDt + 1e-9;
  for (int i = 0; i < int(60.0 / kDt); ++i) {
    v.tick(kDt);
    CHECK(v.horizontal_speed_ms() <= cap);
  }
}

TEST_CASE("vehicle: arming gates on GPS quality in position modes") {
  Vehicle v = fresh_vehicle();
  REQUIRE(v.set_mode(FlightMode::Loiter));

  v.set_gps(true, 2.0);  // boundary: hdop must be strictly below 2.0
  CHECK(v.handle_command(cmd_arm(1)).ack.result ==
        uint8_t(CmdResult::Denied));

  v.set_gps(true, 1.9);
  CHECK(v.handle_command(cmd_arm(1)).ack.result ==
        uint8_t(CmdResult::Accepted));
  CHECK(v.handle_command(cmd_arm(0)).ack.result ==
        uint8_t(CmdResult::Accepted));

  v.set_gps(false, 1.0);  // no 3D fix
  CHECK(v.handle_command(cmd_arm(1)).ack.result ==
        uint8_t(CmdResult::Denied));

  // manual-capable mode still arms without GPS
  Vehicle manual = fresh_vehicle();
  manual.set_gps(false, 9.9);
  CHECK(manual.handle_command(cmd_arm(1)).ack.result ==
        uint8_t(CmdResult::Accepted));
}

TEST_CASE("vehicle: takeoff requires GUIDED and an armed vehicle") {
  Vehicle v = fresh_vehicle();
  CHECK(v.handle_command(cmd_takeoff(10)).ack.result ==
        uint8_t(CmdResult::Denied));
  REQUIRE(v.set_mode(FlightMode::Guided));
  CHECK(v.handle_command(cmd_takeoff(10)).ack.result ==
        uint8_t(CmdResult::Denied));  // still disarmed
}

TEST_CASE("vehicle: disarming in flight is denied") {
  Vehicle v = fresh_vehicle();
  takeoff_to(v, 10.0);
  CHECK(v.handle_command(cmd_arm(0)).ack.result ==
        uint8_t(CmdResult::Denied));
  CHECK(v.armed());
}

TEST_CASE("vehicle: AUTO visits waypoints in stored order then holds") {
  Vehicle v = fresh_vehicle();
  upload_square_mission(v);
  takeoff_to(v, 10.0);
  REQUIRE(v.set_mode(FlightMode::Auto));
  run(v, 60.0);
  CHECK(v.mission_complete());
  CHECK(v.visited_waypoints() == std::vector<uint16_t>{1, 2, 3});
  CHECK(v.armed());  // holding at the last waypoint, not landing
}

TEST_CASE("vehicle: AUTO needs a mission beyond the home item") {
  Vehicle v = fresh_vehicle();
  CHECK_FALSE(v.set_mode(FlightMode::Auto));
  REQUIRE(v.handle_mission_item(
               wp(0, kRiyadh.lat_deg, kRiyadh.lon_deg, 612.0,
                  MavFrame::Global))
              .result == uint8_t(CmdResult::Accepted));
  CHECK_FALSE(v.set_mode(FlightMode::Auto));  // home alone is no mission
}

TEST_CASE("vehicle: RTL returns within a meter of home and lands") {
  Vehicle v = fresh_vehicle();
  upload_square_mission(v);
  takeoff_to(v, 10.0);
  REQUIRE(v.set_mode(FlightMode::Auto));
  run(v, 60.0);
  REQUIRE(v.mission_complete());

  REQUIRE(v.set_mode(FlightMode::Rtl));
  run(v, 60.0);
  CHECK_FALSE(v.armed());
  CHECK_FALSE(v.crashed());
  CHECK(v.distance_to_home_m() <= 1.0);
  CHECK(v.relative_alt_m() == doctest::Approx(0.0));
  bool touched_down = false;
  for (const VehicleEvent& ev : v.events())
    if (ev.kind == VehicleEvent::Touchdown) touched_down = true;
  CHECK(touched_down);
}

TEST_CASE("vehicle: LAND descends straight down and disarms") {
  Vehicle v = fresh_vehicle();
  takeoff_to(v, 10.0);
  const double n_before = v.state().lat_e7;
  REQUIRE(v.handle_command([] {
             CommandLong c;
             c.command = uint16_t(MavCmd::Land);
             return c;
           }()).ack.result == uint8_t(CmdResult::Accepted));
  CHECK(v.mode() == FlightMode::Land);
  run(v, 30.0);
  CHECK_FALSE(v.armed());
  CHECK_FALSE(v.crashed());
  CHECK(v.state().lat_e7 == n_before);  // no horizontal drift
}

TEST_CASE("vehicle: a GLOBAL waypoint below ground ends in GroundCollision") {
  Vehicle v = fresh_vehicle();
  REQUIRE(v.handle_mission_item(
               wp(0, kRiyadh.lat_deg, kRiyadh.lon_deg, 612.0,
                  MavFrame::Global))
              .result == uint8_t(CmdResult::Accepted));
  // 600 m absolute is 12 m below the 612 m ground
  MissionItem below = wp_local(1, 30, 0, 600.0);
  below.frame = uint8_t(MavFrame::Global);
  REQUIRE(v.handle_mission_item(below).result ==
          uint8_t(CmdResult::Accepted));
  takeoff_to(v, 10.0);
  REQUIRE(v.set_mode(FlightMode::Auto));
  run(v, 60.0);
  CHECK(v.crashed());
  CHECK_FALSE(v.armed());
  bool collided = false;
  for (const VehicleEvent& ev : v.events())
    if (ev.kind == VehicleEvent::GroundCollision) collided = true;
  CHECK(collided);
}

TEST_CASE("vehicle: GUIDED goto flies to a single waypoint") {
  Vehicle v = fresh_vehicle();
  takeoff_to(v, 10.0);
  REQUIRE(v.handle_mission_item(wp_local(1, 20, -15, 12)).result ==
          uint8_t(CmdResult::Accepted));
  run(v, 30.0);
  const VehicleState s = v.state();
  const double lat_err =
      std::abs(gps_raw_to_degrees(s.lat_e7) - wp_local(1, 20, -15, 12).x);
  CHECK(lat_err * kMetersPerDegLat < 1.0);
  CHECK(v.relative_alt_m() == doctest::Approx(12.0).epsilon(0.05));
}

TEST_CASE("vehicle: in-flight mission reset forces LOITER and records the "
          "event") {
  Vehicle v = fresh_vehicle();
  upload_square_mission(v);
  takeoff_to(v, 10.0);
  REQUIRE(v.set_mode(FlightMode::Auto));
  run(v, 3.0);
  REQUIRE(v.mode() == FlightMode::Auto);

  CHECK(v.handle_mission_item(
             wp(0, kRiyadh.lat_deg, kRiyadh.lon_deg, 612.0,
                MavFrame::Global))
            .result == uint8_t(CmdResult::Accepted));
  CHECK(v.mode() == FlightMode::Loiter);
  bool reset_event = false;
  for (const VehicleEvent& ev : v.events())
    if (ev.kind == VehicleEvent::MissionResetInFlight) reset_event = true;
  CHECK(reset_event);
  CHECK(v.mission().size() == 1);  // only the new home item remains
}

TEST_CASE("vehicle: ground mission reset replaces home; non-contiguous "
          "appends are denied") {
  Vehicle v = fresh_vehicle();
  upload_square_mission(v);
  CHECK(v.mission().size() == 4);

  // a new seq 0 wipes the previous upload
  CHECK(v.handle_mission_item(wp(0, 24.7, 46.8, 600.0, MavFrame::Global))
            .result == uint8_t(CmdResult::Accepted));
  CHECK(v.mission().size() == 1);
  CHECK(v.state().home_lat_e7 == degrees_to_gps_raw(24.7));

  MissionItem gap = wp_local(2, 10, 10, 10);
  CHECK(v.handle_mission_item(gap).result == uint8_t(CmdResult::Denied));
  CHECK(v.mission().size() == 1);

  // acks carry the MISSION_ITEM message id as their command
  CHECK(v.handle_mission_item(wp_local(1, 10, 10, 10)).command ==
        uint16_t(kMsgMissionItem));
}

TEST_CASE("vehicle: battery failsafe triggers strictly below 20 percent and "
          "latches") {
  Vehicle v = fresh_vehicle();
  REQUIRE(v.set_mode(FlightMode::Guided));
  REQUIRE(v.handle_command(cmd_arm(1)).ack.result ==
          uint8_t(CmdResult::Accepted));

  v.set_battery(20.0);
  v.failsafe_check();
  CHECK(v.mode() == FlightMode::Guided);  // 20.0 is not below 20

  v.set_battery(19.9);
  v.failsafe_check();
  CHECK(v.mode() == FlightMode::Rtl);
  bool fired = false;
  for (const VehicleEvent& ev : v.events())
    if (ev.kind == VehicleEvent::FailsafeTriggered) fired = true;
  CHECK(fired);

  // latched: refilling the battery does not release the mode lock
  v.set_battery(100.0);
  CHECK_FALSE(v.set_mode(FlightMode::Guided));
  CHECK(v.set_mode(FlightMode::Rtl));  // the failsafe action stays allowed
}

TEST_CASE("vehicle: LAND failsafe action is honored") {
  SimParams p;
  p.failsafe_action = FlightMode::Land;
  Vehicle v(p, kRiyadh);
  REQUIRE(v.set_mode(FlightMode::Guided));
  REQUIRE(v.handle_command(cmd_arm(1)).ack.result ==
          uint8_t(CmdResult::Accepted));
  v.set_battery(10.0);
  v.failsafe_check();
  CHECK(v.mode() == FlightMode::Land);
}

TEST_CASE("vehicle: heartbeat count over 60 simulated seconds is 60 +/- 1") {
  Vehicle v = fresh_vehicle();
  int heartbeats = 0;
  int positions = 0;
  double now = 0;
  for (int i = 0; i < int(60.0 / kDt); ++i) {
    now += kDt;
    v.tick(kDt);
    for (const auto& [msgid, payload] : v.emit_telemetry(now, 0, 0)) {
      if (msgid == kMsgHeartbeat) ++heartbeats;
      if (msgid == kMsgGlobalPosition) ++positions;
    }
  }
  CHECK(heartbeats >= 59);
  CHECK(heartbeats <= 61);
  // GLOBAL_POSITION runs at 4 Hz
  CHECK(positions >= 4 * 59);
  CHECK(positions <= 4 * 61);
}

TEST_CASE("vehicle: heartbeat custom_mode matches the numeric mode map") {
  Vehicle v = fresh_vehicle();
  upload_square_mission(v);  // makes AUTO and RTL reachable

  const std::pair<FlightMode, uint32_t> modes[] = {
      {FlightMode::Stabilize, 0}, {FlightMode::AltHold, 2},
      {FlightMode::Guided, 4},    {FlightMode::Loiter, 5},
      {FlightMode::Land, 9},      {FlightMode::Auto, 10},
      {FlightMode::Rtl, 11},
  };
  double now = 0;
  for (const auto& [mode, expected] : modes) {
    REQUIRE(v.set_mode(mode));
    now += 10.0;
    const auto telemetry = v.emit_telemetry(now, 0, 0);
    bool saw = false;
    for (const auto& [msgid, payload] : telemetry) {
      if (msgid != kMsgHeartbeat) continue;
      const Heartbeat hb = Heartbeat::decode(payload);
      CHECK(hb.custom_mode == expected);
      CHECK(flight_mode_name(hb.custom_mode) != "UNKNOWN");
      saw = true;
    }
    CHECK(saw);
  }
}

TEST_CASE("vehicle: base_mode reports AUTO plus ARMED as 132") {
  Vehicle v = fresh_vehicle();
  upload_square_mission(v);
  REQUIRE(v.set_mode(FlightMode::Guided));
  REQUIRE(v.handle_command(cmd_arm(1)).ack.result ==
          uint8_t(CmdResult::Accepted));
  REQUIRE(v.set_mode(FlightMode::Auto));
  const auto telemetry = v.emit_telemetry(10.0, 0, 0);
  bool saw = false;
  for (const auto& [msgid, payload] : telemetry) {
    if (msgid != kMsgHeartbeat) continue;
    const Heartbeat hb = Heartbeat::decode(payload);
    CHECK(hb.base_mode == (kBaseAuto | kBaseArmed));
    CHECK(decode_base_mode(hb.base_mode) ==
          std::vector<std::string>{"Auto", "Armed"});
    saw = true;
  }
  CHECK(saw);
}

TEST_CASE("vehicle: system_status tracks armed, failsafe, and crash states") {
  Vehicle v = fresh_vehicle();
  CHECK(v.state().system_status == uint8_t(MavState::Standby));
  REQUIRE(v.set_mode(FlightMode::Guided));
  REQUIRE(v.handle_command(cmd_arm(1)).ack.result ==
          uint8_t(CmdResult::Accepted));
  CHECK(v.state().system_status == uint8_t(MavState::Active));
  v.set_battery(5.0);
  v.failsafe_check();
  CHECK(v.state().system_status == uint8_t(MavState::Critical));
}

TEST_CASE("vehicle: zero tracking error commands zero motion") {
  Vehicle v = fresh_vehicle();
  REQUIRE(v.handle_command(cmd_arm(1)).ack.result ==
          uint8_t(CmdResult::Accepted));
  REQUIRE(v.set_mode(FlightMode::Loiter));  // anchor = current spot, v = 0
  const VehicleState before = v.state();
  run(v, 2.0);
  const VehicleState after = v.state();
  CHECK(after.lat_e7 == before.lat_e7);
  CHECK(after.lon_e7 == before.lon_e7);
  CHECK(after.relative_alt_mm == before.relative_alt_mm);
  CHECK(after.vx_cms == 0);
  CHECK(after.vy_cms == 0);
  CHECK(after.vz_cms == 0);
}

TEST_CASE("vehicle: GET_HOME answers with the home item, SET_HOME moves it") {
  Vehicle v = fresh_vehicle();
  CommandLong get;
  get.command = uint16_t(MavCmd::GetHome);
  CHECK(v.handle_command(get).ack.result == uint8_t(CmdResult::Denied));

  CommandLong set;
  set.command = uint16_t(MavCmd::SetHome);
  set.param5 = 24.70;
  set.param6 = 46.75;
  set.param7 = 615.0;
  CHECK(v.handle_command(set).ack.result == uint8_t(CmdResult::Accepted));

  const CommandResponse resp = v.handle_command(get);
  CHECK(resp.ack.result == uint8_t(CmdResult::Accepted));
  REQUIRE(resp.home_reply.has_value());
  CHECK(resp.home_reply->seq == 0);
  CHECK(resp.home_reply->x == doctest::Approx(24.70));
  CHECK(resp.home_reply->y == doctest::Approx(46.75));
  CHECK(resp.home_reply->z == doctest::Approx(615.0));
}

TEST_CASE("vehicle: unknown command ids are Unsupported") {
  Vehicle v = fresh_vehicle();
  CommandLong odd;
  odd.command = 31337;
  CHECK(v.handle_command(odd).ack.result ==
        uint8_t(CmdResult::Unsupported));
}

TEST_CASE("vehicle: wind displaces an unanchored climb but LOITER holds "
          "position against it") {
  Vehicle v = fresh_vehicle();
  takeoff_to(v, 10.0);
  v.set_wind(1.5, 0.0);
  run(v, 10.0);
  // GUIDED holds the takeoff target under the control law, so the wind is
  // fought to a small steady-state offset rather than a runaway drift.
  const double north_err =
      (gps_raw_to_degrees(v.state().lat_e7) - kRiyadh.lat_deg) *
      kMetersPerDegLat;
  CHECK(std::abs(north_err) < 3.0);
}
