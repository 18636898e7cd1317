#include "mavkit/vehicle.hpp"

#include <algorithm>
#include <cmath>

namespace mavkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp_mag(double v, double limit) {
  return std::clamp(v, -limit, limit);
}

int16_t to_cms(double ms) {
  return int16_t(std::clamp(std::lround(ms * 100.0), long(-32768), long(32767)));
}

}  // namespace

Vehicle::Vehicle(SimParams params, GeoOrigin origin)
    : params_(params), origin_(origin) {}

void Vehicle::geo_to_local(double lat_deg, double lon_deg, double& n,
                           double& e) const {
  n = (lat_deg - origin_.lat_deg) * kMetersPerDegLat;
  e = (lon_deg - origin_.lon_deg) * kMetersPerDegLat *
      std::cos(origin_.lat_deg * kPi / 180.0);
}

void Vehicle::local_to_geo(double n, double e, double& lat_deg,
                           double& lon_deg) const {
  lat_deg = origin_.lat_deg + n / kMetersPerDegLat;
  lon_deg = origin_.lon_deg +
            e / (kMetersPerDegLat * std::cos(origin_.lat_deg * kPi / 180.0));
}

double Vehicle::item_target_up(const MissionItem& item) const {
  // GLOBAL z is absolute altitude; GLOBAL_RELATIVE_ALT is height above home.
  // A below-ground GLOBAL target is accepted as-is; flying into the ground
  // raises GroundCollision instead of clamping.
  if (item.frame == uint8_t(MavFrame::Global)) return item.z - origin_.alt_m;
  return home_up_ + item.z;
}

double Vehicle::horizontal_speed_ms() const {
  return std::hypot(vn_ms_, ve_ms_);
}

double Vehicle::distance_to_home_m() const {
  return std::hypot(n_m_ - home_n_, e_m_ - home_e_);
}

bool Vehicle::arming_allowed() const {
  switch (mode_) {
    case FlightMode::Loiter:
    case FlightMode::Guided:
    case FlightMode::Auto:
      return gps_fix_3d_ && hdop_ < 2.0;
    default:
      return true;  // STABILIZE and ALT_HOLD are manual-capable
  }
}

bool Vehicle::set_mode(FlightMode mode) {
  if (failsafe_latched_ && mode != params_.failsafe_action) return false;
  switch (mode) {
    case FlightMode::Guided:
      if (!gps_fix_3d_) return false;
      guided_target_ = {n_m_, e_m_, up_m_, true};
      break;
    case FlightMode::Auto:
      if (!gps_fix_3d_) return false;
      if (mission_.size() < 2) return false;  // home alone is no mission
      if (mission_index_ < 1) mission_index_ = 1;
      break;
    case FlightMode::Rtl:
      if (!home_set_) return false;
      rtl_descending_ = false;
      rtl_cruise_up_ = up_m_;
      break;
    case FlightMode::Loiter:
    case FlightMode::AltHold:
    case FlightMode::Stabilize:
    case FlightMode::Land:
      hold_target_ = {n_m_, e_m_, up_m_, true};
      break;
  }
  mode_ = mode;
  return true;
}

MissionItem Vehicle::home_item() const {
  MissionItem item;
  item.seq = 0;
  item.frame = uint8_t(MavFrame::Global);
  item.x = home_lat_deg_;
  item.y = home_lon_deg_;
  item.z = home_alt_m_;
  return item;
}

CommandResponse Vehicle::handle_command(const CommandLong& cmd) {
  CommandResponse resp;
  resp.ack.command = cmd.command;
  auto result = CmdResult::Accepted;

  switch (cmd.command) {
    case uint16_t(MavCmd::ArmDisarm): {
      if (cmd.param1 != 0.0) {
        if (armed_) break;  // arming twice is a no-op
        if (!arming_allowed()) {
          result = CmdResult::Denied;
          break;
        }
        armed_ = true;
        crashed_ = false;
        if (!home_set_) {
          home_n_ = n_m_;
          home_e_ = e_m_;
          home_up_ = up_m_;
          local_to_geo(n_m_, e_m_, home_lat_deg_, home_lon_deg_);
          home_alt_m_ = origin_.alt_m + up_m_;
          home_set_ = true;
        }
      } else {
        if (armed_ && up_m_ - home_up_ >= 0.5) {
          result = CmdResult::Denied;  // no disarming in flight
          break;
        }
        armed_ = false;
        airborne_ = false;
        failsafe_latched_ = false;
        vn_ms_ = ve_ms_ = vu_ms_ = 0;
        up_m_ = home_up_;
      }
      break;
    }
    case uint16_t(MavCmd::Takeoff): {
      if (!armed_ || mode_ != FlightMode::Guided) {
        result = CmdResult::Denied;
        break;
      }
      guided_target_ = {n_m_, e_m_, home_up_ + cmd.param7, true};
      break;
    }
    case uint16_t(MavCmd::Land): {
      if (!set_mode(FlightMode::Land)) result = CmdResult::Denied;
      break;
    }
    case uint16_t(MavCmd::SetHome): {
      geo_to_local(cmd.param5, cmd.param6, home_n_, home_e_);
      home_lat_deg_ = cmd.param5;
      home_lon_deg_ = cmd.param6;
      home_alt_m_ = cmd.param7;
      home_up_ = cmd.param7 - origin_.alt_m;
      home_set_ = true;
      break;
    }
    case uint16_t(MavCmd::GetHome): {
      if (!home_set_) {
        result = CmdResult::Denied;
        break;
      }
      resp.home_reply = home_item();
      break;
    }
    default:
      result = CmdResult::Unsupported;
  }
  resp.ack.result = uint8_t(result);
  return resp;
}

CommandAck Vehicle::handle_mission_item(const MissionItem& item) {
  CommandAck ack;
  ack.command = uint16_t(kMsgMissionItem);
  ack.result = uint8_t(CmdResult::Accepted);

  // Airborne GUIDED treats incoming waypoints as single goto targets; the
  // home item (seq 0) always means "a new upload begins".
  if (item.seq >= 1 && mode_ == FlightMode::Guided && armed_ && airborne_) {
    double n = 0, e = 0;
    geo_to_local(item.x, item.y, n, e);
    guided_target_ = {n, e, item_target_up(item), true};
    return ack;
  }

  if (item.seq == 0) {
    const bool in_flight_reset =
        armed_ && airborne_ && mode_ == FlightMode::Auto;
    mission_.clear();
    mission_.push_back(item);
    mission_index_ = 0;
    mission_complete_ = false;
    visited_.clear();
    if (!armed_) {
      // The home item defines home; in flight the established home stays.
      home_lat_deg_ = item.x;
      home_lon_deg_ = item.y;
      home_alt_m_ = item.z;
      geo_to_local(item.x, item.y, home_n_, home_e_);
      home_up_ = item.z - origin_.alt_m;
      home_set_ = true;
    }
    if (in_flight_reset) {
      // The stored mission just went away underneath AUTO; hold position.
      set_mode(FlightMode::Loiter);
      events_.push_back({VehicleEvent::MissionResetInFlight, now_s_,
                         "mission upload restarted in flight"});
    }
    return ack;
  }

  if (item.seq != mission_.size()) {
    ack.result = uint8_t(CmdResult::Denied);  // non-contiguous upload
    return ack;
  }
  mission_.push_back(item);
  return ack;
}

Vehicle::Target Vehicle::current_target() const {
  switch (mode_) {
    case FlightMode::Guided:
      return guided_target_;
    case FlightMode::Auto: {
      if (mission_complete_ || mission_index_ >= mission_.size())
        return hold_target_;
      const MissionItem& wp = mission_[mission_index_];
      Target t;
      geo_to_local(wp.x, wp.y, t.n, t.e);
      t.up = item_target_up(wp);
      t.active = true;
      return t;
    }
    case FlightMode::Rtl: {
      Target t{home_n_, home_e_, rtl_descending_ ? home_up_ - 0.5 : rtl_cruise_up_,
               true};
      return t;
    }
    case FlightMode::Land: {
      // Aim half a meter below ground so the descent actually reaches it.
      Target t = hold_target_;
      t.up = home_up_ - 0.5;
      t.active = true;
      return t;
    }
    case FlightMode::Loiter:
    case FlightMode::AltHold:
    case FlightMode::Stabilize:
      return hold_target_;
  }
  return {};
}

void Vehicle::tick(double dt) {
  now_s_ += dt;
  if (crashed_ || !armed_) return;

  const double vmax = params_.loiter_speed_cms / 100.0;
  const double amax = params_.max_accel_cms2 / 100.0;
  const double k = params_.alt_p_gain;

  const Target target = current_target();
  double want_vn = 0, want_ve = 0, want_vu = 0;
  if (target.active) {
    // Commanded velocity is proportional to the remaining error, speed
    // capped; the acceleration clamp below keeps the approach smooth. At
    // zero error this commands zero velocity and hence zero acceleration.
    const double dn = target.n - n_m_;
    const double de = target.e - e_m_;
    const double dist = std::hypot(dn, de);
    const double speed = std::min(vmax, k * dist);
    if (dist > 1e-9) {
      want_vn = speed * dn / dist;
      want_ve = speed * de / dist;
    }
    want_vu = clamp_mag(k * (target.up - up_m_), vmax);
  }

  vn_ms_ += clamp_mag(want_vn - vn_ms_, amax * dt);
  ve_ms_ += clamp_mag(want_ve - ve_ms_, amax * dt);
  vu_ms_ += clamp_mag(want_vu - vu_ms_, amax * dt);

  n_m_ += (vn_ms_ + wind_n_ms_) * dt;
  e_m_ += (ve_ms_ + wind_e_ms_) * dt;
  up_m_ += vu_ms_ * dt;

  if (horizontal_speed_ms() > 0.1)
    heading_deg_ =
        std::fmod(std::atan2(ve_ms_, vn_ms_) * 180.0 / kPi + 360.0, 360.0);

  if (!airborne_ && up_m_ - home_up_ > 0.3) airborne_ = true;

  arrive_checks();
  ground_contact();

  battery_pct_ = std::max(0.0, battery_pct_ - params_.battery_drain_pct_per_s * dt);
  failsafe_check();
}

void Vehicle::arrive_checks() {
  if (mode_ == FlightMode::Auto && !mission_complete_ &&
      mission_index_ < mission_.size()) {
    const Target t = current_target();
    const double dist3 =
        std::sqrt((t.n - n_m_) * (t.n - n_m_) + (t.e - e_m_) * (t.e - e_m_) +
                  (t.up - up_m_) * (t.up - up_m_));
    if (dist3 <= params_.waypoint_radius_m) {
      visited_.push_back(mission_[mission_index_].seq);
      ++mission_index_;
      if (mission_index_ >= mission_.size()) {
        mission_complete_ = true;
        hold_target_ = {n_m_, e_m_, up_m_, true};
      }
    }
  }
  if (mode_ == FlightMode::Rtl && !rtl_descending_ &&
      distance_to_home_m() <= 1.0) {
    rtl_descending_ = true;
  }
}

void Vehicle::ground_contact() {
  if (!airborne_ || up_m_ > 0.0) return;
  const bool landing = mode_ == FlightMode::Land ||
                       (mode_ == FlightMode::Rtl && rtl_descending_ &&
                        distance_to_home_m() <= 2.0);
  if (landing) {
    land_here();
  } else {
    up_m_ = 0;
    vn_ms_ = ve_ms_ = vu_ms_ = 0;
    armed_ = false;
    airborne_ = false;
    crashed_ = true;
    events_.push_back(
        {VehicleEvent::GroundCollision, now_s_, "terrain impact"});
  }
}

void Vehicle::land_here() {
  up_m_ = 0;
  vn_ms_ = ve_ms_ = vu_ms_ = 0;
  armed_ = false;
  airborne_ = false;
  failsafe_latched_ = false;
  events_.push_back({VehicleEvent::Touchdown, now_s_, "landed"});
}

void Vehicle::failsafe_check() {
  if (!armed_ || failsafe_latched_) return;
  if (battery_pct_ < double(params_.battery_failsafe_pct)) {
    failsafe_latched_ = true;
    const FlightMode action = params_.failsafe_action;
    mode_ = action;  // forced, bypassing set_mode preconditions
    if (action == FlightMode::Rtl) {
      rtl_descending_ = false;
      rtl_cruise_up_ = up_m_;
    } else {
      hold_target_ = {n_m_, e_m_, up_m_, true};
    }
    events_.push_back({VehicleEvent::FailsafeTriggered, now_s_,
                       "battery below failsafe threshold"});
  }
}

std::vector<std::pair<uint32_t, Bytes>> Vehicle::emit_telemetry(
    double now_s, uint16_t drop_rate_permyriad, uint16_t errors_comm) {
  std::vector<std::pair<uint32_t, Bytes>> out;
  const VehicleState s = state();

  if (now_s >= hb_next_s_) {
    hb_next_s_ = (hb_next_s_ == 0 ? now_s : hb_next_s_) +
                 params_.heartbeat_period_s;
    Heartbeat hb;
    hb.custom_mode = uint32_t(mode_);
    // Mode family bits; AUTO maps to exactly the AUTO bit.
    uint8_t base = 0;
    switch (mode_) {
      case FlightMode::Stabilize: base = kBaseManual | kBaseStabilize; break;
      case FlightMode::AltHold: base = kBaseStabilize; break;
      case FlightMode::Guided: base = kBaseGuided; break;
      case FlightMode::Loiter: base = kBaseGuided | kBaseStabilize; break;
      case FlightMode::Land:
      case FlightMode::Rtl: base = kBaseAuto | kBaseGuided; break;
      case FlightMode::Auto: base = kBaseAuto; break;
    }
    if (armed_) base |= kBaseArmed;
    hb.base_mode = base;
    hb.system_status = s.system_status;
    out.emplace_back(kMsgHeartbeat, hb.encode());
  }

  if (now_s >= pos_next_s_) {
    pos_next_s_ = (pos_next_s_ == 0 ? now_s : pos_next_s_) + 0.25;
    GlobalPosition p;
    p.lat = s.lat_e7;
    p.lon = s.lon_e7;
    p.alt = s.abs_alt_mm;
    p.relative_alt = s.relative_alt_mm;
    p.vx = s.vx_cms;
    p.vy = s.vy_cms;
    p.vz = s.vz_cms;
    p.hdg = s.heading_cdeg;
    out.emplace_back(kMsgGlobalPosition, p.encode());
  }

  if (now_s >= sys_next_s_) {
    sys_next_s_ = (sys_next_s_ == 0 ? now_s : sys_next_s_) + 1.0;
    SysStatus st;
    st.sensors_present = 0x0F;
    st.sensors_enabled = 0x0F;
    st.sensors_health = gps_fix_3d_ ? 0x0F : 0x07;  // bit 0x08 is the GPS
    st.voltage_battery = uint16_t(12000 + 40 * std::lround(battery_pct_));
    st.battery_remaining = int8_t(std::lround(battery_pct_));
    st.drop_rate_comm = drop_rate_permyriad;
    st.errors_comm = errors_comm;
    out.emplace_back(kMsgSysStatus, st.encode());
  }
  return out;
}

void Vehicle::set_gps(bool fix_3d, double hdop) {
  gps_fix_3d_ = fix_3d;
  hdop_ = hdop;
}

void Vehicle::set_battery(double pct) {
  battery_pct_ = std::clamp(pct, 0.0, 100.0);
}

void Vehicle::set_wind(double north_ms, double east_ms) {
  wind_n_ms_ = north_ms;
  wind_e_ms_ = east_ms;
}

VehicleState Vehicle::state() const {
  VehicleState s;
  double lat = 0, lon = 0;
  local_to_geo(n_m_, e_m_, lat, lon);
  s.lat_e7 = degrees_to_gps_raw(lat);
  s.lon_e7 = degrees_to_gps_raw(lon);
  s.abs_alt_mm = int32_t(std::lround((origin_.alt_m + up_m_) * 1000.0));
  s.home_set = home_set_;
  if (home_set_) {
    s.home_lat_e7 = degrees_to_gps_raw(home_lat_deg_);
    s.home_lon_e7 = degrees_to_gps_raw(home_lon_deg_);
    s.home_abs_alt_mm = int32_t(std::lround(home_alt_m_ * 1000.0));
  }
  s.relative_alt_mm = int32_t(std::lround((up_m_ - home_up_) * 1000.0));
  s.vx_cms = to_cms(vn_ms_);
  s.vy_cms = to_cms(ve_ms_);
  s.vz_cms = to_cms(vu_ms_);
  s.heading_cdeg = uint16_t(std::lround(heading_deg_ * 100.0)) % 36000;
  s.mode = mode_;
  s.armed = armed_;
  s.battery_pct = battery_pct_;
  s.gps_fix_3d = gps_fix_3d_;
  s.hdop = hdop_;
  s.mission = mission_;
  s.mission_index = mission_index_;
  if (crashed_)
    s.system_status = uint8_t(MavState::Emergency);
  else if (failsafe_latched_)
    s.system_status = uint8_t(MavState::Critical);
  else if (armed_)
    s.system_status = uint8_t(MavState::Active);
  else
    s.system_status = uint8_t(MavState::Standby);
  return s;
}

VehicleActor::VehicleActor(Vehicle vehicle, Link& link, const Catalog& catalog,
                           EndpointConfig cfg)
    : vehicle_(std::move(vehicle)),
      link_(link),
      catalog_(catalog),
      cfg_(cfg),
      parser_(catalog.seed_lookup()) {
  if (cfg_.signing)
    signing_.emplace(cfg_.key, cfg_.clock, UnsignedPolicy::Reject);
}

void VehicleActor::send_payload(uint32_t msgid, const Bytes& payload) {
  const MessageDef* def = catalog_.find(msgid);
  if (!def) return;
  FrameV2 f = make_frame(msgid, payload, seq_, cfg_.sysid, cfg_.compid);
  seq_ = seq_next(seq_);
  if (signing_) {
    f = signing_->sign_frame(std::move(f), cfg_.link_id, def->seed());
    link_.send(to_wire(f));
  } else {
    link_.send(serialize(std::move(f), def->seed()));
  }
}

void VehicleActor::dispatch(const Frame& frame, double now_s) {
  const uint32_t msgid = frame_msgid(frame);
  const Bytes& payload = frame_payload(frame);

  if (msgid == kMsgCommandLong) {
    const CommandLong cmd = CommandLong::decode(payload);
    if (cmd.target_system != 0 && cmd.target_system != cfg_.sysid) return;
    const CommandResponse resp = vehicle_.handle_command(cmd);
    send_payload(kMsgCommandAck, resp.ack.encode());
    if (resp.home_reply) {
      MissionItem reply = *resp.home_reply;
      reply.target_system = frame_sysid(frame);
      send_payload(kMsgMissionItem, reply.encode());
    }
    (void)now_s;
  } else if (msgid == kMsgMissionItem) {
    const MissionItem item = MissionItem::decode(payload);
    if (item.target_system != 0 && item.target_system != cfg_.sysid) return;
    const CommandAck ack = vehicle_.handle_mission_item(item);
    send_payload(kMsgCommandAck, ack.encode());
  }
  // Telemetry-class messages are not meaningful input for an autopilot.
}

void VehicleActor::step(double now_s, double dt) {
  for (const Bytes& chunk : link_.recv()) {
    for (ParsedFrame& pf : parser_.feed(chunk)) {
      if (pf.verdict != CrcVerdict::Ok) continue;
      stats_.update(frame_seq(pf.frame));
      if (signing_) {
        const auto* v2 = std::get_if<FrameV2>(&pf.frame);
        if (!v2) continue;  // v1 cannot carry a signature
        const VerifyResult r = signing_->verify_frame(*v2);
        if (r != VerifyResult::Accept) {
          if (on_signing_reject && v2->is_signed()) on_signing_reject(r, now_s);
          continue;
        }
      }
      accepted_.push_back(std::visit([](const auto& f) { return to_wire(f); },
                                     pf.frame));
      try {
        dispatch(pf.frame, now_s);
      } catch (const LengthMismatch&) {
        // Valid CRC but a payload of the wrong size for its msgid: drop.
      }
    }
  }

  vehicle_.tick(dt);

  const uint16_t drop_permyriad =
      uint16_t(std::min(10000.0, stats_.drop_ratio() * 10000.0));
  const uint16_t errors =
      uint16_t(std::min<uint64_t>(0xFFFF, parser_.frames_bad_crc()));
  for (const auto& [msgid, payload] :
       vehicle_.emit_telemetry(now_s, drop_permyriad, errors))
    send_payload(msgid, payload);
}

}  // namespace mavkit
