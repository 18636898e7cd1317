#include "mavkit/messages.hpp"

#include <bit>
#include <cmath>

#include "mavkit/errors.hpp"

namespace mavkit {

namespace {

struct Writer {
  Bytes out;
  void u8(uint8_t v) { out.push_back(v); }
  void i8(int8_t v) { out.push_back(uint8_t(v)); }
  void u16(uint16_t v) { le(v, 2); }
  void i16(int16_t v) { le(uint16_t(v), 2); }
  void u32(uint32_t v) { le(v, 4); }
  void i32(int32_t v) { le(uint32_t(v), 4); }
  void u64(uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<uint64_t>(v), 8); }
  void le(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(uint8_t(v >> (8 * i)));
  }
};

struct Reader {
  std::span<const uint8_t> in;
  std::size_t pos = 0;
  uint8_t u8() { return uint8_t(le(1)); }
  int8_t i8() { return int8_t(le(1)); }
  uint16_t u16() { return uint16_t(le(2)); }
  int16_t i16() { return int16_t(le(2)); }
  uint32_t u32() { return uint32_t(le(4)); }
  int32_t i32() { return int32_t(le(4)); }
  uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  uint64_t le(int n) {
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= uint64_t(in[pos + i]) << (8 * i);
    pos += std::size_t(n);
    return v;
  }
};

void want(std::span<const uint8_t> payload, std::size_t n, const char* name) {
  if (payload.size() != n)
    throw LengthMismatch(std::string(name) + ": payload is " +
                         std::to_string(payload.size()) +
                         " bytes, expected " + std::to_string(n));
}

}  // namespace

double gps_raw_to_degrees(int32_t raw) { return double(raw) / 1e7; }

int32_t degrees_to_gps_raw(double deg) {
  return int32_t(std::llround(deg * 1e7));
}

double absolute_alt_from_relative(double ground_abs_m, double relative_m) {
  return ground_abs_m + relative_m;
}

std::vector<std::string> decode_base_mode(uint8_t base_mode) {
  static constexpr std::pair<uint8_t, const char*> kBits[] = {
      {kBaseReserved, "Reserved"}, {kBaseTest, "Test"},
      {kBaseAuto, "Auto"},         {kBaseGuided, "Guided"},
      {kBaseStabilize, "Stabilize"}, {kBaseHil, "Hil"},
      {kBaseManual, "Manual"},     {kBaseArmed, "Armed"},
  };
  std::vector<std::string> out;
  for (const auto& [bit, name] : kBits)
    if (base_mode & bit) out.emplace_back(name);
  return out;
}

std::optional<FlightMode> flight_mode_from_custom(uint32_t custom_mode) {
  switch (custom_mode) {
    case 0: return FlightMode::Stabilize;
    case 2: return FlightMode::AltHold;
    case 4: return FlightMode::Guided;
    case 5: return FlightMode::Loiter;
    case 9: return FlightMode::Land;
    case 10: return FlightMode::Auto;
    case 11: return FlightMode::Rtl;
    default: return std::nullopt;
  }
}

std::string flight_mode_name(uint32_t custom_mode) {
  const auto m = flight_mode_from_custom(custom_mode);
  if (!m) return "UNKNOWN";
  switch (*m) {
    case FlightMode::Stabilize: return "STABILIZE";
    case FlightMode::AltHold: return "ALT_HOLD";
    case FlightMode::Guided: return "GUIDED";
    case FlightMode::Loiter: return "LOITER";
    case FlightMode::Land: return "LAND";
    case FlightMode::Auto: return "AUTO";
    case FlightMode::Rtl: return "RTL";
  }
  return "UNKNOWN";
}

Bytes Heartbeat::encode() const {
  Writer w;
  w.u8(type);
  w.u8(autopilot);
  w.u8(base_mode);
  w.u32(custom_mode);
  w.u8(system_status);
  w.u8(mavlink_version);
  return std::move(w.out);
}

Heartbeat Heartbeat::decode(std::span<const uint8_t> payload) {
  want(payload, 9, "HEARTBEAT");
  Reader r{payload};
  Heartbeat m;
  m.type = r.u8();
  m.autopilot = r.u8();
  m.base_mode = r.u8();
  m.custom_mode = r.u32();
  m.system_status = r.u8();
  m.mavlink_version = r.u8();
  return m;
}

Bytes SysStatus::encode() const {
  Writer w;
  w.u32(sensors_present);
  w.u32(sensors_enabled);
  w.u32(sensors_health);
  w.u16(voltage_battery);
  w.i8(battery_remaining);
  w.u16(drop_rate_comm);
  w.u16(errors_comm);
  return std::move(w.out);
}

SysStatus SysStatus::decode(std::span<const uint8_t> payload) {
  want(payload, 19, "SYS_STATUS");
  Reader r{payload};
  SysStatus m;
  m.sensors_present = r.u32();
  m.sensors_enabled = r.u32();
  m.sensors_health = r.u32();
  m.voltage_battery = r.u16();
  m.battery_remaining = r.i8();
  m.drop_rate_comm = r.u16();
  m.errors_comm = r.u16();
  return m;
}

Bytes SystemTime::encode() const {
  Writer w;
  w.u64(time_unix_usec);
  w.u32(time_boot_ms);
  return std::move(w.out);
}

SystemTime SystemTime::decode(std::span<const uint8_t> payload) {
  want(payload, 12, "SYSTEM_TIME");
  Reader r{payload};
  SystemTime m;
  m.time_unix_usec = r.u64();
  m.time_boot_ms = r.u32();
  return m;
}

Bytes GlobalPosition::encode() const {
  Writer w;
  w.i32(lat);
  w.i32(lon);
  w.i32(alt);
  w.i32(relative_alt);
  w.i16(vx);
  w.i16(vy);
  w.i16(vz);
  w.u16(hdg);
  return std::move(w.out);
}

GlobalPosition GlobalPosition::decode(std::span<const uint8_t> payload) {
  want(payload, 24, "GLOBAL_POSITION");
  Reader r{payload};
  GlobalPosition m;
  m.lat = r.i32();
  m.lon = r.i32();
  m.alt = r.i32();
  m.relative_alt = r.i32();
  m.vx = r.i16();
  m.vy = r.i16();
  m.vz = r.i16();
  m.hdg = r.u16();
  return m;
}

Bytes MissionItem::encode() const {
  Writer w;
  w.u8(target_system);
  w.u8(target_component);
  w.u16(seq);
  w.u8(frame);
  w.f64(x);
  w.f64(y);
  w.f64(z);
  return std::move(w.out);
}

MissionItem MissionItem::decode(std::span<const uint8_t> payload) {
  want(payload, 29, "MISSION_ITEM");
  Reader r{payload};
  MissionItem m;
  m.target_system = r.u8();
  m.target_component = r.u8();
  m.seq = r.u16();
  m.frame = r.u8();
  m.x = r.f64();
  m.y = r.f64();
  m.z = r.f64();
  return m;
}

Bytes CommandLong::encode() const {
  Writer w;
  w.u8(target_system);
  w.u8(target_component);
  w.u16(command);
  w.u8(confirmation);
  for (double p : {param1, param2, param3, param4, param5, param6, param7})
    w.f64(p);
  return std::move(w.out);
}

CommandLong CommandLong::decode(std::span<const uint8_t> payload) {
  want(payload, 61, "COMMAND_LONG");
  Reader r{payload};
  CommandLong m;
  m.target_system = r.u8();
  m.target_component = r.u8();
  m.command = r.u16();
  m.confirmation = r.u8();
  m.param1 = r.f64();
  m.param2 = r.f64();
  m.param3 = r.f64();
  m.param4 = r.f64();
  m.param5 = r.f64();
  m.param6 = r.f64();
  m.param7 = r.f64();
  return m;
}

Bytes CommandAck::encode() const {
  Writer w;
  w.u16(command);
  w.u8(result);
  return std::move(w.out);
}

CommandAck CommandAck::decode(std::span<const uint8_t> payload) {
  want(payload, 3, "COMMAND_ACK");
  Reader r{payload};
  CommandAck m;
  m.command = r.u16();
  m.result = r.u8();
  return m;
}

FrameV2 make_frame(uint32_t msgid, Bytes payload, uint8_t seq, uint8_t sysid,
                   uint8_t compid) {
  FrameV2 f;
  f.seq = seq;
  f.sysid = sysid;
  f.compid = compid;
  f.msgid = msgid;
  f.payload = std::move(payload);
  return f;
}

FrameV1 make_frame_v1(uint8_t msgid, Bytes payload, uint8_t seq, uint8_t sysid,
                      uint8_t compid) {
  FrameV1 f;
  f.seq = seq;
  f.sysid = sysid;
  f.compid = compid;
  f.msgid = msgid;
  f.payload = std::move(payload);
  return f;
}

}  // namespace mavkit
