#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mavkit/frame.hpp"

namespace mavkit {

// Numeric ids for the built-in catalog messages.
inline constexpr uint32_t kMsgHeartbeat = 0;
inline constexpr uint32_t kMsgSysStatus = 1;
inline constexpr uint32_t kMsgSystemTime = 2;
inline constexpr uint32_t kMsgGlobalPosition = 33;
inline constexpr uint32_t kMsgMissionItem = 39;
inline constexpr uint32_t kMsgCommandLong = 76;
inline constexpr uint32_t kMsgCommandAck = 77;

enum class MavType : uint8_t { FixedWing = 1, Quadrotor = 2, Helicopter = 4 };

enum class MavAutopilot : uint8_t { Generic = 0, ArduPilotMega = 3, Px4 = 12 };

// base_mode bitmask. Bit 0x01 is reserved but still reported when set.
enum BaseModeFlag : uint8_t {
  kBaseReserved = 1,
  kBaseTest = 2,
  kBaseAuto = 4,
  kBaseGuided = 8,
  kBaseStabilize = 16,
  kBaseHil = 32,
  kBaseManual = 64,
  kBaseArmed = 128,
};

enum class MavState : uint8_t {
  Uninit = 0,
  Boot = 1,
  Calibrating = 2,
  Standby = 3,
  Active = 4,
  Critical = 5,
  Emergency = 6,
  Poweroff = 7,
  Terminating = 8,
};

// custom_mode values; 0 is the manual (stabilize) mode.
enum class FlightMode : uint32_t {
  Stabilize = 0,
  AltHold = 2,
  Guided = 4,
  Loiter = 5,
  Land = 9,
  Auto = 10,
  Rtl = 11,
};

enum class MavCmd : uint16_t {
  Land = 21,
  Takeoff = 22,
  SetHome = 179,
  ArmDisarm = 400,
  GetHome = 410,
};

// MAV_FRAME values for MISSION_ITEM.frame; numeric values are ours.
enum class MavFrame : uint8_t { Global = 0, GlobalRelativeAlt = 3 };

enum class CmdResult : uint8_t {
  Accepted = 0,
  Denied = 1,
  Unsupported = 2,
  Failed = 3,
};

/// raw i32 of degrees x 10^7 to float degrees.
double gps_raw_to_degrees(int32_t raw);
int32_t degrees_to_gps_raw(double deg);

/// Ground absolute altitude plus height above it.
double absolute_alt_from_relative(double ground_abs_m, double relative_m);

/// Set bits of base_mode as names, LSB first; bit 0x01 reports as Reserved.
std::vector<std::string> decode_base_mode(uint8_t base_mode);

std::optional<FlightMode> flight_mode_from_custom(uint32_t custom_mode);
/// "RTL", "LOITER", ... or "UNKNOWN" for unmapped values.
std::string flight_mode_name(uint32_t custom_mode);

// Typed views of the built-in payloads. Layout matches the catalog
// definitions field for field; decode throws LengthMismatch on a payload of
// the wrong size.

struct Heartbeat {
  uint8_t type = uint8_t(MavType::Quadrotor);
  uint8_t autopilot = uint8_t(MavAutopilot::ArduPilotMega);
  uint8_t base_mode = 0;
  uint32_t custom_mode = 0;
  uint8_t system_status = uint8_t(MavState::Standby);
  uint8_t mavlink_version = 2;

  Bytes encode() const;
  static Heartbeat decode(std::span<const uint8_t> payload);
};

struct SysStatus {
  uint32_t sensors_present = 0;
  uint32_t sensors_enabled = 0;
  uint32_t sensors_health = 0;
  uint16_t voltage_battery = 0;  // mV
  int8_t battery_remaining = -1;  // percent, -1 = unknown
  uint16_t drop_rate_comm = 0;  // 0.01% units
  uint16_t errors_comm = 0;

  Bytes encode() const;
  static SysStatus decode(std::span<const uint8_t> payload);
};

struct SystemTime {
  uint64_t time_unix_usec = 0;
  uint32_t time_boot_ms = 0;

  Bytes encode() const;
  static SystemTime decode(std::span<const uint8_t> payload);
};

struct GlobalPosition {
  int32_t lat = 0;           // deg x 1e7
  int32_t lon = 0;           // deg x 1e7
  int32_t alt = 0;           // mm above sea level
  int32_t relative_alt = 0;  // mm above takeoff point
  int16_t vx = 0;            // cm/s
  int16_t vy = 0;
  int16_t vz = 0;
  uint16_t hdg = 0;  // centidegrees

  Bytes encode() const;
  static GlobalPosition decode(std::span<const uint8_t> payload);
};

struct MissionItem {
  uint8_t target_system = 0;
  uint8_t target_component = 0;
  uint16_t seq = 0;  // 0 is reserved for the home item
  uint8_t frame = uint8_t(MavFrame::GlobalRelativeAlt);
  double x = 0;  // latitude deg
  double y = 0;  // longitude deg
  double z = 0;  // altitude m, meaning set by frame

  Bytes encode() const;
  static MissionItem decode(std::span<const uint8_t> payload);
};

struct CommandLong {
  uint8_t target_system = 0;
  uint8_t target_component = 0;
  uint16_t command = 0;
  uint8_t confirmation = 0;
  double param1 = 0, param2 = 0, param3 = 0, param4 = 0;
  double param5 = 0, param6 = 0, param7 = 0;

  Bytes encode() const;
  static CommandLong decode(std::span<const uint8_t> payload);
};

struct CommandAck {
  uint16_t command = 0;
  uint8_t result = uint8_t(CmdResult::Accepted);

  Bytes encode() const;
  static CommandAck decode(std::span<const uint8_t> payload);
};

/// Wraps a payload into an unsealed v2 frame; call serialize() to emit.
FrameV2 make_frame(uint32_t msgid, Bytes payload, uint8_t seq, uint8_t sysid,
                   uint8_t compid);
FrameV1 make_frame_v1(uint8_t msgid, Bytes payload, uint8_t seq, uint8_t sysid,
                      uint8_t compid);

}  // namespace mavkit
