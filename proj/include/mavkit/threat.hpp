#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mavkit/gcs.hpp"
#include "mavkit/transport.hpp"
#include "mavkit/vehicle.hpp"

namespace mavkit {

enum class AttackKind {
  Eavesdrop,
  Replay,
  Tamper,
  SpoofPosition,
  InjectCommand,
  Flood,
};

// Which endpoint's acceptance of attacker traffic decides the verdict.
enum class AttackTarget { Vehicle, Gcs };

enum class MissionOutcome { Completed, Diverted, Crashed, TimedOut };

std::string_view attack_kind_name(AttackKind k);
std::optional<AttackKind> attack_kind_from_name(std::string_view name);
std::string_view attack_target_name(AttackTarget t);
std::optional<AttackTarget> attack_target_from_name(std::string_view name);
std::string_view mission_outcome_name(MissionOutcome o);

/// The conventional victim: replay/tamper/inject aim at the vehicle,
/// spoofed positions and floods aim at the ground station.
AttackTarget default_target(AttackKind k);

struct AttackScenario {
  AttackKind attack = AttackKind::Eavesdrop;
  AttackTarget target = AttackTarget::Vehicle;
  // Applied to both hops of the GCS <-> attacker <-> vehicle path (the two
  // hops draw independent random streams). capacity_per_advance models the
  // shared radio channel saturating under flood traffic.
  SimLinkConfig link_config;
  bool signing = false;
  double duration_s = 120.0;
  double flood_rate_fps = 400.0;  // Flood
  double replay_delay_s = 1.0;    // Replay/InjectCommand: strike delay after
                                  // the attack trigger
  uint64_t rng_seed = 1;
};

/// Scenario prefilled with the conventional target and, for Flood, a link
/// capacity low enough that junk traffic can crowd telemetry out.
AttackScenario make_scenario(AttackKind attack, bool signing, uint64_t seed);

struct AttackReport {
  AttackKind attack = AttackKind::Eavesdrop;
  bool signing = false;
  uint64_t frames_injected = 0;
  uint64_t frames_accepted_by_victim = 0;
  // Alerts raised after the attack trigger, by rule.
  std::map<Alert::Rule, uint64_t> alerts_raised;
  MissionOutcome mission_outcome = MissionOutcome::TimedOut;
  double eavesdrop_decoded_fraction = 0.0;  // Eavesdrop only
  bool defended = false;
  bool expected_defended = false;
  bool matches_expectation = false;

  uint64_t alert_count(Alert::Rule rule) const {
    auto it = alerts_raised.find(rule);
    return it == alerts_raised.end() ? 0 : it->second;
  }
};

/// What the protocol is expected to achieve: signing defeats replay, tamper,
/// spoof and inject; eavesdropping and flooding are out of its reach.
bool expected_defended(AttackKind k, bool signing);

/// Flies the fixed four-waypoint mission, fires the attack once the first
/// waypoint is reached, and scores the result. Throws ScenarioInvalid for
/// inconsistent parameters.
AttackReport run_scenario(const AttackScenario& scenario);

struct MatrixResult {
  std::vector<AttackReport> cells;  // 6 attacks x {off, on}, attack-major
  bool all_match = true;
};

/// The full 6 x 2 grid with default scenarios at the given seed.
MatrixResult score_matrix(uint64_t seed);

std::string render_report(const AttackReport& r);
std::string render_matrix(const MatrixResult& m);

}  // namespace mavkit
