#include "mavkit/threat.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "mavkit/catalog.hpp"
#include "mavkit/errors.hpp"
#include "mavkit/messages.hpp"
#include "mavkit/parser.hpp"
#include "mavkit/signing.hpp"

namespace mavkit {

namespace {

constexpr uint8_t kVehicleSysid = 1;
constexpr uint8_t kVehicleCompid = 1;
constexpr uint8_t kGcsSysid = 255;
constexpr uint8_t kGcsCompid = 190;
constexpr uint8_t kAttackerSysid = 99;
constexpr uint8_t kLinkId = 1;

constexpr double kTickS = 0.02;  // matches the vehicle's 50 Hz step
constexpr uint64_t kTickUs = 20000;

constexpr double kSpoofPeriodS = 0.25;
constexpr int kSpoofCount = 20;
constexpr double kFloodWindowS = 10.0;
constexpr double kProbeDelayS = 1.0;  // GET_HOME probe after the trigger

// Scenario signing clocks start at 2026-01-01 GMT (as offset from the 2015
// signing epoch, in 10 us units) and advance with simulated time, so runs
// never touch the wall clock.
constexpr uint64_t kSimClockBaseUnits =
    (uint64_t(1767225600) - kSigningEpochUnixSec) * 100000;

constexpr double kDegPerRad = 57.29577951308232;

GeoOrigin riyadh_origin() { return {24.68773, 46.72185, 612.0}; }

// Home plus four waypoints with ~25 m legs at 10 m relative altitude; every
// scenario flies this same mission.
std::vector<MissionItem> standard_mission() {
  const GeoOrigin o = riyadh_origin();
  const double lon_scale = kMetersPerDegLat * std::cos(o.lat_deg / kDegPerRad);
  auto wp = [&](uint16_t seq, double north_m, double east_m) {
    MissionItem it;
    it.target_system = kVehicleSysid;
    it.seq = seq;
    it.frame = uint8_t(MavFrame::GlobalRelativeAlt);
    it.x = o.lat_deg + north_m / kMetersPerDegLat;
    it.y = o.lon_deg + east_m / lon_scale;
    it.z = 10.0;
    return it;
  };
  MissionItem home;
  home.target_system = kVehicleSysid;
  home.seq = 0;
  home.frame = uint8_t(MavFrame::Global);
  home.x = o.lat_deg;
  home.y = o.lon_deg;
  home.z = o.alt_m;
  return {home, wp(1, 25, 0), wp(2, 25, 25), wp(3, 0, 25), wp(4, -25, 0)};
}

// Man in the middle: owns one endpoint of each hop, forwards everything,
// and mounts the configured attack once activated. Holds no key; when the
// endpoints sign, forged traffic is signed with a random key of its own.
class Attacker {
 public:
  Attacker(const AttackScenario& sc, Link& gcs_side, Link& veh_side,
           const Catalog& catalog, SigningContext::Clock clock)
      : sc_(sc),
        gcs_side_(gcs_side),
        veh_side_(veh_side),
        catalog_(catalog),
        tap_(catalog.seed_lookup()) {
    if (sc_.signing)
      forged_signer_.emplace(keygen(sc_.rng_seed ^ 0xabad1deau),
                             std::move(clock));
  }

  void activate(double now_s) {
    active_ = true;
    t0_ = now_s;
  }
  bool active() const { return active_; }

  void step(double now_s) {
    if (active_) attack_traffic(now_s);

    for (const Bytes& frame : gcs_side_.recv()) {
      observe(frame);
      if (sc_.attack == AttackKind::Replay && !captured_) {
        if (auto parsed = parse_one(frame);
            parsed && frame_msgid(*parsed) == kMsgMissionItem) {
          captured_bytes_ = frame;
          captured_ = true;
        }
      }
      if (active_ && sc_.attack == AttackKind::Tamper) {
        if (auto mutated = tamper(frame)) {
          injected_.push_back(*mutated);
          veh_side_.send(*mutated);
          continue;
        }
      }
      veh_side_.send(frame);
    }

    for (const Bytes& frame : veh_side_.recv()) {
      observe(frame);
      gcs_side_.send(frame);
    }
  }

  const std::vector<Bytes>& injected() const { return injected_; }
  uint64_t frames_observed() const { return observed_; }
  uint64_t frames_decoded() const { return decoded_; }

 private:
  void observe(const Bytes& bytes) {
    for (const ParsedFrame& pf : tap_.feed(bytes)) {
      ++observed_;
      if (pf.verdict != CrcVerdict::Ok) continue;
      const MessageDef* def = catalog_.find(frame_msgid(pf.frame));
      if (!def) continue;
      try {
        def->unpack(frame_payload(pf.frame));
        ++decoded_;
      } catch (const LengthMismatch&) {
      }
    }
  }

  std::optional<Frame> parse_one(const Bytes& bytes) const {
    StreamParser p(catalog_.seed_lookup());
    std::vector<ParsedFrame> frames = p.feed(bytes);
    if (frames.size() != 1 || frames[0].verdict != CrcVerdict::Ok)
      return std::nullopt;
    return frames[0].frame;
  }

  // Rewrites a COMMAND_LONG into LAND and recomputes the CRC. A signature,
  // if present, is carried over unchanged; without the key it cannot be
  // recomputed, which is exactly what signing is supposed to exploit.
  std::optional<Bytes> tamper(const Bytes& bytes) const {
    auto parsed = parse_one(bytes);
    if (!parsed || frame_msgid(*parsed) != kMsgCommandLong)
      return std::nullopt;
    const auto* v2 = std::get_if<FrameV2>(&*parsed);
    if (!v2 || v2->payload.size() < 4) return std::nullopt;
    FrameV2 f = *v2;
    const uint16_t land = uint16_t(MavCmd::Land);
    f.payload[2] = uint8_t(land & 0xFF);  // command field, u16 at offset 2
    f.payload[3] = uint8_t(land >> 8);
    seal(f, catalog_.find(kMsgCommandLong)->seed());
    return to_wire(f);
  }

  void attack_traffic(double now_s) {
    switch (sc_.attack) {
      case AttackKind::Replay:
        if (captured_ && !strike_done_ &&
            now_s >= t0_ + sc_.replay_delay_s) {
          veh_side_.send(captured_bytes_);
          injected_.push_back(captured_bytes_);
          strike_done_ = true;
        }
        break;
      case AttackKind::InjectCommand:
        if (!strike_done_ && now_s >= t0_ + sc_.replay_delay_s) {
          const Bytes wire = forge_land_command();
          veh_side_.send(wire);
          injected_.push_back(wire);
          strike_done_ = true;
        }
        break;
      case AttackKind::SpoofPosition:
        while (spoof_sent_ < kSpoofCount &&
               now_s >= t0_ + spoof_sent_ * kSpoofPeriodS) {
          const Bytes wire = forge_position();
          gcs_side_.send(wire);
          injected_.push_back(wire);
          ++spoof_sent_;
        }
        break;
      case AttackKind::Flood:
        if (now_s <= t0_ + kFloodWindowS) {
          flood_carry_ += sc_.flood_rate_fps * kTickS;
          for (; flood_carry_ >= 1.0; flood_carry_ -= 1.0) {
            const Bytes wire = forge_junk();
            gcs_side_.send(wire);
            injected_.push_back(wire);
          }
        }
        break;
      case AttackKind::Eavesdrop:
      case AttackKind::Tamper:
        break;  // handled in the forwarding path
    }
  }

  Bytes finish(FrameV2 f, uint8_t seed) {
    if (forged_signer_)
      return to_wire(forged_signer_->sign_frame(std::move(f), kLinkId, seed));
    return serialize(std::move(f), seed);
  }

  uint8_t seed_of(uint32_t msgid) const {
    return catalog_.find(msgid)->seed();
  }

  Bytes forge_land_command() {
    CommandLong cmd;
    cmd.target_system = kVehicleSysid;
    cmd.target_component = kVehicleCompid;
    cmd.command = uint16_t(MavCmd::Land);
    FrameV2 f = make_frame(kMsgCommandLong, cmd.encode(), seq_++, kGcsSysid,
                           kGcsCompid);
    return finish(std::move(f), seed_of(kMsgCommandLong));
  }

  // A lie a few kilometers northeast, under the vehicle's own identity.
  Bytes forge_position() {
    GlobalPosition p;
    p.lat = degrees_to_gps_raw(24.75);
    p.lon = degrees_to_gps_raw(46.80);
    p.alt = 700 * 1000;
    p.relative_alt = 88 * 1000;
    FrameV2 f = make_frame(kMsgGlobalPosition, p.encode(), seq_++,
                           kVehicleSysid, kVehicleCompid);
    return finish(std::move(f), seed_of(kMsgGlobalPosition));
  }

  // Valid-CRC heartbeat noise from a made-up system. Never signed: the
  // point of a flood is volume, not acceptance.
  Bytes forge_junk() {
    Heartbeat hb;
    hb.custom_mode = junk_counter_++;
    FrameV2 f = make_frame(kMsgHeartbeat, hb.encode(), seq_++,
                           kAttackerSysid, 7);
    return serialize(std::move(f), seed_of(kMsgHeartbeat));
  }

  const AttackScenario& sc_;
  Link& gcs_side_;
  Link& veh_side_;
  const Catalog& catalog_;
  StreamParser tap_;  // eavesdropping decoder over everything forwarded
  std::optional<SigningContext> forged_signer_;

  bool active_ = false;
  double t0_ = 0;
  uint8_t seq_ = 0;
  uint32_t junk_counter_ = 0;

  bool captured_ = false;
  Bytes captured_bytes_;
  bool strike_done_ = false;
  int spoof_sent_ = 0;
  double flood_carry_ = 0;

  std::vector<Bytes> injected_;
  uint64_t observed_ = 0;
  uint64_t decoded_ = 0;
};

SimLinkConfig hop_config(const AttackScenario& sc, uint64_t salt) {
  SimLinkConfig cfg = sc.link_config;
  cfg.rng_seed = sc.rng_seed ^ salt;
  return cfg;
}

// Runs one scenario end to end: boots the pair, flies the standard mission,
// triggers the attack at the first waypoint, and scores the result.
class ScenarioEngine {
 public:
  explicit ScenarioEngine(const AttackScenario& sc)
      : sc_(sc),
        catalog_(Catalog::builtin()),
        link_gcs_(hop_config(sc, 0x67637321)),
        link_veh_(hop_config(sc, 0x76656821)),
        key_(keygen(sc.rng_seed)),
        vehicle_(Vehicle(SimParams{}, riyadh_origin()), link_veh_.b(),
                 catalog_, endpoint(kVehicleSysid, kVehicleCompid)),
        gcs_(link_gcs_.a(), catalog_, endpoint(kGcsSysid, kGcsCompid),
             kVehicleSysid),
        attacker_(sc_, link_gcs_.b(), link_veh_.a(), catalog_, sim_clock()) {
    // The autopilot reports its signing rejections to the operator console,
    // where each one surfaces as a TimestampAnomaly alert.
    vehicle_.on_signing_reject = [this](VerifyResult r, double t) {
      gcs_.core().note_signing_rejection(r, t);
    };
  }

  AttackReport run() {
    const int total_ticks = int(sc_.duration_s / kTickS);
    double end_at_s = sc_.duration_s;
    double now_s = 0;

    for (int tick = 1; tick <= total_ticks; ++tick) {
      now_s = tick * kTickS;
      if (now_s > end_at_s) break;
      now_us_ = uint64_t(tick) * kTickUs;

      link_gcs_.advance(now_us_);
      link_veh_.advance(now_us_);
      attacker_.step(now_s);
      vehicle_.step(now_s, kTickS);
      gcs_.step(now_s);
      script_step(now_s);

      const Vehicle& veh = vehicle_.vehicle();
      ever_airborne_ = ever_airborne_ || veh.airborne();

      if (!attacker_.active() && phase_ == Phase::Mission &&
          !veh.visited_waypoints().empty()) {
        attacker_.activate(now_s);
        trigger_t_ = now_s;
        mark_vehicle_ = vehicle_.accepted_log().size();
        mark_gcs_ = gcs_.accepted_log().size();
        alert_mark_ = gcs_.core().alerts().size();
      }

      // Leave a few seconds for detectors and acks once the flight has
      // resolved one way or the other, then stop early.
      if (end_at_s >= sc_.duration_s) {
        const bool resolved = veh.crashed() ||
                              (ever_airborne_ && !veh.armed()) ||
                              mission_reset_event(veh) ||
                              (phase_ == Phase::Done && !ever_airborne_);
        if (resolved) end_at_s = std::min(sc_.duration_s, now_s + 3.0);
      }
    }

    return score();
  }

 private:
  enum class Phase { Boot, Upload, Arm, Takeoff, Climb, Mission, Rtl, Done };

  SigningContext::Clock sim_clock() {
    return [this] { return kSimClockBaseUnits + now_us_ / 10; };
  }

  EndpointConfig endpoint(uint8_t sysid, uint8_t compid) {
    EndpointConfig cfg;
    cfg.sysid = sysid;
    cfg.compid = compid;
    cfg.signing = sc_.signing;
    cfg.key = key_;
    cfg.link_id = kLinkId;
    cfg.clock = sim_clock();
    return cfg;
  }

  static bool mission_reset_event(const Vehicle& v) {
    return std::any_of(v.events().begin(), v.events().end(),
                       [](const VehicleEvent& e) {
                         return e.kind == VehicleEvent::MissionResetInFlight;
                       });
  }

  void script_step(double now_s) {
    Vehicle& veh = vehicle_.vehicle();
    switch (phase_) {
      case Phase::Boot:
        if (now_s >= 1.0) {
          veh.set_mode(FlightMode::Guided);
          gcs_.start_mission_upload(standard_mission(), now_s);
          phase_ = Phase::Upload;
        }
        break;
      case Phase::Upload:
        if (!gcs_.action_pending()) {
          if (gcs_.last_outcome() != CommandOutcome::Success) {
            phase_ = Phase::Done;
            break;
          }
          CommandLong cmd;
          cmd.command = uint16_t(MavCmd::ArmDisarm);
          cmd.param1 = 1;
          gcs_.start_command(cmd, now_s);
          phase_ = Phase::Arm;
        }
        break;
      case Phase::Arm:
        if (!gcs_.action_pending()) {
          if (gcs_.last_outcome() != CommandOutcome::Success) {
            phase_ = Phase::Done;
            break;
          }
          CommandLong cmd;
          cmd.command = uint16_t(MavCmd::Takeoff);
          cmd.param7 = 10;
          gcs_.start_command(cmd, now_s);
          phase_ = Phase::Takeoff;
        }
        break;
      case Phase::Takeoff:
        if (!gcs_.action_pending()) {
          if (gcs_.last_outcome() != CommandOutcome::Success) {
            phase_ = Phase::Done;
            break;
          }
          phase_ = Phase::Climb;
        }
        break;
      case Phase::Climb:
        if (veh.relative_alt_m() >= 9.5) {
          veh.set_mode(FlightMode::Auto);
          phase_ = Phase::Mission;
        }
        break;
      case Phase::Mission:
        // One benign in-flight command; under Tamper this is what the
        // adversary rewrites into LAND.
        if (attacker_.active() && !probe_sent_ &&
            now_s >= trigger_t_ + kProbeDelayS && !gcs_.action_pending()) {
          CommandLong cmd;
          cmd.command = uint16_t(MavCmd::GetHome);
          gcs_.start_command(cmd, now_s);
          probe_sent_ = true;
        }
        if (veh.mission_complete()) {
          veh.set_mode(FlightMode::Rtl);
          phase_ = Phase::Rtl;
        }
        break;
      case Phase::Rtl:
      case Phase::Done:
        break;
    }
  }

  MissionOutcome classify() const {
    const Vehicle& v = vehicle_.vehicle();
    if (v.crashed()) return MissionOutcome::Crashed;
    if (v.mission_complete() && !v.armed()) return MissionOutcome::Completed;
    if (mission_reset_event(v)) return MissionOutcome::Diverted;
    if (ever_airborne_ && !v.armed()) return MissionOutcome::Diverted;
    return MissionOutcome::TimedOut;
  }

  AttackReport score() const {
    AttackReport rep;
    rep.attack = sc_.attack;
    rep.signing = sc_.signing;
    rep.frames_injected = attacker_.injected().size();
    rep.mission_outcome = classify();
    rep.eavesdrop_decoded_fraction =
        attacker_.frames_observed() == 0
            ? 0.0
            : double(attacker_.frames_decoded()) /
                  double(attacker_.frames_observed());

    const bool vehicle_is_victim = sc_.target == AttackTarget::Vehicle;
    const std::vector<Bytes>& log =
        vehicle_is_victim ? vehicle_.accepted_log() : gcs_.accepted_log();
    const std::size_t mark = vehicle_is_victim ? mark_vehicle_ : mark_gcs_;

    // A frame counts as accepted when the victim logged byte-identical
    // wire bytes after the trigger; multiplicity matters on both sides.
    std::map<Bytes, uint64_t> pool;
    for (const Bytes& b : attacker_.injected()) ++pool[b];
    for (std::size_t i = mark; i < log.size(); ++i) {
      auto it = pool.find(log[i]);
      if (it != pool.end() && it->second > 0) {
        --it->second;
        ++rep.frames_accepted_by_victim;
      }
    }

    if (trigger_t_ >= 0) {
      const std::vector<Alert>& alerts = gcs_.core().alerts();
      for (std::size_t i = alert_mark_; i < alerts.size(); ++i)
        ++rep.alerts_raised[alerts[i].rule];
    }

    switch (sc_.attack) {
      case AttackKind::Eavesdrop:
        // Nothing confidential survived; decodability is the exposure.
        rep.defended = rep.eavesdrop_decoded_fraction < 1.0;
        break;
      case AttackKind::Flood:
        // Availability is the casualty: did telemetry keep flowing?
        rep.defended = rep.alert_count(Alert::HeartbeatGap) == 0;
        break;
      default:
        rep.defended = rep.frames_accepted_by_victim == 0 &&
                       rep.mission_outcome == MissionOutcome::Completed;
    }
    rep.expected_defended = expected_defended(sc_.attack, sc_.signing);
    rep.matches_expectation = rep.defended == rep.expected_defended;
    return rep;
  }

  AttackScenario sc_;
  Catalog catalog_;
  SimLink link_gcs_;
  SimLink link_veh_;
  SecretKey key_;
  uint64_t now_us_ = 0;

  VehicleActor vehicle_;
  GcsActor gcs_;
  Attacker attacker_;

  Phase phase_ = Phase::Boot;
  bool probe_sent_ = false;
  bool ever_airborne_ = false;
  double trigger_t_ = -1;
  std::size_t mark_vehicle_ = 0;
  std::size_t mark_gcs_ = 0;
  std::size_t alert_mark_ = 0;
};

void validate(const AttackScenario& sc) {
  const SimLinkConfig& lc = sc.link_config;
  if (sc.duration_s <= 0)
    throw ScenarioInvalid("duration must be positive");
  if (lc.drop_probability < 0 || lc.drop_probability > 1 ||
      lc.corrupt_probability < 0 || lc.corrupt_probability > 1)
    throw ScenarioInvalid("link probabilities must lie in [0,1]");
  if (sc.replay_delay_s < 0)
    throw ScenarioInvalid("replay delay cannot be negative");
  if (sc.attack == AttackKind::Flood && sc.flood_rate_fps <= 0)
    throw ScenarioInvalid("flood rate must be positive");
  if (sc.attack != AttackKind::Eavesdrop &&
      sc.target != default_target(sc.attack))
    throw ScenarioInvalid(
        std::string(attack_kind_name(sc.attack)) + " targets the " +
        std::string(attack_target_name(default_target(sc.attack))));
}

}  // namespace

std::string_view attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::Eavesdrop: return "Eavesdrop";
    case AttackKind::Replay: return "Replay";
    case AttackKind::Tamper: return "Tamper";
    case AttackKind::SpoofPosition: return "SpoofPosition";
    case AttackKind::InjectCommand: return "InjectCommand";
    case AttackKind::Flood: return "Flood";
  }
  return "?";
}

std::optional<AttackKind> attack_kind_from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  for (AttackKind k :
       {AttackKind::Eavesdrop, AttackKind::Replay, AttackKind::Tamper,
        AttackKind::SpoofPosition, AttackKind::InjectCommand,
        AttackKind::Flood}) {
    std::string canon(attack_kind_name(k));
    std::transform(canon.begin(), canon.end(), canon.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    if (lower == canon) return k;
  }
  return std::nullopt;
}

std::string_view attack_target_name(AttackTarget t) {
  return t == AttackTarget::Vehicle ? "vehicle" : "gcs";
}

std::optional<AttackTarget> attack_target_from_name(std::string_view name) {
  if (name == "vehicle") return AttackTarget::Vehicle;
  if (name == "gcs") return AttackTarget::Gcs;
  return std::nullopt;
}

std::string_view mission_outcome_name(MissionOutcome o) {
  switch (o) {
    case MissionOutcome::Completed: return "completed";
    case MissionOutcome::Diverted: return "diverted";
    case MissionOutcome::Crashed: return "crashed";
    case MissionOutcome::TimedOut: return "timed_out";
  }
  return "?";
}

AttackTarget default_target(AttackKind k) {
  switch (k) {
    case AttackKind::SpoofPosition:
    case AttackKind::Flood:
      return AttackTarget::Gcs;
    default:
      return AttackTarget::Vehicle;
  }
}

bool expected_defended(AttackKind k, bool signing) {
  switch (k) {
    case AttackKind::Eavesdrop:
    case AttackKind::Flood:
      return false;  // signing neither hides nor rate-limits anything
    default:
      return signing;
  }
}

AttackScenario make_scenario(AttackKind attack, bool signing, uint64_t seed) {
  AttackScenario sc;
  sc.attack = attack;
  sc.target = default_target(attack);
  sc.signing = signing;
  sc.rng_seed = seed;
  if (attack == AttackKind::Flood) sc.link_config.capacity_per_advance = 6;
  return sc;
}

AttackReport run_scenario(const AttackScenario& scenario) {
  validate(scenario);
  ScenarioEngine engine(scenario);
  return engine.run();
}

MatrixResult score_matrix(uint64_t seed) {
  MatrixResult m;
  for (AttackKind k :
       {AttackKind::Eavesdrop, AttackKind::Replay, AttackKind::Tamper,
        AttackKind::SpoofPosition, AttackKind::InjectCommand,
        AttackKind::Flood}) {
    for (bool signing : {false, true}) {
      AttackReport r = run_scenario(make_scenario(k, signing, seed));
      m.all_match = m.all_match && r.matches_expectation;
      m.cells.push_back(std::move(r));
    }
  }
  return m;
}

std::string render_report(const AttackReport& r) {
  std::ostringstream out;
  out << "attack: " << attack_kind_name(r.attack) << "\n";
  out << "signing: " << (r.signing ? "on" : "off") << "\n";
  out << "frames_injected: " << r.frames_injected << "\n";
  out << "frames_accepted_by_victim: " << r.frames_accepted_by_victim << "\n";
  out << "mission_outcome: " << mission_outcome_name(r.mission_outcome)
      << "\n";
  out << "alerts:";
  if (r.alerts_raised.empty()) {
    out << " none";
  } else {
    for (const auto& [rule, count] : r.alerts_raised)
      out << " " << alert_rule_name(rule) << "=" << count;
  }
  out << "\n";
  if (r.attack == AttackKind::Eavesdrop)
    out << "decoded_fraction: " << std::fixed << std::setprecision(3)
        << r.eavesdrop_decoded_fraction << "\n";
  out << "defended: " << (r.defended ? "yes" : "no") << "\n";
  out << "expected_defended: " << (r.expected_defended ? "yes" : "no")
      << "\n";
  out << "matches_expectation: " << (r.matches_expectation ? "yes" : "no")
      << "\n";
  return out.str();
}

std::string render_matrix(const MatrixResult& m) {
  std::ostringstream out;
  out << std::left << std::setw(15) << "attack" << std::setw(9) << "signing"
      << std::setw(10) << "injected" << std::setw(10) << "accepted"
      << std::setw(11) << "outcome" << std::setw(10) << "defended"
      << std::setw(10) << "expected" << "verdict\n";
  for (const AttackReport& r : m.cells) {
    out << std::left << std::setw(15) << attack_kind_name(r.attack)
        << std::setw(9) << (r.signing ? "on" : "off") << std::setw(10)
        << r.frames_injected << std::setw(10) << r.frames_accepted_by_victim
        << std::setw(11) << mission_outcome_name(r.mission_outcome)
        << std::setw(10) << (r.defended ? "yes" : "no") << std::setw(10)
        << (r.expected_defended ? "yes" : "no")
        << (r.matches_expectation ? "ok" : "MISMATCH") << "\n";
  }
  out << (m.all_match ? "matrix: all cells match expectations"
                      : "matrix: EXPECTATION MISMATCH")
      << "\n";
  return out.str();
}

}  // namespace mavkit
