#include "doctest.h"
#include "mavkit/catalog.hpp"
#include "mavkit/errors.hpp"
#include "mavkit/signing.hpp"
#include "mavkit/threat.hpp"
#include "mavkit/transport.hpp"
#include "mavkit/vehicle.hpp"

using namespace mavkit;

namespace {

// Scenario clocks start well after the signing epoch so u48 timestamps are
// comfortably positive.
constexpr uint64_t kClockBase =
    (uint64_t(1767225600) - kSigningEpochUnixSec) * 100000;

// A signed vehicle endpoint plus the attacker's-eye view of it: raw wire
// access on the other end of the link and a tally of signing rejections.
struct SignedVehicle {
  SignedVehicle()
      : catalog(Catalog::builtin()),
        key(keygen(7)),
        actor(Vehicle(SimParams{}, GeoOrigin{24.68773, 46.72185, 612.0}),
              link.b(), catalog, config()) {
    actor.on_signing_reject = [this](VerifyResult r, double) {
      ++rejections;
      last_reject = r;
    };
  }

  EndpointConfig config() {
    EndpointConfig cfg;
    cfg.sysid = 1;
    cfg.compid = 1;
    cfg.signing = true;
    cfg.key = key;
    cfg.link_id = 1;
    cfg.clock = [this] { return kClockBase + ticks * 2000; };
    return cfg;
  }

  void deliver() {
    ++ticks;
    link.advance(ticks * 20000);
    actor.step(double(ticks) * 0.02, 0.02);
  }

  FrameV2 signed_arm_command(SigningContext& signer) {
    CommandLong arm;
    arm.target_system = 1;
    arm.command = uint16_t(MavCmd::ArmDisarm);
    arm.param1 = 1;
    FrameV2 f = make_frame(kMsgCommandLong, arm.encode(), 0, 255, 190);
    return signer.sign_frame(std::move(f),
                             1, catalog.find(kMsgCommandLong)->seed());
  }

  SimLink link{SimLinkConfig{}};
  Catalog catalog;
  SecretKey key;
  uint64_t ticks = 0;
  VehicleActor actor;
  int rejections = 0;
  VerifyResult last_reject = VerifyResult::Accept;
};

}  // namespace

TEST_CASE("threat: attack names round-trip, case-insensitively") {
  for (AttackKind k :
       {AttackKind::Eavesdrop, AttackKind::Replay, AttackKind::Tamper,
        AttackKind::SpoofPosition, AttackKind::InjectCommand,
        AttackKind::Flood}) {
    CHECK(attack_kind_from_name(attack_kind_name(k)) == k);
  }
  CHECK(attack_kind_from_name("REPLAY") == AttackKind::Replay);
  CHECK(attack_kind_from_name("spoofposition") == AttackKind::SpoofPosition);
  CHECK_FALSE(attack_kind_from_name("teleport").has_value());

  CHECK(attack_target_from_name("vehicle") == AttackTarget::Vehicle);
  CHECK(attack_target_from_name("gcs") == AttackTarget::Gcs);
  CHECK_FALSE(attack_target_from_name("tower").has_value());

  CHECK(mission_outcome_name(MissionOutcome::Completed) == "completed");
  CHECK(mission_outcome_name(MissionOutcome::Diverted) == "diverted");
  CHECK(mission_outcome_name(MissionOutcome::Crashed) == "crashed");
  CHECK(mission_outcome_name(MissionOutcome::TimedOut) == "timed_out");
}

TEST_CASE("threat: conventional victims and the expected-defense table") {
  CHECK(default_target(AttackKind::Replay) == AttackTarget::Vehicle);
  CHECK(default_target(AttackKind::Tamper) == AttackTarget::Vehicle);
  CHECK(default_target(AttackKind::InjectCommand) == AttackTarget::Vehicle);
  CHECK(default_target(AttackKind::Eavesdrop) == AttackTarget::Vehicle);
  CHECK(default_target(AttackKind::SpoofPosition) == AttackTarget::Gcs);
  CHECK(default_target(AttackKind::Flood) == AttackTarget::Gcs);

  // signing defeats forgery-class attacks and nothing else
  for (bool signing : {false, true}) {
    CHECK(expected_defended(AttackKind::Replay, signing) == signing);
    CHECK(expected_defended(AttackKind::Tamper, signing) == signing);
    CHECK(expected_defended(AttackKind::SpoofPosition, signing) == signing);
    CHECK(expected_defended(AttackKind::InjectCommand, signing) == signing);
    CHECK_FALSE(expected_defended(AttackKind::Eavesdrop, signing));
    CHECK_FALSE(expected_defended(AttackKind::Flood, signing));
  }
}

TEST_CASE("threat: make_scenario fills the conventional defaults") {
  const AttackScenario replay = make_scenario(AttackKind::Replay, true, 5);
  CHECK(replay.attack == AttackKind::Replay);
  CHECK(replay.target == AttackTarget::Vehicle);
  CHECK(replay.signing);
  CHECK(replay.rng_seed == 5);
  CHECK(replay.link_config.capacity_per_advance == 0);

  // flood scenarios get a channel narrow enough to saturate
  const AttackScenario flood = make_scenario(AttackKind::Flood, false, 1);
  CHECK(flood.target == AttackTarget::Gcs);
  CHECK(flood.link_config.capacity_per_advance == 6);
}

TEST_CASE("threat: inconsistent scenarios are rejected up front") {
  AttackScenario sc = make_scenario(AttackKind::Replay, false, 1);
  sc.duration_s = 0;
  CHECK_THROWS_AS(run_scenario(sc), ScenarioInvalid);

  sc = make_scenario(AttackKind::Replay, false, 1);
  sc.link_config.drop_probability = 1.5;
  CHECK_THROWS_AS(run_scenario(sc), ScenarioInvalid);

  sc = make_scenario(AttackKind::Replay, false, 1);
  sc.link_config.corrupt_probability = -0.1;
  CHECK_THROWS_AS(run_scenario(sc), ScenarioInvalid);

  sc = make_scenario(AttackKind::Replay, false, 1);
  sc.replay_delay_s = -1;
  CHECK_THROWS_AS(run_scenario(sc), ScenarioInvalid);

  sc = make_scenario(AttackKind::Flood, false, 1);
  sc.flood_rate_fps = 0;
  CHECK_THROWS_AS(run_scenario(sc), ScenarioInvalid);

  // each attack has one sensible victim; pointing it elsewhere is an error
  sc = make_scenario(AttackKind::Replay, false, 1);
  sc.target = AttackTarget::Gcs;
  CHECK_THROWS_AS(run_scenario(sc), ScenarioInvalid);
  sc = make_scenario(AttackKind::Flood, false, 1);
  sc.target = AttackTarget::Vehicle;
  CHECK_THROWS_AS(run_scenario(sc), ScenarioInvalid);
}

TEST_CASE("threat: a byte-identical replay is rejected on the wire") {
  SignedVehicle v;
  SigningContext gcs_signer(v.key, [&v] { return kClockBase + v.ticks * 2000; });
  const Bytes wire = to_wire(v.signed_arm_command(gcs_signer));

  v.link.a().send(wire);
  v.deliver();
  CHECK(v.actor.vehicle().armed());
  CHECK(v.actor.accepted_log().size() == 1);
  CHECK(v.rejections == 0);

  // the attacker records the frame and plays it back unmodified
  v.link.a().send(wire);
  v.deliver();
  CHECK(v.rejections == 1);
  CHECK(v.last_reject == VerifyResult::ReplayOrStale);
  CHECK(v.actor.accepted_log().size() == 1);  // nothing new got through
}

TEST_CASE("threat: resealing a tampered frame cannot fix the signature") {
  SignedVehicle v;
  SigningContext gcs_signer(v.key, [&v] { return kClockBase + v.ticks * 2000; });
  FrameV2 f = v.signed_arm_command(gcs_signer);

  // rewrite ARM into LAND and recompute the CRC; the signature is stale now
  const uint16_t land = uint16_t(MavCmd::Land);
  f.payload[2] = uint8_t(land & 0xFF);
  f.payload[3] = uint8_t(land >> 8);
  seal(f, v.catalog.find(kMsgCommandLong)->seed());

  v.link.a().send(to_wire(f));
  v.deliver();
  CHECK(v.rejections == 1);
  CHECK(v.last_reject == VerifyResult::BadSignature);
  CHECK(v.actor.accepted_log().empty());
  CHECK(v.actor.vehicle().mode() != FlightMode::Land);
  CHECK_FALSE(v.actor.vehicle().armed());
}

TEST_CASE("threat: unsigned frames die silently at a signing endpoint") {
  SignedVehicle v;
  CommandLong arm;
  arm.target_system = 1;
  arm.command = uint16_t(MavCmd::ArmDisarm);
  arm.param1 = 1;
  FrameV2 f = make_frame(kMsgCommandLong, arm.encode(), 0, 255, 190);
  v.link.a().send(serialize(std::move(f),
                            v.catalog.find(kMsgCommandLong)->seed()));
  v.deliver();
  CHECK_FALSE(v.actor.vehicle().armed());
  CHECK(v.actor.accepted_log().empty());
  // only signed-but-bad frames count as timestamp anomalies
  CHECK(v.rejections == 0);
}

TEST_CASE("threat: eavesdropping decodes the entire unencrypted stream") {
  for (bool signing : {false, true}) {
    const AttackReport r =
        run_scenario(make_scenario(AttackKind::Eavesdrop, signing, 1));
    CHECK(r.frames_injected == 0);
    CHECK(r.frames_accepted_by_victim == 0);
    CHECK(r.eavesdrop_decoded_fraction == 1.0);
    CHECK_FALSE(r.defended);  // signing authenticates, it does not hide
    CHECK(r.mission_outcome == MissionOutcome::Completed);
    CHECK(r.matches_expectation);
  }
}

TEST_CASE("threat: replayed mission item diverts an unsigned flight") {
  const AttackReport r =
      run_scenario(make_scenario(AttackKind::Replay, false, 1));
  CHECK(r.frames_injected == 1);
  CHECK(r.frames_accepted_by_victim == 1);
  CHECK(r.mission_outcome == MissionOutcome::Diverted);
  CHECK_FALSE(r.defended);
  CHECK(r.matches_expectation);
}

TEST_CASE("threat: signing turns the replay into a logged anomaly") {
  const AttackReport r =
      run_scenario(make_scenario(AttackKind::Replay, true, 1));
  CHECK(r.frames_injected == 1);
  CHECK(r.frames_accepted_by_victim == 0);
  CHECK(r.mission_outcome == MissionOutcome::Completed);
  CHECK(r.defended);
  CHECK(r.alert_count(Alert::TimestampAnomaly) == 1);
  CHECK(r.matches_expectation);
}

TEST_CASE("threat: tampered commands land the unsigned vehicle") {
  const AttackReport r =
      run_scenario(make_scenario(AttackKind::Tamper, false, 1));
  CHECK(r.frames_injected == 4);  // the probe and its three retries
  CHECK(r.frames_accepted_by_victim == 4);
  CHECK(r.mission_outcome == MissionOutcome::Diverted);
  CHECK_FALSE(r.defended);
  CHECK(r.matches_expectation);
}

TEST_CASE("threat: signing rejects every tampered retry") {
  const AttackReport r =
      run_scenario(make_scenario(AttackKind::Tamper, true, 1));
  CHECK(r.frames_injected == 4);
  CHECK(r.frames_accepted_by_victim == 0);
  CHECK(r.mission_outcome == MissionOutcome::Completed);
  CHECK(r.defended);
  CHECK(r.alert_count(Alert::TimestampAnomaly) == 4);
  CHECK(r.matches_expectation);
}

TEST_CASE("threat: spoofed positions poison the unsigned ground picture") {
  const AttackReport r =
      run_scenario(make_scenario(AttackKind::SpoofPosition, false, 1));
  CHECK(r.frames_injected == 20);
  CHECK(r.frames_accepted_by_victim == 20);
  // the vehicle itself flies on; the operator's map is the casualty
  CHECK(r.mission_outcome == MissionOutcome::Completed);
  CHECK_FALSE(r.defended);
  CHECK(r.matches_expectation);
}

TEST_CASE("threat: spoofed positions bounce off a signing ground station") {
  const AttackReport r =
      run_scenario(make_scenario(AttackKind::SpoofPosition, true, 1));
  CHECK(r.frames_injected == 20);
  CHECK(r.frames_accepted_by_victim == 0);
  CHECK(r.mission_outcome == MissionOutcome::Completed);
  CHECK(r.defended);
  CHECK(r.alert_count(Alert::TimestampAnomaly) == 20);
  CHECK(r.matches_expectation);
}

TEST_CASE("threat: one forged LAND grounds an unsigned vehicle") {
  const AttackReport r =
      run_scenario(make_scenario(AttackKind::InjectCommand, false, 1));
  CHECK(r.frames_injected == 1);
  CHECK(r.frames_accepted_by_victim == 1);
  CHECK(r.mission_outcome == MissionOutcome::Diverted);
  CHECK_FALSE(r.defended);
  CHECK(r.matches_expectation);
}

TEST_CASE("threat: the forged LAND is one more rejected signature") {
  const AttackReport r =
      run_scenario(make_scenario(AttackKind::InjectCommand, true, 1));
  CHECK(r.frames_injected == 1);
  CHECK(r.frames_accepted_by_victim == 0);
  CHECK(r.mission_outcome == MissionOutcome::Completed);
  CHECK(r.defended);
  CHECK(r.alert_count(Alert::TimestampAnomaly) == 1);
  CHECK(r.matches_expectation);
}

TEST_CASE("threat: flooding starves telemetry with or without signing") {
  const AttackReport off =
      run_scenario(make_scenario(AttackKind::Flood, false, 1));
  CHECK(off.frames_injected == 4000);  // 400 fps for the 10 s window
  CHECK(off.frames_accepted_by_victim == 3000);  // capacity 6 x 50 Hz x 10 s
  CHECK(off.alert_count(Alert::HeartbeatGap) >= 1);
  CHECK(off.alert_count(Alert::FloodRate) >= 1);
  CHECK_FALSE(off.defended);
  CHECK(off.matches_expectation);

  // signing discards the junk but cannot un-clog the channel
  const AttackReport on =
      run_scenario(make_scenario(AttackKind::Flood, true, 1));
  CHECK(on.frames_injected == 4000);
  CHECK(on.frames_accepted_by_victim == 0);
  CHECK(on.alert_count(Alert::HeartbeatGap) >= 1);
  CHECK_FALSE(on.defended);
  CHECK(on.matches_expectation);
}

TEST_CASE("threat: the full matrix at seed 1 matches the defense table") {
  const MatrixResult m = score_matrix(1);
  REQUIRE(m.cells.size() == 12);
  CHECK(m.all_match);

  const AttackKind order[] = {AttackKind::Eavesdrop, AttackKind::Replay,
                              AttackKind::Tamper, AttackKind::SpoofPosition,
                              AttackKind::InjectCommand, AttackKind::Flood};
  for (std::size_t i = 0; i < m.cells.size(); ++i) {
    const AttackReport& r = m.cells[i];
    CHECK(r.attack == order[i / 2]);
    CHECK(r.signing == (i % 2 == 1));
    CHECK(r.matches_expectation);
    CHECK(r.defended == expected_defended(r.attack, r.signing));
  }
}

TEST_CASE("threat: forgery defense holds across 20 seeds") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    for (AttackKind k : {AttackKind::Replay, AttackKind::Tamper,
                         AttackKind::InjectCommand}) {
      const AttackReport off = run_scenario(make_scenario(k, false, seed));
      CHECK(off.frames_injected >= 1);
      CHECK(off.frames_accepted_by_victim == off.frames_injected);
      CHECK(off.mission_outcome == MissionOutcome::Diverted);

      const AttackReport on = run_scenario(make_scenario(k, true, seed));
      CHECK(on.frames_accepted_by_victim == 0);
      CHECK(on.mission_outcome == MissionOutcome::Completed);
      CHECK(on.alert_count(Alert::TimestampAnomaly) >= 1);
      CHECK(on.defended);
    }
  }
}

TEST_CASE("threat: reports render every scoring field") {
  const AttackReport r =
      run_scenario(make_scenario(AttackKind::Replay, true, 1));
  const std::string text = render_report(r);
  CHECK(text.find("attack: Replay") != std::string::npos);
  CHECK(text.find("signing: on") != std::string::npos);
  CHECK(text.find("frames_accepted_by_victim: 0") != std::string::npos);
  CHECK(text.find("defended: yes") != std::string::npos);

  const std::string grid = render_matrix(score_matrix(1));
  CHECK(grid.find("matrix: all cells match expectations") !=
        std::string::npos);
  CHECK(grid.find("MISMATCH") == std::string::npos);
}
