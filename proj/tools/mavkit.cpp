// mavkit: single entry point for the toolkit. Subcommands:
//   mavdump  decode hex or a capture file into a frame listing
//   keygen   create a signing key file
//   catalog  print every message descriptor with its CRC seed
//   sim      run the simulated vehicle (UDP/TCP or socket-free)
//   gcs      ground station: commands, mission upload, watch
//   attack   run one attack scenario or the full 6x2 matrix
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 attack matrix
// expectation mismatch.

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mavkit/capture.hpp"
#include "mavkit/catalog.hpp"
#include "mavkit/errors.hpp"
#include "mavkit/gcs.hpp"
#include "mavkit/messages.hpp"
#include "mavkit/parser.hpp"
#include "mavkit/signing.hpp"
#include "mavkit/threat.hpp"
#include "mavkit/transport.hpp"
#include "mavkit/vehicle.hpp"

using nlohmann::json;
using namespace mavkit;

namespace {

constexpr double kTickS = 0.02;
constexpr uint64_t kTickUs = 20000;
// Socket-free runs never read the wall clock; signing timestamps start at
// 2026-01-01 GMT expressed against the 2015 signing epoch.
constexpr uint64_t kSimClockBaseUnits =
    (uint64_t(1767225600) - kSigningEpochUnixSec) * 100000;

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower((unsigned char)c));
  return s;
}

std::string_view cmd_result_name(uint8_t result) {
  switch (result) {
    case uint8_t(CmdResult::Accepted): return "Accepted";
    case uint8_t(CmdResult::Denied): return "Denied";
    case uint8_t(CmdResult::Unsupported): return "Unsupported";
    case uint8_t(CmdResult::Failed): return "Failed";
  }
  return "?";
}

// Key path from --key or MAVKIT_KEYFILE. `required` distinguishes "--signed
// needs a key" from mavdump's optional verification.
std::optional<SecretKey> resolve_key(const std::string& flag, bool required) {
  std::string path = flag;
  if (path.empty()) {
    if (const char* env = std::getenv("MAVKIT_KEYFILE")) path = env;
  }
  if (path.empty()) {
    if (required)
      throw BadKeyFile("no key file: pass --key or set MAVKIT_KEYFILE");
    return std::nullopt;
  }
  return load_key(path);
}

Bytes parse_hex(std::string_view text) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  int hi = -1;
  for (char c : text) {
    if (std::isspace((unsigned char)c)) continue;
    const int v = nibble(c);
    if (v < 0)
      throw std::runtime_error(std::string("not a hex digit: '") + c + "'");
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(uint8_t(hi << 4 | v));
      hi = -1;
    }
  }
  if (hi >= 0) throw std::runtime_error("odd number of hex digits");
  return out;
}

std::string render_value(const FieldValue& v) {
  std::ostringstream out;
  std::visit(
      [&out](auto x) {
        if constexpr (std::is_same_v<decltype(x), double>)
          out << std::setprecision(10) << x;
        else
          out << +x;
      },
      v);
  return out.str();
}

json json_value(const FieldValue& v) {
  return std::visit([](auto x) { return json(x); }, v);
}

// Pass-through Link that mirrors traffic into a capture file. Direction is
// from the owner's point of view: what it sends heads for the GCS, what it
// receives was aimed at the vehicle.
class TapLink : public Link {
 public:
  TapLink(Link& inner, CaptureWriter* writer, std::function<uint64_t()> now,
          uint8_t dir_sent, uint8_t dir_received)
      : inner_(inner),
        writer_(writer),
        now_(std::move(now)),
        dir_sent_(dir_sent),
        dir_received_(dir_received) {}

  void send(std::span<const uint8_t> bytes) override {
    if (writer_)
      writer_->append({now_(), dir_sent_, Bytes(bytes.begin(), bytes.end())});
    inner_.send(bytes);
  }

  std::vector<Bytes> recv() override {
    std::vector<Bytes> got = inner_.recv();
    if (writer_)
      for (const Bytes& b : got) writer_->append({now_(), dir_received_, b});
    return got;
  }

 private:
  Link& inner_;
  CaptureWriter* writer_;
  std::function<uint64_t()> now_;
  uint8_t dir_sent_, dir_received_;
};

class NullLink : public Link {
 public:
  void send(std::span<const uint8_t>) override {}
  std::vector<Bytes> recv() override { return {}; }
};

// ---------------------------------------------------------------- mavdump

struct DumpArgs {
  std::string hex;
  bool hex_given = false;
  std::string capture;
  std::string key;
  std::vector<std::string> catalog_files;
  bool machine = false;
};

int run_mavdump(const DumpArgs& args) {
  Catalog catalog = Catalog::builtin();
  for (const std::string& f : args.catalog_files) catalog.load_file(f);

  const std::optional<SecretKey> key = resolve_key(args.key, false);
  // Offline verification checks the tag and per-stream monotonicity; the
  // "clock" follows the frames so age alone never fails a capture.
  uint64_t dump_clock = 0;
  std::optional<SigningContext> verifier;
  if (key)
    verifier.emplace(*key, [&dump_clock] { return dump_clock; },
                     UnsignedPolicy::Accept);

  struct Chunk {
    std::optional<uint64_t> ts_us;
    std::optional<uint8_t> dir;
    Bytes bytes;
  };
  std::vector<Chunk> chunks;
  if (!args.capture.empty()) {
    for (CaptureRecord& rec : capture_read(args.capture))
      chunks.push_back({rec.ts_us, rec.dir, std::move(rec.bytes)});
  } else if (args.hex_given) {
    chunks.push_back({std::nullopt, std::nullopt, parse_hex(args.hex)});
  } else {
    std::stringstream all;
    all << std::cin.rdbuf();
    chunks.push_back({std::nullopt, std::nullopt, parse_hex(all.str())});
  }

  // One reassembly stream per capture direction (2 = directionless input).
  std::vector<StreamParser> parsers;
  for (int i = 0; i < 3; ++i) parsers.emplace_back(catalog.seed_lookup());

  int index = 0;
  for (const Chunk& chunk : chunks) {
    StreamParser& parser = parsers[chunk.dir ? *chunk.dir : 2];
    for (const ParsedFrame& pf : parser.feed(chunk.bytes)) {
      const bool ok = pf.verdict == CrcVerdict::Ok;
      const uint32_t msgid = frame_msgid(pf.frame);
      const MessageDef* def = catalog.find(msgid);
      const auto* v2 = std::get_if<FrameV2>(&pf.frame);

      std::string sig_text;
      json sig_json;
      if (verifier && v2 && ok) {
        if (!v2->is_signed()) {
          sig_text = "none";
        } else {
          dump_clock = v2->signature->timestamp;
          sig_text = verify_result_name(verifier->verify_frame(*v2));
        }
        sig_json = sig_text;
      }

      if (args.machine) {
        json j;
        j["index"] = index;
        if (chunk.ts_us) j["t_us"] = *chunk.ts_us;
        if (chunk.dir)
          j["dir"] = *chunk.dir == kDirToVehicle ? "to_vehicle" : "to_gcs";
        j["version"] = v2 ? 2 : 1;
        j["len"] = frame_payload(pf.frame).size();
        if (v2) {
          j["incompat_flags"] = v2->incompat_flags;
          j["compat_flags"] = v2->compat_flags;
        }
        j["seq"] = frame_seq(pf.frame);
        j["sysid"] = frame_sysid(pf.frame);
        j["compid"] = frame_compid(pf.frame);
        j["msgid"] = msgid;
        if (def) j["name"] = def->name;
        j["crc"] = ok ? "ok" : "bad";
        if (!sig_json.is_null()) j["signature"] = sig_json;
        if (ok && def) {
          try {
            const std::vector<FieldValue> values =
                def->unpack(frame_payload(pf.frame));
            json fields = json::object();
            for (std::size_t i = 0; i < values.size(); ++i)
              fields[def->fields[i].name] = json_value(values[i]);
            j["fields"] = fields;
          } catch (const LengthMismatch&) {
            j["fields"] = nullptr;
          }
        }
        std::cout << j.dump() << "\n";
      } else {
        std::ostringstream line;
        line << "frame " << index;
        if (chunk.ts_us) line << " t_us " << *chunk.ts_us;
        if (chunk.dir)
          line << " dir "
               << (*chunk.dir == kDirToVehicle ? "to_vehicle" : "to_gcs");
        line << " version " << (v2 ? 2 : 1) << " len "
             << frame_payload(pf.frame).size();
        if (v2)
          line << " incompat 0x" << std::hex << std::setw(2)
               << std::setfill('0') << int(v2->incompat_flags) << " compat 0x"
               << std::setw(2) << int(v2->compat_flags) << std::dec
               << std::setfill(' ');
        line << " seq " << int(frame_seq(pf.frame)) << " sysid "
             << int(frame_sysid(pf.frame)) << " compid "
             << int(frame_compid(pf.frame)) << " msgid " << msgid;
        if (def) line << " name " << def->name;
        line << " CRC " << (ok ? "OK" : "BAD");
        if (v2 && v2->is_signed())
          line << " signed link_id " << int(v2->signature->link_id)
               << " timestamp " << v2->signature->timestamp;
        if (!sig_text.empty()) line << " signature " << sig_text;
        std::cout << line.str() << "\n";
        if (ok && def) {
          try {
            const std::vector<FieldValue> values =
                def->unpack(frame_payload(pf.frame));
            for (std::size_t i = 0; i < values.size(); ++i) {
              std::cout << "  " << def->fields[i].name << ": "
                        << render_value(values[i]);
              if (!def->fields[i].unit.empty())
                std::cout << " " << def->fields[i].unit;
              std::cout << "\n";
            }
          } catch (const LengthMismatch&) {
            std::cout << "  payload does not match the catalog layout\n";
          }
        }
      }
      ++index;
    }
  }
  return 0;
}

// ---------------------------------------------------------------- catalog

int run_catalog(const std::vector<std::string>& files, bool machine) {
  Catalog catalog = Catalog::builtin();
  for (const std::string& f : files) catalog.load_file(f);
  for (const MessageDef* def : catalog.all()) {
    if (machine) {
      json j;
      j["msgid"] = def->id;
      j["name"] = def->name;
      j["crc_seed"] = def->seed();
      j["wire_size"] = def->wire_size();
      j["descriptor"] = def->descriptor();
      std::cout << j.dump() << "\n";
    } else {
      std::cout << "msgid " << def->id << " name " << def->name
                << " crc_seed " << int(def->seed()) << " wire_size "
                << def->wire_size() << "\n";
      std::cout << "  descriptor " << def->descriptor() << "\n";
    }
  }
  return 0;
}

// -------------------------------------------------------------------- sim

struct SimEvent {
  double t = 0;
  enum Kind { Battery, Gps, Wind } kind = Battery;
  double a = 0, b = 0;
};

std::vector<SimEvent> parse_sim_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioInvalid("cannot open scenario file " + path);
  std::vector<SimEvent> events;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fail = [&](const std::string& why) {
      throw ScenarioInvalid(path + ":" + std::to_string(lineno) + ": " + why);
    };
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    if (tok.rfind("t=", 0) != 0) fail("expected t=<seconds>");
    SimEvent ev;
    try {
      ev.t = std::stod(tok.substr(2));
    } catch (...) {
      fail("bad time value");
    }
    std::string what;
    if (!(ls >> what)) fail("missing event name");
    if (what == "battery") {
      ev.kind = SimEvent::Battery;
      if (!(ls >> ev.a)) fail("battery needs a percentage");
    } else if (what == "gps") {
      ev.kind = SimEvent::Gps;
      if (!(ls >> ev.a >> ev.b)) fail("gps needs <fix 0|1> <hdop>");
    } else if (what == "wind") {
      ev.kind = SimEvent::Wind;
      if (!(ls >> ev.a >> ev.b)) fail("wind needs <north m/s> <east m/s>");
    } else {
      fail("unknown event '" + what + "'");
    }
    events.push_back(ev);
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const SimEvent& x, const SimEvent& y) {
                     return x.t < y.t;
                   });
  return events;
}

struct SimArgs {
  std::string udp, tcp;
  bool use_signing = false;
  std::string key;
  uint64_t seed = 1;
  std::string scenario;
  double duration = 0;  // 0 = run until interrupted (socket modes only)
  std::string capture;
  uint8_t sysid = 1;
};

int run_sim(const SimArgs& args) {
  std::vector<SimEvent> events;
  if (!args.scenario.empty()) events = parse_sim_scenario(args.scenario);

  const bool socket_free = args.udp.empty() && args.tcp.empty();
  if (socket_free && args.duration <= 0) {
    std::cerr << "mavkit: sim without --udp/--tcp needs --duration\n";
    return 1;
  }

  std::unique_ptr<Link> wire;
  NullLink null_link;
  if (!args.udp.empty())
    wire = open_udp(args.udp, "");
  else if (!args.tcp.empty())
    wire = open_tcp(args.tcp, false);

  uint64_t now_us = 0;
  std::optional<CaptureWriter> writer;
  if (!args.capture.empty()) writer.emplace(args.capture);
  TapLink tap(wire ? *wire : static_cast<Link&>(null_link),
              writer ? &*writer : nullptr, [&now_us] { return now_us; },
              kDirToGcs, kDirToVehicle);

  EndpointConfig cfg;
  cfg.sysid = args.sysid;
  cfg.compid = 1;
  cfg.link_id = 1;
  cfg.signing = args.use_signing;
  if (args.use_signing) cfg.key = *resolve_key(args.key, true);
  if (socket_free)
    cfg.clock = [&now_us] { return kSimClockBaseUnits + now_us / 10; };

  Catalog catalog = Catalog::builtin();
  VehicleActor actor(Vehicle(SimParams{}, {24.68773, 46.72185, 612.0}), tap,
                     catalog, cfg);
  (void)args.seed;  // the vehicle itself is deterministic

  if (!socket_free)
    std::cerr << "sim: vehicle sysid " << int(args.sysid) << " up on "
              << (args.udp.empty() ? "tcp " + args.tcp : "udp " + args.udp)
              << (args.use_signing ? " (signed)" : "") << "\n";

  const auto wall_start = std::chrono::steady_clock::now();
  std::size_t next_event = 0;
  for (uint64_t tick = 1;; ++tick) {
    const double now_s = double(tick) * kTickS;
    if (args.duration > 0 && now_s > args.duration) break;
    now_us = tick * kTickUs;

    while (next_event < events.size() && events[next_event].t <= now_s) {
      const SimEvent& ev = events[next_event++];
      Vehicle& veh = actor.vehicle();
      switch (ev.kind) {
        case SimEvent::Battery: veh.set_battery(ev.a); break;
        case SimEvent::Gps: veh.set_gps(ev.a != 0, ev.b); break;
        case SimEvent::Wind: veh.set_wind(ev.a, ev.b); break;
      }
    }

    actor.step(now_s, kTickS);

    if (!socket_free)
      std::this_thread::sleep_until(wall_start +
                                    std::chrono::microseconds(now_us));
  }

  const VehicleState s = actor.vehicle().state();
  std::cout << "sim finished t " << args.duration << " mode "
            << flight_mode_name(uint32_t(s.mode)) << " armed "
            << (s.armed ? "yes" : "no") << " rel_alt_m "
            << double(s.relative_alt_mm) / 1000.0 << " battery_pct "
            << int(std::lround(s.battery_pct)) << "\n";
  return 0;
}

// -------------------------------------------------------------------- gcs

struct GcsArgs {
  std::string udp, tcp;
  bool sim_vehicle = false;
  bool use_signing = false;
  std::string key;
  uint8_t sysid = 1;  // the vehicle we talk to
  bool machine = false;
};

// Holds the station plus, for --sim-vehicle, an in-process autopilot on the
// other end of a sim link. step() advances one 20 ms tick; over real sockets
// it also paces to the wall clock.
struct GcsRig {
  explicit GcsRig(const GcsArgs& args) : args_(args) {
    EndpointConfig cfg;
    cfg.sysid = 255;
    cfg.compid = 190;
    cfg.link_id = 1;
    cfg.signing = args.use_signing;
    if (args.use_signing) cfg.key = *resolve_key(args.key, true);

    if (args.sim_vehicle) {
      cfg.clock = [this] { return kSimClockBaseUnits + now_us_ / 10; };
      sim_.emplace(SimLinkConfig{});
      EndpointConfig vcfg;
      vcfg.sysid = args.sysid;
      vcfg.compid = 1;
      vcfg.link_id = 1;
      vcfg.signing = cfg.signing;
      vcfg.key = cfg.key;
      vcfg.clock = cfg.clock;
      vehicle_.emplace(Vehicle(SimParams{}, {24.68773, 46.72185, 612.0}),
                       sim_->b(), catalog_, vcfg);
      gcs_.emplace(sim_->a(), catalog_, cfg, args.sysid);
    } else if (!args.udp.empty()) {
      wire_ = open_udp(":0", args.udp);
      gcs_.emplace(*wire_, catalog_, cfg, args.sysid);
    } else {
      wire_ = open_tcp(args.tcp, true);
      gcs_.emplace(*wire_, catalog_, cfg, args.sysid);
    }
    wall_start_ = std::chrono::steady_clock::now();
  }

  void step() {
    now_us_ += kTickUs;
    const double now_s = double(now_us_) / 1e6;
    if (sim_) sim_->advance(now_us_);
    if (vehicle_) vehicle_->step(now_s, kTickS);
    gcs_->step(now_s);
    if (!sim_)
      std::this_thread::sleep_until(wall_start_ +
                                    std::chrono::microseconds(now_us_));
  }

  double now_s() const { return double(now_us_) / 1e6; }
  GcsActor& gcs() { return *gcs_; }

  // Steps until pred() or the deadline; true when pred() came first.
  template <typename Pred>
  bool step_until(double timeout_s, Pred pred) {
    const double limit = now_s() + timeout_s;
    while (!pred()) {
      if (now_s() >= limit) return false;
      step();
    }
    return true;
  }

 private:
  GcsArgs args_;
  Catalog catalog_ = Catalog::builtin();
  std::unique_ptr<Link> wire_;
  std::optional<SimLink> sim_;
  std::optional<VehicleActor> vehicle_;
  std::optional<GcsActor> gcs_;
  uint64_t now_us_ = 0;
  std::chrono::steady_clock::time_point wall_start_;
};

int run_gcs_cmd(GcsRig& rig, const std::string& action, double alt,
                bool machine) {
  CommandLong cmd;
  if (action == "arm") {
    cmd.command = uint16_t(MavCmd::ArmDisarm);
    cmd.param1 = 1;
  } else if (action == "disarm") {
    cmd.command = uint16_t(MavCmd::ArmDisarm);
    cmd.param1 = 0;
  } else if (action == "takeoff") {
    cmd.command = uint16_t(MavCmd::Takeoff);
    cmd.param7 = alt;
  } else if (action == "land") {
    cmd.command = uint16_t(MavCmd::Land);
  } else {
    std::cerr << "mavkit: unknown command '" << action
              << "' (takeoff|land|arm|disarm)\n";
    return 1;
  }

  rig.step();  // let a first heartbeat open the path
  rig.gcs().start_command(cmd, rig.now_s());
  rig.step_until(10.0, [&] { return !rig.gcs().action_pending(); });

  const bool acked = rig.gcs().last_outcome() == CommandOutcome::Success;
  const std::optional<CommandAck> ack = rig.gcs().last_ack();
  if (machine) {
    json j;
    j["command"] = action;
    j["outcome"] = acked ? "ack" : "timeout";
    if (ack) j["result"] = std::string(cmd_result_name(ack->result));
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "command " << action << ": "
              << (acked ? std::string(cmd_result_name(ack->result))
                        : std::string("timeout"))
              << "\n";
  }
  return acked && ack->result == uint8_t(CmdResult::Accepted) ? 0 : 2;
}

std::vector<MissionItem> parse_mission_file(const std::string& path,
                                            uint8_t sysid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mission file " + path);
  std::vector<MissionItem> items;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first) || first[0] == '#') continue;
    MissionItem it;
    int seq = 0, frame = 0;
    std::istringstream again(line);
    if (!(again >> seq >> frame >> it.x >> it.y >> it.z))
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'seq frame x y z'");
    it.seq = uint16_t(seq);
    it.frame = uint8_t(frame);
    it.target_system = sysid;
    items.push_back(it);
  }
  return items;
}

int run_gcs_mission(GcsRig& rig, const std::string& file, uint8_t sysid,
                    bool machine) {
  const std::vector<MissionItem> items = parse_mission_file(file, sysid);
  rig.step();
  rig.gcs().start_mission_upload(items, rig.now_s());
  rig.step_until(10.0 + 2.0 * double(items.size()),
                 [&] { return !rig.gcs().action_pending(); });
  const bool ok = rig.gcs().last_outcome() == CommandOutcome::Success;
  if (machine) {
    json j;
    j["items"] = items.size();
    j["acked"] = rig.gcs().acked_seqs().size();
    j["outcome"] = ok ? "ok" : "timeout";
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "mission upload: " << rig.gcs().acked_seqs().size() << "/"
              << items.size() << " items acked"
              << (ok ? "" : " (timeout)") << "\n";
  }
  return ok ? 0 : 2;
}

int run_gcs_watch(GcsRig& rig, double duration, bool machine) {
  std::size_t alerts_seen = 0;
  int next_report = 1;
  while (rig.now_s() < duration) {
    rig.step();

    const std::vector<Alert>& alerts = rig.gcs().core().alerts();
    for (; alerts_seen < alerts.size(); ++alerts_seen) {
      const Alert& a = alerts[alerts_seen];
      if (machine) {
        json j;
        j["alert"] = std::string(alert_rule_name(a.rule));
        j["t"] = a.t_s;
        j["evidence"] = a.evidence;
        std::cout << j.dump() << "\n";
      } else {
        std::cout << "alert t " << std::fixed << std::setprecision(2) << a.t_s
                  << " " << alert_rule_name(a.rule) << ": " << a.evidence
                  << "\n";
      }
    }

    if (rig.now_s() >= next_report) {
      const VehicleView& v = rig.gcs().core().view();
      if (machine) {
        json j;
        j["t"] = next_report;
        j["alive"] = v.alive(rig.now_s());
        j["mode"] = v.mode_name();
        j["armed"] = v.armed;
        j["rel_alt_m"] = v.relative_alt_m;
        j["battery_pct"] = v.battery_pct;
        j["frames"] = v.link.received;
        j["lost"] = v.link.lost;
        std::cout << j.dump() << "\n";
      } else {
        std::cout << "t " << next_report << " alive "
                  << (v.alive(rig.now_s()) ? "yes" : "no") << " mode "
                  << v.mode_name() << " armed " << (v.armed ? "yes" : "no")
                  << " rel_alt_m " << std::fixed << std::setprecision(1)
                  << v.relative_alt_m << " battery_pct "
                  << int(std::lround(v.battery_pct)) << " frames "
                  << v.link.received << " lost " << v.link.lost << "\n";
      }
      ++next_report;
    }
  }
  return 0;
}

// ----------------------------------------------------------------- attack

AttackScenario parse_attack_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioInvalid("cannot open scenario file " + path);
  AttackScenario sc;
  bool have_attack = false, have_target = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fail = [&](const std::string& why) {
      throw ScenarioInvalid(path + ":" + std::to_string(lineno) + ": " + why);
    };
    std::string trimmed;
    for (char c : line)
      if (!std::isspace((unsigned char)c)) trimmed += c;
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) fail("expected key=value");
    const std::string k = lower(trimmed.substr(0, eq));
    const std::string v = trimmed.substr(eq + 1);
    try {
      if (k == "attack") {
        const auto kind = attack_kind_from_name(v);
        if (!kind) fail("unknown attack '" + v + "'");
        sc.attack = *kind;
        have_attack = true;
      } else if (k == "target") {
        const auto target = attack_target_from_name(lower(v));
        if (!target) fail("target must be vehicle or gcs");
        sc.target = *target;
        have_target = true;
      } else if (k == "signing") {
        const std::string lv = lower(v);
        if (lv == "on" || lv == "true" || lv == "1") sc.signing = true;
        else if (lv == "off" || lv == "false" || lv == "0") sc.signing = false;
        else fail("signing must be on or off");
      } else if (k == "duration_s") {
        sc.duration_s = std::stod(v);
      } else if (k == "flood_rate_fps") {
        sc.flood_rate_fps = std::stod(v);
      } else if (k == "replay_delay_s") {
        sc.replay_delay_s = std::stod(v);
      } else if (k == "drop_probability") {
        sc.link_config.drop_probability = std::stod(v);
      } else if (k == "corrupt_probability") {
        sc.link_config.corrupt_probability = std::stod(v);
      } else if (k == "delay_us") {
        sc.link_config.delay_us = std::stoull(v);
      } else if (k == "capacity_per_advance") {
        sc.link_config.capacity_per_advance = std::stoull(v);
      } else if (k == "rng_seed") {
        sc.rng_seed = std::stoull(v);
      } else {
        fail("unknown key '" + k + "'");
      }
    } catch (const ScenarioInvalid&) {
      throw;
    } catch (...) {
      fail("bad value for '" + k + "'");
    }
  }
  if (!have_attack) throw ScenarioInvalid(path + ": missing attack=");
  if (!have_target) sc.target = default_target(sc.attack);
  if (sc.attack == AttackKind::Flood &&
      sc.link_config.capacity_per_advance == 0)
    sc.link_config.capacity_per_advance = 6;
  return sc;
}

json report_json(const AttackReport& r) {
  json j;
  j["attack"] = std::string(attack_kind_name(r.attack));
  j["signing"] = r.signing;
  j["frames_injected"] = r.frames_injected;
  j["frames_accepted_by_victim"] = r.frames_accepted_by_victim;
  json alerts = json::object();
  for (const auto& [rule, count] : r.alerts_raised)
    alerts[std::string(alert_rule_name(rule))] = count;
  j["alerts"] = alerts;
  j["mission_outcome"] = std::string(mission_outcome_name(r.mission_outcome));
  if (r.attack == AttackKind::Eavesdrop)
    j["decoded_fraction"] = r.eavesdrop_decoded_fraction;
  j["defended"] = r.defended;
  j["expected_defended"] = r.expected_defended;
  j["matches_expectation"] = r.matches_expectation;
  return j;
}

struct AttackArgs {
  std::string scenario;
  uint64_t seed = 1;
  bool seed_given = false;
  bool matrix = false;
  bool machine = false;
  std::string summary;
};

int run_attack(const AttackArgs& args) {
  if (args.matrix) {
    const MatrixResult m = score_matrix(args.seed);
    json j;
    j["seed"] = args.seed;
    j["all_match"] = m.all_match;
    j["cells"] = json::array();
    for (const AttackReport& r : m.cells) j["cells"].push_back(report_json(r));
    if (args.machine)
      std::cout << j.dump() << "\n";
    else
      std::cout << render_matrix(m);
    if (!args.summary.empty()) std::ofstream(args.summary) << j.dump(2) << "\n";
    return m.all_match ? 0 : 3;
  }

  if (args.scenario.empty()) {
    std::cerr << "mavkit: attack needs --scenario FILE or --matrix\n";
    return 1;
  }
  AttackScenario sc = parse_attack_scenario(args.scenario);
  if (args.seed_given) sc.rng_seed = args.seed;
  const AttackReport r = run_scenario(sc);
  const json j = report_json(r);
  if (args.machine)
    std::cout << j.dump() << "\n";
  else
    std::cout << render_report(r);
  if (!args.summary.empty()) std::ofstream(args.summary) << j.dump(2) << "\n";
  return r.matches_expectation ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAVLink 1.0/2.0 protocol toolkit"};
  app.require_subcommand(1);

  DumpArgs dump;
  CLI::App* dump_cmd =
      app.add_subcommand("mavdump", "decode hex or a capture file");
  CLI::Option* hex_opt =
      dump_cmd->add_option("--hex", dump.hex, "hex string to decode");
  dump_cmd->add_option("--capture", dump.capture, "capture file to decode");
  dump_cmd->add_option("--key", dump.key, "key file for signature checks");
  dump_cmd->add_option("--catalog", dump.catalog_files,
                       "extra catalog definition files");
  dump_cmd->add_flag("--machine", dump.machine, "JSON lines output");

  std::string keygen_out;
  std::optional<uint64_t> keygen_seed;
  CLI::App* keygen_cmd = app.add_subcommand("keygen", "write a new key file");
  keygen_cmd->add_option("out", keygen_out, "key file path")->required();
  keygen_cmd->add_option("--seed", keygen_seed, "deterministic key seed");

  std::vector<std::string> catalog_files;
  bool catalog_machine = false;
  CLI::App* catalog_cmd =
      app.add_subcommand("catalog", "print descriptors and CRC seeds");
  catalog_cmd->add_option("--file", catalog_files,
                          "extra catalog definition files");
  catalog_cmd->add_flag("--machine", catalog_machine, "JSON lines output");

  SimArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("sim", "run the simulated vehicle");
  sim_cmd->add_option("--udp", sim.udp, "listen on host:port");
  sim_cmd->add_option("--tcp", sim.tcp, "listen on host:port");
  sim_cmd->add_flag("--signed", sim.use_signing, "sign and require signing");
  sim_cmd->add_option("--key", sim.key, "key file (or MAVKIT_KEYFILE)");
  sim_cmd->add_option("--seed", sim.seed, "rng seed");
  sim_cmd->add_option("--scenario", sim.scenario,
                      "event script: t=<sec> battery|gps|wind ...");
  sim_cmd->add_option("--duration", sim.duration, "stop after N sim seconds");
  sim_cmd->add_option("--capture", sim.capture, "record traffic to file");
  sim_cmd->add_option("--sysid", sim.sysid, "vehicle system id");

  GcsArgs gcs;
  CLI::App* gcs_cmd = app.add_subcommand("gcs", "ground control station");
  gcs_cmd->add_option("--udp", gcs.udp, "vehicle address host:port");
  gcs_cmd->add_option("--tcp", gcs.tcp, "vehicle address host:port");
  gcs_cmd->add_flag("--sim-vehicle", gcs.sim_vehicle,
                    "talk to an in-process simulated vehicle");
  gcs_cmd->add_flag("--signed", gcs.use_signing, "sign and require signing");
  gcs_cmd->add_option("--key", gcs.key, "key file (or MAVKIT_KEYFILE)");
  gcs_cmd->add_option("--sysid", gcs.sysid, "vehicle system id");
  gcs_cmd->add_flag("--machine", gcs.machine, "JSON lines output");
  gcs_cmd->require_subcommand(1);

  std::string cmd_action;
  double cmd_alt = 10.0;
  CLI::App* cmd_cmd = gcs_cmd->add_subcommand("cmd", "send one command");
  cmd_cmd->add_option("action", cmd_action, "takeoff|land|arm|disarm")
      ->required();
  cmd_cmd->add_option("--alt", cmd_alt, "takeoff altitude, meters");

  std::string mission_verb, mission_file;
  CLI::App* mission_cmd = gcs_cmd->add_subcommand("mission", "mission upload");
  mission_cmd->add_option("verb", mission_verb, "only 'upload'")->required();
  mission_cmd->add_option("file", mission_file, "one item per line: seq frame x y z")
      ->required();

  double watch_duration = 10.0;
  CLI::App* watch_cmd = gcs_cmd->add_subcommand("watch", "follow telemetry");
  watch_cmd->add_option("--duration", watch_duration, "seconds to watch");

  AttackArgs attack;
  CLI::App* attack_cmd =
      app.add_subcommand("attack", "run attack scenarios against a sim pair");
  attack_cmd->add_option("--scenario", attack.scenario,
                         "key=value scenario file");
  CLI::Option* seed_opt =
      attack_cmd->add_option("--seed", attack.seed, "scenario rng seed");
  attack_cmd->add_flag("--matrix", attack.matrix, "run the full 6x2 grid");
  attack_cmd->add_flag("--machine", attack.machine, "JSON output");
  attack_cmd->add_option("--summary", attack.summary,
                         "write a JSON summary file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }
  dump.hex_given = hex_opt->count() > 0;
  attack.seed_given = seed_opt->count() > 0;

  try {
    if (dump_cmd->parsed()) return run_mavdump(dump);
    if (keygen_cmd->parsed()) {
      store_key(keygen(keygen_seed), keygen_out);
      std::cout << "wrote " << keygen_out << "\n";
      return 0;
    }
    if (catalog_cmd->parsed())
      return run_catalog(catalog_files, catalog_machine);
    if (sim_cmd->parsed()) return run_sim(sim);
    if (gcs_cmd->parsed()) {
      if (!gcs.sim_vehicle && gcs.udp.empty() && gcs.tcp.empty()) {
        std::cerr << "mavkit: gcs needs --udp, --tcp, or --sim-vehicle\n";
        return 1;
      }
      GcsRig rig(gcs);
      if (cmd_cmd->parsed())
        return run_gcs_cmd(rig, cmd_action, cmd_alt, gcs.machine);
      if (mission_cmd->parsed()) {
        if (mission_verb != "upload") {
          std::cerr << "mavkit: unknown mission verb '" << mission_verb
                    << "'\n";
          return 1;
        }
        return run_gcs_mission(rig, mission_file, gcs.sysid, gcs.machine);
      }
      if (watch_cmd->parsed())
        return run_gcs_watch(rig, watch_duration, gcs.machine);
    }
    if (attack_cmd->parsed()) return run_attack(attack);
  } catch (const std::exception& e) {
    std::cerr << "mavkit: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
