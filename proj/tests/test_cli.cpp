#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "doctest.h"

namespace {

struct CliResult {
  int code = -1;
  std::string out;  // stdout and stderr interleaved

  bool contains(const std::string& needle) const {
    return out.find(needle) != std::string::npos;
  }
  int count(const std::string& needle) const {
    int n = 0;
    for (std::size_t at = out.find(needle); at != std::string::npos;
         at = out.find(needle, at + needle.size()))
      ++n;
    return n;
  }
};

// Runs the installed binary with a shell command line; MAVKIT_BIN comes from
// the build system. `prefix` lets tests set environment variables.
CliResult run_cli(const std::string& args, const std::string& prefix = "") {
  const std::string cmd = prefix + MAVKIT_BIN " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_path(const std::string& name) {
  return "/tmp/mavkit_cli_" + std::to_string(getpid()) + "_" + name;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in),
          std::istreambuf_iterator<char>()};
}

// Frozen wire fixtures, shared with the codec tests.
const char* kV1Heartbeat = "fe0907010100020351040000000402a700";
const char* kBadCrc = "fd090000070101000000020351040000000402f9fe";
const char* kSignedHeartbeat =
    "fd0901000701010000000203510400000004021ef9"
    "0112efcdab0000ba2a863037f9";
const char* kFixtureKeyHex =
    "000102030405060708090a0b0c0d0e0f"
    "101112131415161718191a1b1c1d1e1f";

}  // namespace

TEST_CASE("cli: usage errors exit 1") {
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("frobnicate").code == 1);
  CHECK(run_cli("keygen").code == 1);  // missing required positional
  CHECK(run_cli("gcs cmd arm").code == 1);  // no transport selected
  CHECK(run_cli("sim").code == 1);  // socket-free needs --duration
}

TEST_CASE("cli: catalog lists every built-in message with its seed") {
  const CliResult r = run_cli("catalog");
  CHECK(r.code == 0);
  CHECK(r.contains("msgid 0 name HEARTBEAT crc_seed 117"));
  for (const char* name :
       {"SYS_STATUS", "SYSTEM_TIME", "GLOBAL_POSITION", "MISSION_ITEM",
        "COMMAND_LONG", "COMMAND_ACK"})
    CHECK(r.contains(name));
  CHECK(r.contains("descriptor"));

  const CliResult machine = run_cli("catalog --machine");
  CHECK(machine.code == 0);
  CHECK(machine.contains("\"msgid\":0"));
  CHECK(machine.contains("\"crc_seed\":117"));
}

TEST_CASE("cli: keygen writes deterministic 64-hex key files") {
  const std::string a = temp_path("key_a");
  const std::string b = temp_path("key_b");
  const std::string c = temp_path("key_c");
  CHECK(run_cli("keygen " + a + " --seed 5").code == 0);
  CHECK(run_cli("keygen " + b + " --seed 5").code == 0);
  CHECK(run_cli("keygen " + c + " --seed 6").code == 0);

  const std::string bytes_a = read_file(a);
  CHECK(bytes_a.size() == 65);  // 64 hex digits and a newline
  CHECK(bytes_a.back() == '\n');
  CHECK(bytes_a == read_file(b));
  CHECK(bytes_a != read_file(c));
}

TEST_CASE("cli: mavdump decodes a v1 frame with named fields") {
  const CliResult r = run_cli(std::string("mavdump --hex ") + kV1Heartbeat);
  CHECK(r.code == 0);
  CHECK(r.contains("version 1"));
  CHECK(r.contains("msgid 0 name HEARTBEAT CRC OK"));
  CHECK(r.contains("  base_mode: 81"));
  CHECK(r.contains("  custom_mode: 4"));
}

TEST_CASE("cli: mavdump verifies signatures when given the key") {
  const std::string key = temp_path("fixture_key");
  write_file(key, std::string(kFixtureKeyHex) + "\n");
  const CliResult r = run_cli(std::string("mavdump --key ") + key +
                              " --hex " + kSignedHeartbeat);
  CHECK(r.code == 0);
  CHECK(r.contains("signed link_id 1 timestamp 2882400018"));
  CHECK(r.contains("signature Accept"));
}

TEST_CASE("cli: mavdump marks corrupted frames, one line per candidate") {
  const CliResult r = run_cli(std::string("mavdump --hex ") + kBadCrc);
  CHECK(r.code == 0);
  CHECK(r.count("CRC BAD") == 1);
  CHECK(r.count("CRC OK") == 0);
}

TEST_CASE("cli: mavdump machine output is one JSON object per frame") {
  const CliResult r =
      run_cli(std::string("mavdump --machine --hex ") + kV1Heartbeat);
  CHECK(r.code == 0);
  CHECK(r.contains("\"msgid\":0"));
  CHECK(r.contains("\"crc\":\"ok\""));
  CHECK(r.contains("\"name\":\"HEARTBEAT\""));
}

TEST_CASE("cli: mavdump handles empty stdin and rejects bad hex") {
  const CliResult empty = run_cli("mavdump < /dev/null");
  CHECK(empty.code == 0);
  CHECK(empty.out.empty());

  const CliResult bad = run_cli("mavdump --hex zz");
  CHECK(bad.code == 2);
  CHECK(bad.contains("mavkit:"));
}

TEST_CASE("cli: socket-free sim records a decodable capture") {
  const std::string cap = temp_path("cap.bin");
  const CliResult sim =
      run_cli("sim --duration 5 --seed 1 --capture " + cap);
  CHECK(sim.code == 0);
  CHECK(sim.contains("sim finished t 5 mode STABILIZE armed no"));
  CHECK(sim.contains("battery_pct 100"));

  const CliResult dump = run_cli("mavdump --capture " + cap);
  CHECK(dump.code == 0);
  CHECK(dump.count("CRC OK") == 30);  // 6 frames/s for 5 s
  CHECK(dump.count("CRC BAD") == 0);
  CHECK(dump.contains("name HEARTBEAT"));
  CHECK(dump.contains("name GLOBAL_POSITION"));
  CHECK(dump.contains("dir to_gcs"));
  CHECK(dump.contains("t_us"));
}

TEST_CASE("cli: sim scenario events steer the run") {
  const std::string scen = temp_path("scen.txt");
  write_file(scen, "# drain the pack early\nt=1 battery 50\n");
  const CliResult r = run_cli("sim --duration 5 --scenario " + scen);
  CHECK(r.code == 0);
  CHECK(r.contains("battery_pct 50"));
}

TEST_CASE("cli: malformed scenario lines report path and line number") {
  const std::string scen = temp_path("bad_scen.txt");
  write_file(scen, "t=1 battery 50\nt=2 teleport 4\n");
  const CliResult r = run_cli("sim --duration 5 --scenario " + scen);
  CHECK(r.code == 2);
  CHECK(r.contains(scen + ":2:"));
  CHECK(r.contains("teleport"));
}

TEST_CASE("cli: gcs command against the in-process vehicle") {
  const CliResult arm = run_cli("gcs --sim-vehicle cmd arm");
  CHECK(arm.code == 0);
  CHECK(arm.contains("command arm: Accepted"));

  // takeoff without arming first: the vehicle says no, and that is exit 2
  const CliResult takeoff = run_cli("gcs --sim-vehicle cmd takeoff --alt 5");
  CHECK(takeoff.code == 2);
  CHECK(takeoff.contains("command takeoff: Denied"));
}

TEST_CASE("cli: gcs mission upload acks every item") {
  const std::string mission = temp_path("mission.txt");
  write_file(mission,
             "0 0 24.68773 46.72185 612\n"
             "1 3 24.68795 46.72185 10\n"
             "2 3 24.68795 46.72210 10\n"
             "3 3 24.68773 46.72210 10\n");
  const CliResult r = run_cli("gcs --sim-vehicle mission upload " + mission);
  CHECK(r.code == 0);
  CHECK(r.contains("mission upload: 4/4 items acked"));
}

TEST_CASE("cli: gcs watch prints a status line per second") {
  const CliResult r = run_cli("gcs --sim-vehicle watch --duration 3");
  CHECK(r.code == 0);
  CHECK(r.count("alive yes") == 3);
  CHECK(r.contains("mode STABILIZE"));
  CHECK(r.contains("lost 0"));
}

TEST_CASE("cli: signed session picks the key up from MAVKIT_KEYFILE") {
  const std::string key = temp_path("env_key");
  REQUIRE(run_cli("keygen " + key + " --seed 9").code == 0);
  const CliResult r = run_cli("gcs --sim-vehicle --signed cmd arm",
                              "MAVKIT_KEYFILE=" + key + " ");
  CHECK(r.code == 0);
  CHECK(r.contains("command arm: Accepted"));

  // --signed with no key anywhere is a runtime error
  const CliResult bare =
      run_cli("gcs --sim-vehicle --signed cmd arm", "MAVKIT_KEYFILE= ");
  CHECK(bare.code == 2);
}

TEST_CASE("cli: attack runs one scenario file and renders the report") {
  const std::string scen = temp_path("replay_on.txt");
  write_file(scen, "attack=replay\nsigning=on\n");
  const CliResult r = run_cli("attack --scenario " + scen);
  CHECK(r.code == 0);
  CHECK(r.contains("attack: Replay"));
  CHECK(r.contains("frames_accepted_by_victim: 0"));
  CHECK(r.contains("defended: yes"));
  CHECK(r.contains("matches_expectation: yes"));
}

TEST_CASE("cli: attack matrix passes and unknown attacks are rejected") {
  const CliResult matrix = run_cli("attack --matrix");
  CHECK(matrix.code == 0);
  CHECK(matrix.contains("matrix: all cells match expectations"));
  CHECK(matrix.count("ok") >= 12);

  const std::string scen = temp_path("bad_attack.txt");
  write_file(scen, "attack=warp\n");
  const CliResult bad = run_cli("attack --scenario " + scen);
  CHECK(bad.code == 2);
  CHECK(bad.contains("unknown attack"));
}

TEST_CASE("cli: attack summary file carries the machine report") {
  const std::string scen = temp_path("inject_off.txt");
  const std::string summary = temp_path("summary.json");
  write_file(scen, "attack=injectcommand\n");
  const CliResult r =
      run_cli("attack --scenario " + scen + " --summary " + summary);
  CHECK(r.code == 0);
  const std::string json = read_file(summary);
  CHECK(json.find("\"attack\": \"InjectCommand\"") != std::string::npos);
  CHECK(json.find("\"matches_expectation\": true") != std::string::npos);
}
