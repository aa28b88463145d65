#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

// Black-box tests for the hyptimes binary: exit codes, report files, and
// manifest replay. The binary path comes from HYPTIMES_BIN (set by ctest).

namespace {

namespace fs = std::filesystem;

std::string binary_path() {
  const char* env = std::getenv("HYPTIMES_BIN");
  REQUIRE_MESSAGE(env != nullptr, "HYPTIMES_BIN must point at the CLI binary");
  REQUIRE(fs::exists(env));
  return env;
}

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run(const std::string& args) {
  const std::string cmd = "'" + binary_path() + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "hyptimes_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file " << path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string shquote(const fs::path& p) { return "'" + p.string() + "'"; }

// CSV lines end in \r\n.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

TEST_CASE("help and version exit cleanly") {
  RunResult help = run("--help");
  CHECK(help.code == 0);
  CHECK(help.output.find("classify") != std::string::npos);
  CHECK(help.output.find("pliss") != std::string::npos);

  RunResult version = run("--version");
  CHECK(version.code == 0);
  CHECK(!version.output.empty());
}

TEST_CASE("input errors exit with code 2") {
  // Unknown builtin; the message lists the catalogue.
  RunResult unknown = run("simulate --system nope --x0 0.1 --steps 3");
  CHECK(unknown.code == 2);
  CHECK(unknown.output.find("limit_cycle") != std::string::npos);

  // No system source at all, then two at once.
  CHECK(run("simulate --x0 0.1 --steps 3").code == 2);
  CHECK(run("exponents --system north_south_map --system-json '{}' --x0 0.1").code == 2);

  // Malformed vector literal.
  RunResult bad_x0 = run("simulate --system north_south_map --x0 0.1,,bogus --steps 3");
  CHECK(bad_x0.code == 2);
  CHECK(bad_x0.output.find("bogus") != std::string::npos);

  // pliss needs exactly one sequence source.
  CHECK(run("pliss --c1 0.5 --c2 1.0 --H 2.0").code == 2);

  // classify wants either a point or a grid, not both.
  CHECK(run("classify --system bowen_type --x0 1,1 --grid 2x2").code == 2);

  // No subcommand.
  CHECK(run("").code == 2);
}

TEST_CASE("trajectory blow-up exits with code 3") {
  // x' = x from x0 = 1 passes the norm guard long before T = 60.
  RunResult r = run(
      "simulate --system-json '{\"kind\":\"flow\",\"dimension\":1,"
      "\"field\":[\"x\"],\"name\":\"expand\"}' --x0 1 --T 60 --dt 0.01");
  CHECK(r.code == 3);
  CHECK(r.output.find("blow-up") != std::string::npos);
}

TEST_CASE("strict mode exit codes") {
  // A constant torus flow has no attractor evidence: inconclusive.
  RunResult incon = run("classify --system constant_torus --x0 0.5,0.5 --strict");
  CHECK(incon.code == 4);

  // Same run without --strict reports the verdict and exits 0.
  RunResult loose = run("classify --system constant_torus --x0 0.5,0.5");
  CHECK(loose.code == 0);
  nlohmann::json doc = nlohmann::json::parse(loose.output);
  CHECK(doc["verdict"]["label"] == "inconclusive");

  // A conclusive verdict under --strict stays 0.
  CHECK(run("classify --system north_south_map --x0 0.3 --strict").code == 0);

  // Starting on the stable axis of the saddle never reaches the section.
  RunResult miss = run("section --system linear_saddle --x0 0.5,0 --T 5 --strict");
  CHECK(miss.code == 4);
  RunResult miss_loose = run("section --system linear_saddle --x0 0.5,0 --T 5");
  CHECK(miss_loose.code == 0);
  nlohmann::json sec = nlohmann::json::parse(miss_loose.output);
  CHECK(sec["evidence"]["hit"] == false);
}

TEST_CASE("classify report on stdout parses and carries a manifest") {
  RunResult r = run("classify --system north_south_map --x0 0.3");
  REQUIRE(r.code == 0);
  nlohmann::json doc = nlohmann::json::parse(r.output);
  CHECK(doc["manifest"]["command"] == "classify");
  CHECK(doc["manifest"]["system"] == "north_south_map");
  CHECK(doc["manifest"].contains("content_hash"));
  CHECK(doc["verdict"]["label"] == "map_periodic_sink");
  CHECK(doc["verdict"]["orbit"]["period"] == 1);
}

TEST_CASE("pliss flow mode recovers the logarithmic example") {
  const fs::path prefix = scratch_dir() / "pliss_flow";
  RunResult r = run("pliss --expr 'log(1+t)' --T 10 --dt 0.001 --c 0.5 --eps 0.1 --out " +
                    shquote(prefix));
  REQUIRE(r.code == 0);

  nlohmann::json doc = nlohmann::json::parse(slurp(prefix.string() + ".json"));
  CHECK(doc["pliss"]["mode"] == "flow");
  CHECK(doc["pliss"]["measure"].get<double>() ==
        doctest::Approx(28.0 / 3.0).epsilon(2e-3));
  const std::size_t count = doc["pliss"]["indices"].size();
  CHECK(count > 0);

  // The CSV lists one qualifying time per row.
  std::istringstream csv(slurp(prefix.string() + ".csv"));
  std::string line;
  REQUIRE(next_line(csv, line));
  CHECK(line == "time");
  std::size_t rows = 0;
  while (next_line(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == count);
}

TEST_CASE("pliss discrete mode on a constant sequence") {
  RunResult r = run("pliss --values 1,1,1 --c1 0.5 --c2 0.9 --H 1");
  REQUIRE(r.code == 0);
  nlohmann::json doc = nlohmann::json::parse(r.output);
  CHECK(doc["pliss"]["count"] == 3);
  CHECK(doc["pliss"]["theta"].get<double>() == doctest::Approx(0.8));
}

TEST_CASE("simulate writes a CSV trace with one row per sample") {
  const fs::path prefix = scratch_dir() / "sim_map";
  RunResult r = run("simulate --system north_south_map --x0 0.3 --steps 5 --out " +
                    shquote(prefix));
  REQUIRE(r.code == 0);

  std::istringstream csv(slurp(prefix.string() + ".csv"));
  std::string line;
  REQUIRE(next_line(csv, line));
  CHECK(line == "t,x1");
  std::size_t rows = 0;
  while (next_line(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 6);  // initial state plus five iterates

  nlohmann::json doc = nlohmann::json::parse(slurp(prefix.string() + ".json"));
  CHECK(doc["samples"] == 6);
  CHECK(doc["final_state"].size() == 1);
}

TEST_CASE("repeated runs emit byte-identical reports") {
  const fs::path a = scratch_dir() / "det_a";
  const fs::path b = scratch_dir() / "det_b";
  const std::string tail = "classify --system north_south_map --x0 0.3 --out ";
  REQUIRE(run(tail + shquote(a)).code == 0);
  REQUIRE(run(tail + shquote(b)).code == 0);
  CHECK(slurp(a.string() + ".json") == slurp(b.string() + ".json"));
}

TEST_CASE("rerun replays a manifest bit-identically") {
  const fs::path first = scratch_dir() / "replay_src";
  const fs::path second = scratch_dir() / "replay_dst";
  REQUIRE(run("classify --system limit_cycle --x0 0.5,0 --horizon 120 --out " +
              shquote(first)).code == 0);
  REQUIRE(run("rerun " + shquote(first.string() + ".json") + " --out " +
              shquote(second)).code == 0);
  const std::string doc_a = slurp(first.string() + ".json");
  const std::string doc_b = slurp(second.string() + ".json");
  CHECK(doc_a == doc_b);

  nlohmann::json parsed = nlohmann::json::parse(doc_a);
  CHECK(parsed["verdict"]["label"] == "flow_periodic_sink_basin");

  // A file without a manifest block is rejected.
  const fs::path junk = scratch_dir() / "junk.json";
  std::ofstream(junk) << "{\"a\": 1}\n";
  CHECK(run("rerun " + shquote(junk)).code == 2);
}
