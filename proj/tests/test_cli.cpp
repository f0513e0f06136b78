#include <catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include <anyonic/sampling.hpp>

using namespace anyonic;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int rc = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(ANYONIC_CLI_PATH) + " " + args + " 2>/dev/null";
  CliResult r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int status = pclose(p);
  r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / "anyonic_cli_test";
  fs::create_directories(d);
  return d / name;
}

nlohmann::json run_json(const std::string& args, const std::string& name) {
  fs::path prefix = scratch(name);
  CliResult r = run_cli(args + " --out " + prefix.string());
  REQUIRE(r.rc == 0);
  return nlohmann::json::parse(slurp(prefix.string() + ".json"));
}

}  // namespace

TEST_CASE("asymptotic_magic_state_from_plus") {
  auto j = run_json("--model ising --state qubit:1,1 --mode asymptotic --twist-lower 2 --phi 0", "magic");
  CHECK(j["schema"] == "anyonic-run/1");
  REQUIRE(j["outcomes"].size() == 2);
  for (const auto& o : j["outcomes"]) CHECK(std::abs(o["probability"].get<double>() - 0.5) < 1e-9);
  CHECK(std::abs(j["metadata"]["probability_sum"].get<double>() - 1.0) < 1e-12);
}

TEST_CASE("sample_size_mode") {
  CliResult a = run_cli("--mode sample_size --alpha 0.05 --delta-p 0.25");
  REQUIRE(a.rc == 0);
  CHECK(a.out.find("0.050000000000000003,0.25,1,62\n") != std::string::npos);
  CliResult b = run_cli("--mode sample_size --alpha 0.05 --delta-p 0.25 --q 0.5");
  REQUIRE(b.rc == 0);
  CHECK(b.out.find(",246\n") != std::string::npos);
}

TEST_CASE("bad_configuration_exits_with_two") {
  for (const char* args : {"--mode nonsense --state qubit:1,0", "--mode finite_n", "--state qubit:1,0 --q 2",
                           "--model no_such_model --state qubit:1,0", "--state qubit:1,0 --mode finite_n --n-probes 0",
                           "--state 'I I I 1' --probe vacuum", "--mode sample_size --delta-p 0", "--bogus-flag"})
    CHECK(run_cli(args).rc == 2);
}

TEST_CASE("oracle_check_reports_deviation") {
  auto j = run_json("--model ising --state qubit:1,2 --mode finite_n --n-probes 2 --twist-lower 1 --phi 0.3 --oracle-check",
                    "oracle");
  REQUIRE(j["metadata"].contains("oracle_max_error"));
  CHECK(j["metadata"]["oracle_max_error"].get<double>() < 1e-9);
  CHECK(j["outcomes"].size() == 3);
}

TEST_CASE("output_is_byte_deterministic") {
  const std::string args = "--model ising --state qubit:1,1 --mode sample --n-probes 3 --phi 0.7 --trials 500 --seed 99";
  fs::path a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(run_cli(args + " --out " + a.string()).rc == 0);
  REQUIRE(run_cli(args + " --out " + b.string()).rc == 0);
  CHECK(slurp(a.string() + ".json") == slurp(b.string() + ".json"));
  CHECK(slurp(a.string() + ".csv") == slurp(b.string() + ".csv"));
  CliResult c = run_cli(args + " --seed 100");
  CHECK(c.out != slurp(a.string() + ".csv"));
}

TEST_CASE("sampled_frequency_matches_probability") {
  auto j = run_json("--model ising --state qubit:1,1 --mode sample --n-probes 1 --phi 0 --trials 10000 --seed 7",
                    "sample");
  REQUIRE(j["outcomes"].size() == 2);
  const auto& horiz = j["outcomes"][1];
  CHECK(horiz["count"] == 1);
  CHECK(std::abs(horiz["probability"].get<double>() - 0.5) < 1e-12);
  CHECK(std::abs(horiz["sampled"].get<long>() / 1e4 - 0.5) < 0.02);
  CHECK(j["outcomes"][0]["sampled"].get<long>() + horiz["sampled"].get<long>() == 10000);
}

TEST_CASE("philox_known_answers") {
  using P = Philox4x32;
  CHECK(P::block({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(P::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        P::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(P::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        P::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("sampling_is_order_independent") {
  std::map<int, double> d{{0, 0.2}, {1, 0.5}, {2, 0.3}};
  auto a = sample_counts(d, 2000, 5);
  CHECK(a == sample_counts(d, 2000, 5));
  long total = 0;
  for (auto [n, c] : a) total += c;
  CHECK(total == 2000);
  // the first k trials of a longer run are the same draws
  auto small = sample_counts(d, 10, 5);
  auto big = sample_counts(d, 11, 5);
  long diff = 0;
  for (auto [n, c] : big) diff += c - small[n];
  CHECK(diff == 1);
  CHECK_THROWS_AS(sample_counts(std::map<int, double>{{0, 0.4}}, 10, 1), Error);
}

TEST_CASE("sample_size_estimates") {
  CHECK(std::abs(z_star(0.05) - 1.959963984540054) < 1e-12);
  CHECK(estimate_sample_size(0.05, 0.25) == 62);
  CHECK(estimate_sample_size(0.05, 0.25, 0.5) == 246);
  CHECK(estimate_sample_size(0.05, 100.0) == 1);
  CHECK_THROWS_AS(estimate_sample_size(0.0, 0.25), Error);
  CHECK_THROWS_AS(estimate_sample_size(0.05, -1), Error);
  CHECK_THROWS_AS(estimate_sample_size(0.05, 0.25, 0), Error);
}
