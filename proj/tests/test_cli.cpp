#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "berezin/scalar.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
  const char* p = std::getenv("BEREZIN_CLI");
  if (!p) throw std::runtime_error("BEREZIN_CLI is not set");
  return p;
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    r.output.append(buf.data(), n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("exit code contract across canned invocations") {
  struct Row {
    const char* args;
    int want;
  };
  const Row table[] = {
      {"rho --model fs:0 --base 0,0 --cap 3", 0},
      {"models", 0},
      {"seminorm --op du --t 1 --s 1/2", 0},
      {"--bogus", 2},
      {"frobnicate --x 1", 2},
      {"rho --base 0,0 --cap 3", 2},                      // missing --model
      {"rho --model fs:0 --base 1,-1 --cap 2", 3},        // inadmissible base
      {"acoeff --model flat:1 --base 0,0 --ell 1 --alpha 2 --beta 0", 3},
      {"sweep --config /nonexistent/path.cfg", 3},
      {"oracle-offdiag --z 1 --w -1 --k 8..16", 3},       // antipodal
  };
  for (auto& row : table) {
    CAPTURE(row.args);
    CHECK(run(row.args).exit_code == row.want);
  }
}

TEST_CASE("rho output matches the published example and parses back") {
  auto r = run("rho --model fs:0 --base 0,0 --cap 4");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.output);
  CHECK(j["arith"] == "exact");
  std::vector<std::string> want = {"1", "1", "0", "0", "0"};
  REQUIRE(j["coefficients"].size() == want.size());
  for (size_t i = 0; i < want.size(); ++i) {
    std::string got = j["coefficients"][i];
    CHECK(got == want[i]);
    // exact values round-trip through the rational parser
    CHECK(berezin::to_string(berezin::parse_rational(got)) == got);
  }
}

TEST_CASE("rational round trip on a nontrivial value") {
  auto r = run("acoeff --model fs:0 --base 1/2,1/2 --ell 1 --alpha 1 --beta 1");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.output);
  std::string v = j["value"];
  CHECK(berezin::to_string(berezin::parse_rational(v)) == v);
  CHECK(berezin::parse_rational(v) == berezin::rat(25, 16));
}

TEST_CASE("csv schema: header row and unquoted values") {
  auto r = run("oracle-product --f h --g h --N 0 --k 8,16,24 --format csv");
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.output);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "k,N,residual,slope_so_far");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
  CHECK(r.output.find('"') == std::string::npos);
}

TEST_CASE("float mode is opt-in and tagged") {
  auto r = run("rho --model fs:0 --base 0,0 --cap 2 --float");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.output);
  CHECK(j["arith"] == "float");
}

TEST_CASE("sweep") {
  fs::path dir = fs::temp_directory_path() / "berezin_sweep_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path cfg = dir / "jobs.cfg";
  {
    std::ofstream out(cfg);
    out << "command=rho\n"
        << "model=fs:0\n"
        << "base=0,0\n"
        << "cap=3\n"
        << "out=rho.json\n"
        << "format=json\n"
        << "\n"
        << "command=oracle-product\n"
        << "f=h\n"
        << "g=h\n"
        << "N=0\n"
        << "k=8,12,16,20,24\n"
        << "out=prod.csv\n"
        << "format=csv\n";
  }

  SUBCASE("runs every declared job, one csv row per k") {
    auto r = run("sweep --config " + cfg.string() + " --jobs 2");
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(dir / "rho.json"));
    REQUIRE(fs::exists(dir / "prod.csv"));
    std::ifstream in(dir / "prod.csv");
    std::string line;
    int rows = -1;  // discount the header
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 5);
  }

  SUBCASE("repeated runs are bit-identical in exact mode") {
    auto read = [&](const fs::path& p) {
      std::ifstream in(p);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    REQUIRE(run("sweep --config " + cfg.string()).exit_code == 0);
    std::string first_rho = read(dir / "rho.json");
    std::string first_prod = read(dir / "prod.csv");
    REQUIRE(run("sweep --config " + cfg.string() + " --jobs 2").exit_code == 0);
    CHECK(read(dir / "rho.json") == first_rho);
    CHECK(read(dir / "prod.csv") == first_prod);
  }

  SUBCASE("malformed line reports its number") {
    fs::path bad = dir / "bad.cfg";
    {
      std::ofstream out(bad);
      out << "command=models\n"
          << "this line has no equals sign\n";
    }
    auto r = run("sweep --config " + bad.string());
    CHECK(r.exit_code == 3);
  }
}

TEST_CASE("oracle-bergman diagonal report is consistent") {
  auto r = run("oracle-bergman --k 10 --aux 0");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.output);
  CHECK(j["partial_sum_scaled_by_2pi"] == "11");
  double ps = j["partial_sum"];
  double kd = j["kernel_diagonal"];
  CHECK(ps == doctest::Approx(kd).epsilon(1e-12));
}
