#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "cocyclelab/report.hpp"

using namespace cocyclelab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, int threads = 0) {
  std::string cmd;
  if (threads > 0) cmd += "COCYCLE_LAB_THREADS=" + std::to_string(threads) + " ";
  cmd += std::string(COCYCLE_LAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("empty report emits a header-only csv") {
  ReportTable t;
  t.command = "demo";
  t.columns = {"a", "b"};
  CHECK(emit_report(t, ReportFormat::kCsv) == "a,b\n");
}

TEST_CASE("csv doubles round-trip through 17 significant digits") {
  ReportTable t;
  t.command = "demo";
  t.columns = {"x"};
  const double value = 0.1 + 0.2;  // not representable exactly
  t.add_row({value});
  const std::string csv = emit_report(t, ReportFormat::kCsv);
  const std::string cell = csv.substr(csv.find('\n') + 1);
  CHECK(std::strtod(cell.c_str(), nullptr) == value);
}

TEST_CASE("rows must match the column count") {
  ReportTable t;
  t.command = "demo";
  t.columns = {"a", "b"};
  CHECK_THROWS_AS(t.add_row({1.0}), DomainError);
}

TEST_CASE("json reports re-emit bit-identically") {
  ReportTable t;
  t.command = "demo";
  t.columns = {"x", "name", "flag", "count"};
  t.add_row({1.0 / 3.0, std::string("row"), true, 42L});
  t.add_row({-2.5e-17, std::string("other"), false, -1L});
  const std::string json = emit_report(t, ReportFormat::kJson);
  CHECK(reemit_json(json) == json);
  CHECK(json.find("\"schema\": \"v1\"") != std::string::npos);
}

TEST_CASE("format parser accepts only csv and json") {
  CHECK(parse_format("csv") == ReportFormat::kCsv);
  CHECK(parse_format("json") == ReportFormat::kJson);
  CHECK_THROWS_AS(parse_format("xml"), DomainError);
}

TEST_CASE("cli computes the constant-diagonal spectrum") {
  const std::string out = "cli_lyap.csv";
  REQUIRE(run_cli("lyapunov --cocycle const-diag --scales 1,2,4 --grid 64 --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("n,L1,L2,L3,sumL,det_integral", 0) == 0);
  std::stringstream ss(text);
  std::string header, row;
  std::getline(ss, header);
  std::getline(ss, row);
  double n, l1, l2, l3;
  std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf", &n, &l1, &l2, &l3);
  CHECK(l1 == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(l2 == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(l3) <= 1e-12);
  std::remove(out.c_str());
}

TEST_CASE("cli ledger reproduces the reference arithmetic") {
  const std::string out = "cli_ledger.csv";
  REQUIRE(run_cli("ledger --gamma 1 --eta 0.1 --delta 0.05 --C 10 --n0 100 --n1 10000 --out " +
                  out) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("gamma1") != std::string::npos);
  CHECK(text.find("0.049999999999999") != std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("cli svp-fuzz returns success with zero violations") {
  const std::string out = "cli_fuzz.csv";
  REQUIRE(run_cli("svp-fuzz --m 3 --tau 1,2 --chains 25 --seed 0 --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("\n25,") != std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("cli dry runs validate without producing output") {
  const std::string out = "cli_dry.csv";
  REQUIRE(run_cli("lyapunov --cocycle const-diag --scales 1,2 --grid 32 --dry-run --out " +
                  out) == 0);
  std::ifstream probe(out);
  CHECK_FALSE(probe.good());
}

TEST_CASE("cli maps bad input to exit code 1") {
  CHECK(run_cli("lyapunov --cocycle no-such-fixture --scales 1,2") == 1);
  CHECK(run_cli("ldt --cocycle const-diag --formula zork") == 1);
  CHECK(run_cli("lyapunov") == 1);       // missing required flag
  CHECK(run_cli("no-such-command") == 1);
}

TEST_CASE("every subcommand supports --dry-run") {
  const std::string jacobi_path = "cli_jacobi.json";
  {
    std::ofstream out(jacobi_path);
    out << R"({"d_band": 1, "r": 0.25, "omega": [0.6180339887498949],
               "lambda": 3.0, "E": 0.0,
               "W": [[{"k": [0], "re": 1.0, "im": 0.0}]],
               "R": [[]],
               "D": [[{"k": [1], "re": 1.0, "im": 0.0},
                      {"k": [-1], "re": 1.0, "im": 0.0}]]})";
  }
  CHECK(run_cli("lyapunov --cocycle const-diag --dry-run") == 0);
  CHECK(run_cli("ap-check --dry-run") == 0);
  CHECK(run_cli("svp-fuzz --dry-run") == 0);
  CHECK(run_cli("ldt --cocycle const-diag --dry-run") == 0);
  CHECK(run_cli("holder-probe --cocycle diag-dominant-gap --dry-run") == 0);
  CHECK(run_cli("oseledets --cocycle diag-dominant-gap --dry-run") == 0);
  CHECK(run_cli("ledger --gamma 1 --eta 0.1 --delta 0.05 --C 2 --n0 4 --n1 8 --dry-run") == 0);
  CHECK(run_cli("jacobi-scan --file " + jacobi_path + " --dry-run") == 0);
  CHECK(run_cli("dioph --dry-run") == 0);
  std::remove(jacobi_path.c_str());
}

TEST_CASE("cli jacobi-scan recovers the zero exponent sum") {
  const std::string jacobi_path = "cli_jacobi2.json";
  {
    std::ofstream out(jacobi_path);
    out << R"({"d_band": 1, "r": 0.25, "omega": [0.6180339887498949],
               "lambda": 3.0, "E": 0.0,
               "W": [[{"k": [0], "re": 1.0, "im": 0.0}]],
               "R": [[]],
               "D": [[{"k": [1], "re": 1.0, "im": 0.0},
                      {"k": [-1], "re": 1.0, "im": 0.0}]]})";
  }
  const std::string out = "cli_jacobi_scan.csv";
  REQUIRE(run_cli("jacobi-scan --file " + jacobi_path +
                  " --lambdas 3 --energies 0,0.5 --n 16 --grid 128 --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("lambda,E,n,L1,L2", 0) == 0);
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);  // header
  int rows = 0;
  while (std::getline(ss, line)) {
    double lam, E, n, l1, l2;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &lam, &E, &n, &l1, &l2) == 5);
    CHECK(std::abs(l1 + l2) <= 1e-9);  // det A = +-1 for W = 1
    CHECK(l1 >= 0.5);                  // strong coupling keeps L1 large
    ++rows;
  }
  CHECK(rows == 2);
  std::remove(out.c_str());
  std::remove(jacobi_path.c_str());
}

TEST_CASE("cli dioph and ap-check smoke") {
  const std::string out = "cli_dioph.csv";
  REQUIRE(run_cli("dioph --omega 0.6180339887498949 --t 0.2 --kmax 1000 --out " + out) == 0);
  CHECK(slurp(out).find("true") != std::string::npos);
  std::remove(out.c_str());
  const std::string out2 = "cli_ap.csv";
  REQUIRE(run_cli("ap-check --m 2 --tau 1 --kappa 1e-4 --n 8 --out " + out2) == 0);
  CHECK(slurp(out2).find("true") != std::string::npos);  // admissible
  std::remove(out2.c_str());
}

TEST_CASE("cli reports are byte-identical across worker counts") {
  const std::string base = "cli_det_";
  std::vector<std::string> outputs;
  for (int threads : {1, 2, 8}) {
    const std::string out = base + std::to_string(threads) + ".csv";
    REQUIRE(run_cli("lyapunov --cocycle diag-dominant-gap --scales 4,8 --grid 128 --out " + out,
                    threads) == 0);
    outputs.push_back(slurp(out));
    std::remove(out.c_str());
  }
  CHECK(outputs[0] == outputs[1]);
  CHECK(outputs[0] == outputs[2]);
}

TEST_CASE("cli fuzz reports are reproducible for a fixed seed") {
  std::vector<std::string> outputs;
  for (int rep = 0; rep < 2; ++rep) {
    const std::string out = "cli_seed_" + std::to_string(rep) + ".csv";
    REQUIRE(run_cli("svp-fuzz --m 2 --tau 1 --chains 10 --seed 7 --out " + out) == 0);
    outputs.push_back(slurp(out));
    std::remove(out.c_str());
  }
  CHECK(outputs[0] == outputs[1]);
}
