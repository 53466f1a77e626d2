#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qtangent/cli.hpp"

using namespace qtangent;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qtangent_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int count_lines(const std::string& s) { return int(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("density of the semicircle") {
  auto r = run({"density", "--process", "qnormal", "--q", "0", "--grid", "-2:2:401"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 402);
  CHECK(rows[0] == std::vector<std::string>{"x", "pdf"});
  CHECK(rows[201][0] == "0");
  CHECK(std::stod(rows[201][1]) == doctest::Approx(0.3183098862).epsilon(1e-10));
  // 17 significant digits round-trip bit for bit
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double v = std::stod(rows[i][1]);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    CHECK(rows[i][1] == buf);
  }
  auto j = run({"density", "--process", "qou", "--q", "0.5", "--t2", "0.3", "--x", "0.4", "--grid", "-1:1:5",
                "--format", "json"});
  REQUIRE(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["tool"] == "qtangent");
  CHECK(doc["command"] == "density");
  CHECK(doc["result"]["pdf"].size() == 5);
}

TEST_CASE("simulate writes deterministic path files") {
  const auto a = scratch("a"), b = scratch("b");
  const std::vector<std::string> base{"simulate", "--process", "qbm", "--q",     "0.95", "--t0",   "0",
                                      "--t1",     "4",       "--steps", "2000", "--paths", "3", "--seed", "7"};
  auto args_a = base, args_b = base;
  args_a.insert(args_a.end(), {"--out-dir", a.string(), "--threads", "1"});
  args_b.insert(args_b.end(), {"--out-dir", b.string(), "--threads", "3"});
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  for (int i = 0; i < 3; ++i) {
    const std::string name = "path_" + std::to_string(i) + ".csv";
    const std::string text = slurp(a / name);
    CHECK(text == slurp(b / name));
    const auto rows = csv_rows(text);
    REQUIRE(rows.size() == 2002);
    CHECK(rows[0] == std::vector<std::string>{"t", "value"});
    int outside = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const double t = std::stod(rows[k][0]), v = std::stod(rows[k][1]);
      if (std::abs(v) > 2.0 * std::sqrt(t / 0.05) + 1e-12) ++outside;
    }
    CHECK(outside == 0);
  }
  CHECK(slurp(a / "path_0.csv") != slurp(a / "path_1.csv"));
}

TEST_CASE("validation errors exit 1 with one line") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"density", "--q", "2", "--grid", "0:1:3"},
           {"density", "--grid", "0:1"},
           {"density", "--grid", "0:1:3", "--bogus", "1"},
           {"density", "--process", "nope", "--grid", "0:1:3"},
           {"simulate", "--process", "qnormal"},
           {"simulate", "--steps", "0"},
           {"tangent", "--ladder", "0.01,0.1"},
           {"tangent", "--case", "qbm_boundary", "--s", "-1"},
           {"jumps", "--a", "0"},
           {"biane", "--grid", "0:1:3", "--s", "2", "--t", "1"},
           {"verify", "--suite", "other"},
           {"frobnicate"},
           {}}) {
    const auto r = run(args);
    CHECK(r.code == 1);
    CHECK(count_lines(r.err) == 1);
    CHECK(r.err.rfind("error: ", 0) == 0);
  }
  const auto help = run({"density", "--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("--grid") != std::string::npos);
}

TEST_CASE("tangent verdict drives the exit code") {
  auto ok = run({"tangent", "--case", "qou_interior", "--q", "0", "--x", "0"});
  CHECK(ok.code == 0);
  const auto doc = nlohmann::json::parse(ok.out);
  const auto& result = doc["result"];
  CHECK(result["case"] == "qou_interior");
  CHECK(result["verdict"] == "pass");
  CHECK(result["ladder"].size() == 5);
  CHECK(result["threshold"] == 0.02);
  for (const char* key : {"q", "s", "x", "window", "ladder", "verdict", "threshold"}) CHECK(result.contains(key));
  auto bad = run({"tangent", "--case", "qou_boundary", "--q", "0.9", "--format", "csv"});
  CHECK(bad.code == 2);
  CHECK(csv_rows(bad.out).size() == 6);
}

TEST_CASE("jumps and biane") {
  auto j = run({"jumps", "--q", "0.5", "--paths", "60", "--steps", "200", "--seed", "11"});
  CHECK(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["result"]["bound"] == 0.5);
  CHECK(doc["result"]["pass"] == true);

  auto b = run({"biane", "--s", "1", "--t", "2", "--x", "1", "--grid", "1:1:1"});
  REQUIRE(b.code == 0);
  const auto rows = csv_rows(b.out);
  REQUIRE(rows.size() == 2);
  CHECK(std::stod(rows[1][1]) == doctest::Approx(2.0 / (5.0 * M_PI)).epsilon(1e-12));
  CHECK(std::abs(std::stod(rows[1][2]) - std::stod(rows[1][1])) <= 1e-4);
}

TEST_CASE("verify suite") {
  auto r = run({"verify", "--suite", "freeprob"});
  const auto doc = nlohmann::json::parse(r.out);
  const auto& reports = doc["result"]["reports"];
  REQUIRE(reports.size() == 5);
  for (const auto& rep : reports) {
    for (const char* key : {"kind", "samples", "max_residual", "threshold", "pass"}) CHECK(rep.contains(key));
    if (rep["kind"] != "f_unique") CHECK(rep["pass"] == true);
  }
  CHECK(r.code == 0);
  CHECK(doc["result"]["pass"] == true);

  // same seed, same bytes
  CHECK(run({"verify", "--kind", "inversion", "--samples", "8", "--seed", "5"}).out ==
        run({"verify", "--kind", "inversion", "--samples", "8", "--seed", "5", "--threads", "2"}).out);
}
