#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "gesha/cli.hpp"
#include "gesha/errors.hpp"
#include "gesha/reports.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace gesha;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gesha_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "gesha");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

std::vector<std::string> micro_args(const fs::path& out) {
  return {"--instance", fixture::data_path("micro/instance.json"), "--scenarios",
          fixture::data_path("micro/scenarios.csv"), "--out", out.string()};
}

std::vector<std::string> join(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Column `name` of the first data row.
std::string csv_field(const std::string& text, const std::string& name, int row = 1) {
  std::istringstream in(text);
  std::string header, line;
  std::getline(in, header);
  for (int r = 0; r < row; ++r) std::getline(in, line);
  std::istringstream h(header), l(line);
  std::string hn, v;
  while (std::getline(h, hn, ',')) {
    std::getline(l, v, ',');
    if (hn == name) return v;
  }
  return "<missing>";
}

}  // namespace

TEST_CASE("solution CSV round trip") {
  const auto inst = fixture::micro();
  std::vector<double> x(static_cast<std::size_t>(inst.num_x()));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.1 + 1.0 / 3.0 * static_cast<double>(i);
  std::ostringstream os;
  write_solution_csv(os, inst, x);
  CHECK(parse_solution_csv(os.str(), inst) == x);
}

TEST_CASE("malformed solution files") {
  const auto inst = fixture::two_bus(2);
  CHECK_THROWS_AS(parse_solution_csv("gen,t,x\n", inst), DataError);
  CHECK_THROWS_AS(parse_solution_csv("generator,t,x\nnope,1,2\n", inst), DataError);
  CHECK_THROWS_AS(parse_solution_csv("generator,t,x\ncheap,3,2\n", inst), DataError);
  CHECK_THROWS_AS(parse_solution_csv("generator,t,x\ncheap,1,2\ncheap,1,2\n", inst), DataError);
  CHECK_THROWS_AS(parse_solution_csv("generator,t,x\ncheap,1,abc\n", inst), DataError);
  // Missing entries.
  CHECK_THROWS_AS(parse_solution_csv("generator,t,x\ncheap,1,2\n", inst), DataError);
  CHECK_THROWS_AS(read_solution_csv("/nonexistent/solution.csv", inst), DataError);
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("usage, config and data exit codes") {
  CHECK(cli({}) == kExitUsage);
  CHECK(cli({"solve", "--bogus"}) == kExitUsage);
  CHECK(cli({"--help"}) == kExitOk);
  const auto out = scratch("codes");
  CHECK(cli(join({"solve", "--algorithm", "nope"}, micro_args(out))) == kExitConfig);
  CHECK(cli(join({"solve", "--rho", "0"}, micro_args(out))) == kExitConfig);
  CHECK(cli({"solve", "--instance", "/nonexistent.json", "--scenarios", "/nonexistent.csv"}) == kExitData);
  CHECK(cli({"validate", "--instance", fixture::data_path("micro/instance.json")}) == kExitOk);
  CHECK(cli(join({"evaluate", "--solution", "/nonexistent/solution.csv"}, micro_args(out))) == kExitData);
}

TEST_CASE("run config JSON round trip and unknown keys") {
  RunConfig c;
  c.instance = "i.json";
  c.scenarios = "s.csv";
  c.rho = 0.5;
  c.window = "half";
  c.max_iterations = 17;
  const auto text = run_config_to_json(c);
  CHECK(run_config_to_json(run_config_from_json(text)) == text);
  CHECK_THROWS_AS(run_config_from_json("{\"rhoo\": 1}"), DataError);
  CHECK_THROWS_AS(run_config_from_json("not json"), DataError);
  c.split = 0.0;
  CHECK_THROWS_AS(validate_run_config(c), ConfigError);
}

TEST_CASE("solve writes its artifacts and echoes the configuration") {
  const auto out = scratch("shace");
  REQUIRE(cli(join({"solve", "--algorithm", "shace", "--rho", "1", "--max-iter", "6"}, micro_args(out))) == kExitOk);
  for (const char* f : {"manifest.json", "solution.csv", "history.csv", "timing.csv"}) CHECK(fs::exists(out / f));
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(m["config"]["rho"] == 1.0);
  CHECK(m["config"]["algorithm"] == "shace");
  CHECK(m["result"]["iterations"] == 6);
  const auto inst = fixture::micro();
  CHECK(read_solution_csv(out / "solution.csv", inst).size() == static_cast<std::size_t>(inst.num_x()));

  // Same configuration again: byte-identical solution and history.
  const auto again = scratch("shace_again");
  REQUIRE(cli(join({"solve", "--algorithm", "shace", "--rho", "1", "--max-iter", "6"}, micro_args(again))) ==
          kExitOk);
  CHECK(slurp(out / "solution.csv") == slurp(again / "solution.csv"));
  CHECK(slurp(out / "history.csv") == slurp(again / "history.csv"));

  // The manifest alone reproduces the run.
  const auto replay = scratch("shace_replay");
  REQUIRE(cli({"solve", "--config", (out / "manifest.json").string(), "--out", replay.string()}) == kExitOk);
  CHECK(slurp(out / "solution.csv") == slurp(replay / "solution.csv"));
}

TEST_CASE("one-shot evaluated against itself, in and out of sample") {
  const auto os = scratch("oneshot");
  REQUIRE(cli(join({"solve", "--algorithm", "oneshot"}, micro_args(os))) == kExitOk);
  const auto sol = (os / "solution.csv").string();
  const auto ev = scratch("eval");
  REQUIRE(cli(join({"evaluate", "--solution", sol, "--baseline", sol}, micro_args(ev))) == kExitOk);
  const auto report = slurp(ev / "report.csv");
  CHECK(csv_field(report, "ratio") == "1");
  CHECK(csv_field(report, "set") == "training");
  const auto m = nlohmann::json::parse(slurp(os / "manifest.json"));
  CHECK(std::stod(csv_field(report, "value")) == doctest::Approx(m["result"]["objective"].get<double>()).epsilon(1e-6));

  const auto test = scratch("eval_test");
  std::string text;
  REQUIRE(cli(join({"evaluate", "--solution", sol, "--set", "testing"}, micro_args(test)), &text) == kExitOk);
  CHECK(csv_field(slurp(test / "report.csv"), "set") == "testing");
  CHECK(text.find("out-of-sample") != std::string::npos);
  CHECK(csv_field(slurp(test / "report.csv"), "scenarios") == "2");

  // compare needs a one-shot baseline.
  const auto cmp = scratch("cmp");
  CHECK(cli({"compare", "--run", os.string(), "--out", cmp.string()}) == kExitConfig);
  const auto sha = scratch("cmp_sha");
  REQUIRE(cli(join({"solve", "--algorithm", "shacv", "--max-iter", "4"}, micro_args(sha))) == kExitOk);
  CHECK(cli({"compare", "--baseline", sha.string(), "--run", os.string(), "--out", cmp.string()}) == kExitConfig);
  REQUIRE(cli({"compare", "--baseline", os.string(), "--run", sha.string(), "--run", os.string(), "--out",
               cmp.string()}) == kExitOk);
  const auto quality = slurp(cmp / "quality.csv");
  CHECK(quality.find("shacv") != std::string::npos);
  CHECK(quality.find("oneshot") != std::string::npos);
  CHECK(fs::exists(cmp / "convergence.csv"));
}
