#include <cstdlib>
#include <fstream>
#include <regex>

#include "curvlab/cli.hpp"
#include "doctest.h"

using namespace curvlab;
using nlohmann::json;

namespace {

json base_config(const std::string& cmd, json params) {
  json j;
  j["command"] = cmd;
  j["seed"] = 7;
  j["format"] = "json";
  j["params"] = std::move(params);
  return j;
}

std::string strip_timestamp(std::string report) {
  return std::regex_replace(report, std::regex("\"timestamp\": \\d+"), "\"timestamp\": 0");
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("validate accepts a well-formed config") {
  const json cfg = base_config("curvature", {{"chain", {{"kind", "complete"}, {"n", 2}}},
                                             {"mode", "upsilon"}});
  CHECK(cli::validate(cfg).empty());
}

TEST_CASE("validate names problems") {
  json cfg = base_config("warp-drive", json::object());
  const auto p1 = cli::validate(cfg);
  REQUIRE(p1.size() == 1);
  CHECK(p1[0].find("unknown command") != std::string::npos);

  json cfg2 = base_config("mlsi", {{"chain", {{"kind", "complete"}, {"n", 2}}}, {"samples", 200}});
  cfg2.erase("seed");
  const auto p2 = cli::validate(cfg2);
  REQUIRE(p2.size() == 1);
  CHECK(p2[0].find("seed") != std::string::npos);

  json cfg3 = base_config("relaxation", json::object());
  const auto p3 = cli::validate(cfg3);
  CHECK(p3.size() == 4);  // F, t_min, t_max, tol
}

TEST_CASE("curvature estimate on K2 reports kappa near 2") {
  const json cfg = base_config(
      "curvature", {{"chain", {{"kind", "complete"}, {"n", 2}}}, {"mode", "upsilon"}});
  const cli::RunResult r = cli::run(cfg);
  CHECK(r.exit_code == 0);
  const json rep = json::parse(r.report);
  CHECK(rep["report"]["global_kappa"].get<double>() == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(rep["config"]["seed"] == 7);  // provenance embedded
}

TEST_CASE("verification finding sets exit code 2") {
  const json cfg = base_config("curvature", {{"chain", {{"kind", "star"}, {"m", 3}}},
                                             {"mode", "verify"},
                                             {"kappa", 0.0},
                                             {"budget", {{"samples", 2000}, {"descents", 8}}}});
  const cli::RunResult r = cli::run(cfg);
  CHECK(r.exit_code == 2);
  const json rep = json::parse(r.report);
  CHECK(rep["report"]["violation_found"].get<bool>());
  CHECK(rep["report"]["witness_state"].get<int>() == 0);
}

TEST_CASE("reports are byte-identical given the seed, up to the timestamp") {
  const json cfg = base_config("mlsi", {{"chain", {{"kind", "hypercube"}, {"n", 2}}},
                                        {"samples", 200}});
  const std::string a = strip_timestamp(cli::run(cfg).report);
  const std::string b = strip_timestamp(cli::run(cfg).report);
  CHECK(a == b);
}

TEST_CASE("evolve renders csv traces") {
  json cfg = base_config("evolve", {{"chain", {{"kind", "complete"}, {"n", 2}}},
                                    {"f0", {2.0, 0.0}},
                                    {"times", {{"t0", 0.0}, {"t1", 1.0}, {"count", 5}}}});
  cfg["format"] = "csv";
  const cli::RunResult r = cli::run(cfg);
  CHECK(r.exit_code == 0);
  CHECK(r.report.rfind("t,f0,f1,H,I\n", 0) == 0);
}

TEST_CASE("relaxation command emits metadata and csv") {
  json cfg = base_config("relaxation", {{"F", {{"family", "power"}, {"nu", 2.0 / 3.0}, {"gamma", 2.0}}},
                                        {"t_min", 1e-2},
                                        {"t_max", 5.0},
                                        {"tol", 1e-6}});
  const cli::RunResult rj = cli::run(cfg);
  const json rep = json::parse(rj.report);
  CHECK(rep["report"]["family"]["family"] == "power");
  cfg["format"] = "csv";
  const cli::RunResult rc = cli::run(cfg);
  CHECK(rc.report.rfind("t,phi\n", 0) == 0);
}

TEST_CASE("frac-kernel command") {
  const json cfg = base_config("frac-kernel", {{"beta", 1.0}, {"t", 1.0}, {"X", 4.0}, {"h", 0.05}});
  const cli::RunResult r = cli::run(cfg);
  const json rep = json::parse(r.report);
  CHECK(rep["report"]["mass_defect"].get<double>() < 1e-2);
}

TEST_CASE("lattice-liyau smoke run with a fitted envelope") {
  const json cfg = base_config("lattice-liyau",
                               {{"beta", 1.0},
                                {"J", 12},
                                {"M", 52},
                                {"times", {{"t0", 0.05}, {"t1", 2.0}, {"count", 6}, {"spacing", "log"}}},
                                {"u0", {{"kind", "bump"}, {"amplitude", 0.8}, {"width", 2}}},
                                {"F", "fit"},
                                {"fit_samples", 600}});
  const cli::RunResult r = cli::run(cfg);
  CHECK(r.exit_code == 0);  // no violation expected
  const json rep = json::parse(r.report);
  CHECK(rep["report"]["violations"].get<int>() == 0);
}

TEST_CASE("malformed configs raise") {
  CHECK_THROWS(cli::run(base_config("curvature", json::object())));
  json cfg = base_config("evolve", {{"chain", {{"kind", "complete"}, {"n", 2}}},
                                    {"f0", {{"kind", "nonsense"}}},
                                    {"times", {0.0, 1.0}}});
  CHECK_THROWS(cli::run(cfg));
}

TEST_SUITE_END();
