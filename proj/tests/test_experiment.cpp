#include <doctest.h>

#include <fstream>
#include <sstream>

#include "opseq/experiment.hpp"

using namespace opseq;
using io::json;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("opseq_exp_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& stem, const std::string& body) {
  const auto p = dir / (stem + ".json");
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string schema_pointer(const std::string& config) {
  try {
    (void)prepare_experiment(json::parse(config));
  } catch (const io::SchemaError& e) {
    return e.pointer();
  }
  return "<no error>";
}

const char* kGap = R"({"kind": "gap_check", "params": {"K": {"type": "rank_one", "x": {"basis": 0}, "y": {"basis": 0}},
  "T0": {"type": "identity", "scale": -0.5}}, "expect": {"/ratio": {"value": 0.5, "tol": 1e-12}}})";

} // namespace

TEST_CASE("every kind names a statement") {
  CHECK(experiment_kinds().size() == 13);
  for (const auto& k : experiment_kinds()) CHECK_FALSE(statement_for(k).empty());
  CHECK_THROWS_AS(statement_for("nope"), InvalidInput);
}

TEST_CASE("schema errors carry JSON pointers") {
  CHECK(schema_pointer(R"([])") == "");
  CHECK(schema_pointer(R"({})") == "/kind");
  CHECK(schema_pointer(R"({"kind": "nope"})") == "/kind");
  CHECK(schema_pointer(R"({"kind": "nehari", "params": {}})") == "/params/symbol");
  CHECK(schema_pointer(R"({"kind": "nehari", "params": {"symbol": {"coeffs": [[-1, 1]]}, "N": 0}})") == "/params/N");
  CHECK(schema_pointer(R"({"kind": "toeplitz_asymptotics", "params": {"symbol": {"coeffs": [[0, 1]]}, "tol": -1}})") ==
        "/params/tol");
  CHECK(schema_pointer(R"({"kind": "gap_check", "params": {"K": {"type": "shift"}, "T0": {"type": "x"}}})") ==
        "/params/T0/type");
  CHECK(schema_pointer(R"({"kind": "nehari", "params": {"symbol": {"coeffs": [[-1, 1]]}}, "formats": ["pdf"]})") ==
        "/formats/0");
  CHECK(schema_pointer(R"({"kind": "nehari", "params": {"symbol": {"coeffs": [[-1, 1]]}}, "expect": {"/d": {"tol": 1}}})") ==
        "/expect/~1d/value");
  CHECK(schema_pointer(R"({"kind": "composition_dichotomy", "params": {"symbol": {"coeffs": [[-1, 1]]}}})") ==
        "/params/symbol");
}

TEST_CASE("defaults are echoed") {
  const auto p = prepare_experiment(json::parse(R"({"kind": "nehari", "params": {"symbol": {"coeffs": [[-1, 1]]}}})"));
  CHECK(p.params["N"] == Defaults::n);
  CHECK(p.params["seed"] == Defaults::seed);
  const auto t = prepare_experiment(
      json::parse(R"({"kind": "toeplitz_asymptotics", "params": {"symbol": {"coeffs": [[0, 1]]}, "N": 8}})"));
  CHECK(t.params["n_max"] == Defaults::n_max);
  CHECK(t.params["tol"] == Defaults::tol);
}

TEST_CASE("check_expect") {
  const json r = json::parse(R"({"a": 1.0, "b": {"c": [0.5, 0.25]}, "s": "converged"})");
  CHECK(check_expect(r, json::parse(R"({"/a": 1.0, "/s": "converged"})")).empty());
  CHECK(check_expect(r, json::parse(R"({"/b/c": {"value": [0.5, 0.2500001], "tol": 1e-6}})")).empty());
  CHECK(check_expect(r, json::parse(R"({"/a": 1.1})")).size() == 1);
  CHECK(check_expect(r, json::parse(R"({"/zz": 1})")).size() == 1);
  CHECK(check_expect(r, json::parse(R"({"/s": "non_convergent"})")).size() == 1);
}

TEST_CASE("run: exit codes and artifacts") {
  const auto dir = scratch("codes");
  SUBCASE("pass") {
    const auto out = run_config_file(write_config(dir, "gap", kGap), dir / "out");
    CHECK(out.code == ExitCode::pass);
    const auto report = json::parse(slurp(dir / "out" / "gap.report.json"));
    CHECK(report["kind"] == "gap_check");
    CHECK(report["result"]["ratio"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(report["expect"]["passed"] == true);
    CHECK_FALSE(report["statement"].get<std::string>().empty());
    CHECK(report["params"]["dim"] == 16);
  }
  SUBCASE("mismatch") {
    std::string body = kGap;
    body.replace(body.find("0.5, \"tol\""), 3, "0.7");
    CHECK(run_config_file(write_config(dir, "gap", body), dir / "out").code == ExitCode::mismatch);
  }
  SUBCASE("input error") {
    CHECK(run_config_file(write_config(dir, "bad", "{not json"), dir / "out").code == ExitCode::input_error);
    CHECK(run_config_file(write_config(dir, "bad", R"({"kind": "x"})"), dir / "out").code == ExitCode::input_error);
    CHECK(run_config_file(dir / "missing.json", dir / "out").code == ExitCode::input_error);
    CHECK(validate_config_file(write_config(dir, "bad", R"({"kind": "x"})")).code == ExitCode::input_error);
    CHECK(validate_config_file(write_config(dir, "gap", kGap)).code == ExitCode::pass);
  }
  SUBCASE("format selection") {
    const auto cfg = write_config(dir, "n", R"({"kind": "hsc_distance", "formats": ["csv"],
      "params": {"symbol": {"coeffs": [[-1, 1]]}, "N": 8, "n_max": 3}})");
    const auto out = run_config_file(cfg, dir / "out");
    CHECK(out.code == ExitCode::pass);
    CHECK(fs::exists(dir / "out" / "n.distance.csv"));
    CHECK_FALSE(fs::exists(dir / "out" / "n.report.json"));
    CHECK_FALSE(fs::exists(dir / "out" / "n.dat"));
    const auto csv = slurp(dir / "out" / "n.distance.csv");
    CHECK(csv.rfind("n,dist,violation\n0,", 0) == 0);
    CHECK(csv.find("\n1,0,0\n") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("determinism: identical configs give identical bytes") {
  const auto dir = scratch("det");
  const std::string body = R"({"kind": "composition_dichotomy", "params": {"symbol": {"coeffs": [[1, 0.5], [2, 0.25]]},
    "N": 24, "n_max": 24}})";
  const auto cfg = write_config(dir, "c", body);
  const auto a = run_config_file(cfg, dir / "a");
  const auto b = run_config_file(cfg, dir / "b");
  REQUIRE(a.code == ExitCode::pass);
  REQUIRE(a.written.size() == 3);
  for (const auto& p : a.written) CHECK(slurp(p) == slurp(dir / "b" / p.filename()));
  fs::remove_all(dir);
}
