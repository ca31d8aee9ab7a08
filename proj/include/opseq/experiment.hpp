#pragma once

///
/// \file experiment.hpp
///
/// Declarative experiments.  A config is one JSON document
///
///   {"kind": "...", "params": {...}, "output_dir": "...", "formats": [...],
///    "expect": {"/json/pointer": value | {"value": v, "tol": t}}}
///
/// Pointers in `expect` address the "result" object of the report.
///

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "opseq/io.hpp"

namespace opseq {

struct Artifact {
  std::string suffix; ///< appended to the config stem, e.g. ".trace.csv"
  std::string content;
};

struct ExperimentOutput {
  io::json report;
  std::vector<Artifact> artifacts;
};

struct Defaults {
  static constexpr int n = 256;
  static constexpr int n_max = 64;
  static constexpr double tol = 1e-6;
  static constexpr unsigned long long seed = 0x5EED;
  static constexpr int window = 8;
};

const std::vector<std::string>& experiment_kinds();
/// Named result a kind exercises.
std::string statement_for(const std::string& kind);

/// Schema-checked experiment, ready to run.
struct PreparedExperiment {
  std::string kind;
  io::json params; ///< every parameter actually used, defaults filled in
  std::function<ExperimentOutput()> run;
};

/// Throws io::SchemaError with a JSON pointer on invalid input.
PreparedExperiment prepare_experiment(const io::json& config);

/// Mismatch descriptions, empty when every expectation holds.
std::vector<std::string> check_expect(const io::json& result, const io::json& expect);

enum class ExitCode { pass = 0, input_error = 1, mismatch = 2 };

struct RunOutcome {
  ExitCode code = ExitCode::pass;
  std::string message;
  std::vector<std::filesystem::path> written;
};

/// Loads, runs and writes one config.  `out_dir` overrides the config's
/// output_dir; with neither, files go next to the config.
RunOutcome run_config_file(const std::filesystem::path& path, const std::optional<std::filesystem::path>& out_dir);

/// Loads and schema-checks one config without running it.
RunOutcome validate_config_file(const std::filesystem::path& path);

} // namespace opseq
