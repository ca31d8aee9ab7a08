#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "opseq/experiment.hpp"

namespace fs = std::filesystem;
using opseq::ExitCode;
using opseq::RunOutcome;

namespace {

// Runs every config on a small worker pool; outcomes keep input order.
std::vector<RunOutcome> run_all(const std::vector<fs::path>& configs, const std::optional<fs::path>& out, unsigned jobs) {
  std::vector<RunOutcome> outcomes(configs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) outcomes[i] = opseq::run_config_file(configs[i], out);
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return outcomes;
}

int report(const std::vector<RunOutcome>& outcomes) {
  int code = 0;
  std::size_t passed = 0;
  for (const auto& o : outcomes) {
    (o.code == ExitCode::pass ? std::cout : std::cerr) << o.message << "\n";
    if (o.code == ExitCode::pass) ++passed;
    code = std::max(code, static_cast<int>(o.code));
  }
  if (outcomes.size() > 1) std::cout << passed << "/" << outcomes.size() << " configs passed\n";
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator sequence experiments"};
  app.require_subcommand(1);

  std::vector<std::string> run_configs;
  std::string out_dir;
  unsigned jobs = 1;
  auto* run = app.add_subcommand("run", "Run experiment configs and write reports");
  run->add_option("configs", run_configs, "Config files")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory, overrides output_dir");
  run->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Schema-check a config without running it");
  validate->add_option("config", validate_config, "Config file")->required()->check(CLI::ExistingFile);

  std::string suite_dir;
  unsigned suite_jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string suite_out;
  auto* suite = app.add_subcommand("suite", "Run every *.json config in a directory");
  suite->add_option("dir", suite_dir, "Config directory")->required()->check(CLI::ExistingDirectory);
  suite->add_option("--out", suite_out, "Output directory, overrides output_dir");
  suite->add_option("--jobs", suite_jobs, "Parallel workers")->check(CLI::PositiveNumber);

  auto* kinds = app.add_subcommand("kinds", "List experiment kinds and the statement each exercises");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::input_error);
  }

  const auto opt_dir = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };

  if (*run) {
    const std::vector<fs::path> paths(run_configs.begin(), run_configs.end());
    return report(run_all(paths, opt_dir(out_dir), jobs));
  }
  if (*validate) {
    const auto o = opseq::validate_config_file(validate_config);
    (o.code == ExitCode::pass ? std::cout : std::cerr) << o.message << "\n";
    return static_cast<int>(o.code);
  }
  if (*suite) {
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(suite_dir))
      if (e.is_regular_file() && e.path().extension() == ".json" &&
          e.path().filename().string().find(".report.") == std::string::npos)
        paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) {
      std::cerr << suite_dir << ": no configs found\n";
      return static_cast<int>(ExitCode::input_error);
    }
    return report(run_all(paths, opt_dir(suite_out), suite_jobs));
  }
  if (*kinds) {
    for (const auto& k : opseq::experiment_kinds()) std::cout << k << "\t" << opseq::statement_for(k) << "\n";
    return 0;
  }
  return 0;
}
