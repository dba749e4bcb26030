#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sashpcfe/error.hpp"
#include "sashpcfe/study.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

int run(const std::string& config_path, const std::optional<std::string>& out,
        const std::optional<std::uint64_t>& seed, bool no_truncation) {
  try {
    sashpcfe::StudyConfig config = sashpcfe::load_study_config(config_path);
    if (out) config.output_dir = *out;
    if (seed) config.seed = *seed;
    if (no_truncation) config.truncation = false;
    sashpcfe::run_study(config, std::cerr);
    std::cerr << "results written to " << config.output_dir << '\n';
    return 0;
  } catch (const sashpcfe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const sashpcfe::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const sashpcfe::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse active subspace reliability analysis with H-PCFE surrogates"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool no_truncation = false;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a study config");
  run_cmd->add_option("--config", config_path, "Study config (JSON)")->required();
  run_cmd->add_option("--out", out, "Output directory (overrides the config)");
  run_cmd->add_option("--seed", seed, "Monte Carlo seed (overrides the config)");
  run_cmd->add_flag("--no-truncation", no_truncation, "Sample the untruncated marginals");

  std::string report_dir;
  CLI::App* report_cmd = app.add_subcommand("report", "Summarise a results directory");
  report_cmd->add_option("dir", report_dir, "Directory written by run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  if (run_cmd->parsed()) return run(config_path, out, seed, no_truncation);
  return sashpcfe::report_study(report_dir, std::cout, std::cerr);
}
