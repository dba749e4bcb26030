#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sashpcfe/benchmarks.hpp"
#include "sashpcfe/reliability.hpp"

namespace sashpcfe {

/// Line numbers of every value in a JSON document, keyed by JSON pointer.
class JsonLineMap {
 public:
  /// `text` must already be valid JSON.
  explicit JsonLineMap(const std::string& text);
  /// Line of `pointer`, falling back to its closest recorded ancestor.
  int line(const std::string& pointer) const;

 private:
  std::map<std::string, int> lines_;
};

struct StudyConfig {
  std::string source;  // config path used in messages
  std::string benchmark;
  std::string plugin;         // shared library exporting sashpcfe_limit_state
  std::string model_file;     // probabilistic model JSON
  std::string geometry_file;  // truss geometry JSON (truss-25 only)
  std::vector<std::string> methods;  // canonical order: mcs, spce, sas-hpcfe
  std::size_t mcs_samples = 100000;
  PipelineConfig spce;
  PipelineConfig sas;
  std::uint64_t seed = 20240601;
  std::string output_dir = "results";
  bool truncation = false;
};

/// Parses and validates a study config. Relative paths resolve against
/// `base_dir`. Throws ConfigError as "<source>:<line>: <message>".
StudyConfig parse_study_config(const std::string& text, const std::string& source, const std::string& base_dir);
StudyConfig load_study_config(const std::string& path);

/// Model and limit state selected by a config (benchmark, overrides or plugin).
struct StudyProblem {
  std::string name;
  ProbabilisticModel model;
  LimitState limit_state;
};
StudyProblem resolve_problem(const StudyConfig& config);

struct StudyRow {
  ReliabilityResult result;
  std::optional<double> error_pct;  // |beta_mcs - beta| / beta_mcs * 100
};

/// Runs every requested method and writes results.csv, eigenvalues.csv,
/// reduced_scatter.csv, model JSON files and summary.json into the output
/// directory. results.csv is rewritten after each method so a numerical
/// failure leaves the completed rows in place.
std::vector<StudyRow> run_study(const StudyConfig& config, std::ostream& log);

std::string results_csv(const std::vector<StudyRow>& rows);

/// Prints the results table of `dir`, rows sorted by method. Returns 0, or 2
/// when the directory does not exist.
int report_study(const std::string& dir, std::ostream& out, std::ostream& err);

}  // namespace sashpcfe
