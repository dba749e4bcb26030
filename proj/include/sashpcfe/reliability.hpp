#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sashpcfe/activesub.hpp"
#include "sashpcfe/hpcfe.hpp"
#include "sashpcfe/probspace.hpp"
#include "sashpcfe/spce.hpp"

namespace sashpcfe {

/// Performance function of the physical inputs; g < 0 is failure.
struct LimitState {
  std::string name;
  std::size_t dimension = 0;
  std::string cost_class = "cheap";
  std::function<double(std::span<const double>)> evaluate;
};

/// Wraps a limit state so every call increments `counter`.
LimitState counting(const LimitState& inner, std::shared_ptr<std::uint64_t> counter);

struct ReliabilityResult {
  std::string method;
  double pf = 0.0;
  double beta = 0.0;
  std::uint64_t n_model_evals = 0;
  std::uint64_t n_surrogate_evals = 0;
  std::optional<double> cov;  // Monte-Carlo estimators with pf > 0
  std::size_t rank = 0;       // 0 when no subspace is involved
  std::uint64_t seed = 0;
};

/// beta = Phi^-1(1 - pf); +inf for pf = 0 and -inf for pf = 1.
double reliability_index(double pf);
/// pf = Phi(-beta).
double failure_probability(double beta);
/// sqrt((1 - pf) / (n pf)); nullopt for pf = 0.
std::optional<double> mc_cov(double pf, std::size_t n);

/// Predicts g for a block of standardized points (rows in [-1, 1]^N).
using BatchPredictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

/// Indicator-mean estimator over n standardized samples drawn from the
/// seeded uniform stream (xi = 2u - 1). g = 0 counts as safe.
ReliabilityResult mcs_standardized(const BatchPredictor& predict, std::size_t dimension, std::size_t n,
                                   std::uint64_t seed, const std::string& method);

/// Direct Monte Carlo on the true limit state. Uses the same uniform stream
/// as mcs_standardized, mapped to physical space by the inverse CDFs.
ReliabilityResult mcs_probability(const LimitState& limit_state, const ProbabilisticModel& model, std::size_t n,
                                  std::uint64_t seed);

struct PipelineConfig {
  std::size_t n_train = 800;  // N_s
  LarOptions lar;
  double mu = 0.98;
  std::size_t n_grad = 0;  // N_s1; 0 means 10 N
  HpcfeConfig hpcfe;
  std::size_t n_mcs = 100000;
  std::uint64_t seed = 20240601;
  std::size_t scatter_points = 5000;

  void validate() const;
  std::size_t gradient_samples(std::size_t dimension) const;
};

struct PipelineArtifacts {
  std::optional<SparsePceModel> spce;
  std::optional<ActiveSubspace> subspace;
  std::optional<HpcfeModel> hpcfe;
  /// First scatter_points MCS samples: reduced coordinates and the
  /// surrogate's failure label (1 failure, 0 safe).
  Eigen::MatrixXd scatter_z;
  std::vector<int> scatter_label;
  std::uint64_t fd_cost = 0;
  std::vector<std::string> warnings;
};

struct PipelineOutput {
  ReliabilityResult result;
  PipelineArtifacts artifacts;
};

/// Training design: n Sobol points mapped to physical space and evaluated
/// on the true limit state.
struct TrainingSet {
  Eigen::MatrixXd xi;  // standardized [-1, 1]^N
  Eigen::MatrixXd x;   // physical
  Eigen::VectorXd y;
};
TrainingSet training_design(const LimitState& limit_state, const ProbabilisticModel& model, std::size_t n);

/// S-PCE, active subspace from surrogate gradients, H-PCFE on the reduced
/// training set, surrogate Monte Carlo.
PipelineOutput sas_hpcfe_pipeline(const LimitState& limit_state, const ProbabilisticModel& model,
                                  const PipelineConfig& config);

/// S-PCE fit followed by Monte Carlo on the S-PCE prediction.
PipelineOutput spce_only_pipeline(const LimitState& limit_state, const ProbabilisticModel& model,
                                  const PipelineConfig& config);

struct ConvergenceRow {
  std::size_t n_train = 0;
  double beta = 0.0;
  bool converged = false;  // |beta_i - beta_{i-1}| / |beta_{i-1}| < 1%
};

/// Runs `run(n_train)` over the schedule and flags rows whose beta moved by
/// less than 1% relative to the previous row.
std::vector<ConvergenceRow> convergence_study(const std::function<ReliabilityResult(std::size_t)>& run,
                                              const std::vector<std::size_t>& schedule);

/// Doubling schedule start, 2 start, ... up to and including `stop`.
std::vector<std::size_t> doubling_schedule(std::size_t start, std::size_t stop);

}  // namespace sashpcfe
