#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sashpcfe/polybasis.hpp"

namespace sashpcfe {

struct LarOptions {
  /// Maximum total degree of the candidate basis.
  unsigned p_max = 5;
  /// Maximum number of interacting variables per candidate term. 0 picks the
  /// largest order whose candidate set stays within `candidate_limit`.
  std::size_t max_interaction = 0;
  std::size_t candidate_limit = 50000;
  /// Stop the path once the corrected LOO error has not improved for
  /// `early_stop_window` steps (0: max(20, path length / 10)).
  bool early_stop = true;
  std::size_t early_stop_window = 0;
  /// Keep the LAR coefficient vector of every path step (diagnostics).
  bool record_path = false;
};

/// Sparse expansion y = intercept + sum_beta a_beta psi_beta(xi) in the
/// standardized [-1, 1]^N space.
struct SparsePceModel {
  std::size_t dimension = 0;
  unsigned p_max = 0;
  double intercept = 0.0;
  BasisSet basis;  // active non-constant terms, canonical order
  Eigen::VectorXd coefficients;
  double loo_error = 0.0;
  std::vector<std::string> warnings;

  double predict(std::span<const double> xi) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& xi) const;
  /// Gradient with respect to the standardized coordinates.
  Eigen::VectorXd gradient(std::span<const double> xi) const;
};

struct LooScore {
  double raw = 0.0;        // mean squared LOO residual / Var(y)
  double corrected = 0.0;  // raw times the finite-sample correction factor
  bool reliable = true;    // false when some hat diagonal reaches 1
};

/// Leave-one-out error of the least-squares fit of `y` on the columns of
/// `regressors` (include a column of ones for an intercept), computed from
/// the hat-matrix diagonal without refitting. The correction factor is
/// n/(n-P) * (1 + tr((Psi^T Psi / n)^-1) / n).
LooScore loo_error(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& y);

struct LarStep {
  std::size_t entered = 0;  // candidate index (into LarPath::candidates)
  bool dropped = false;     // collinear with the active set, not entered
  double max_active_corr = 0.0;
  double min_active_corr = 0.0;
  double max_inactive_corr = 0.0;
  double loo = 0.0;  // corrected LOO of the OLS refit on the active set
  /// Standardized LAR coefficients (candidate index, value) after this step.
  std::vector<std::pair<std::size_t, double>> lar_coefficients;
};

struct LarPath {
  BasisSet candidates;  // non-constant candidate terms
  std::vector<LarStep> steps;
  std::vector<std::size_t> active;  // entered candidates in path order
  std::size_t best_size = 0;        // number of active terms in the selected model
  double best_loo = 0.0;
  std::vector<std::string> warnings;
};

/// Candidate set used by fit_lar for the given dimension and options.
BasisSet lar_candidates(std::size_t dimension, const LarOptions& options);

/// Runs least angle regression on centered, unit-norm candidate columns and
/// scores every path model by the corrected LOO error of its OLS refit.
LarPath lar_path(const Eigen::MatrixXd& xi, const Eigen::VectorXd& y, const LarOptions& options);

/// Sparse PCE by hybrid LAR: the path model with the smallest corrected LOO
/// error, with coefficients refit by ordinary least squares.
SparsePceModel fit_lar(const Eigen::MatrixXd& xi, const Eigen::VectorXd& y,
                       const LarOptions& options = {});

}  // namespace sashpcfe
