#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sashpcfe/polybasis.hpp"

namespace sashpcfe {

struct HpcfeConfig {
  /// Highest interaction order of the component functions (M).
  unsigned max_order = 2;
  /// Largest univariate Legendre degree inside a component function (b).
  unsigned basis_degree = 3;
  /// Diagonal jitter added to the unit-diagonal correlation matrix.
  double nugget = 1e-8;
  double theta_lo = 1e-2;
  double theta_hi = 1e2;
  std::size_t restarts = 8;
  /// Objective evaluations allowed per Nelder-Mead start.
  std::size_t max_evaluations = 100;
  /// Homotopy weight matrix; empty means identity.
  Eigen::MatrixXd weight;

  void validate() const;
};

/// Per-dimension affine map of reduced coordinates onto [-1, 1], built from
/// the training range widened by a relative margin on each side.
struct ReducedScaling {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static ReducedScaling from_training(const Eigen::MatrixXd& z, double margin = 0.05);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& z) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& z) const;
  bool contains(const Eigen::VectorXd& z) const;
};

/// Extended bases of every component function up to order M, concatenated
/// component by component and before redundancy removal. A component over
/// the variable set u contributes every product of univariate terms of
/// degree 1..b supported on a non-empty subset of u.
std::vector<MultiIndex> pcfe_extended_bases(std::size_t dimension, unsigned max_order, unsigned degree);

/// Extended bases with redundant (identical) terms removed, canonical order.
BasisSet pcfe_basis(std::size_t dimension, unsigned max_order, unsigned degree);

struct DesignMatrix {
  Eigen::MatrixXd psi;  // rows x q'
  BasisSet basis;
};

/// PCFE trend design matrix of already-scaled reduced inputs. The constant
/// term is excluded (it is carried by g0).
DesignMatrix build_design_matrix(const Eigen::MatrixXd& z_scaled, const HpcfeConfig& config);

/// R_ij = exp(-sum_k theta_k (z_ik - z_jk)^2) + nugget * [i == j].
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& z, const Eigen::VectorXd& theta, double nugget);

struct CorrelationFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double nugget = 0.0;  // jitter actually used
};

/// Cholesky factor of the correlation matrix; on failure the nugget is
/// multiplied by 10 up to three times before a NumericalError is raised.
CorrelationFactor factor_correlation(const Eigen::MatrixXd& z, const Eigen::VectorXd& theta,
                                     double nugget);

/// Moore-Penrose pseudo-inverse; singular values below rtol * max are
/// treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rtol = 1e-10);

struct HomotopyResult {
  Eigen::VectorXd alpha;   // homotopy solution
  Eigen::VectorXd alpha0;  // minimum-norm solution A'^+ B'
  std::size_t weighted_rank = 0;  // numerical rank of P W
  bool fallback = false;          // (U^T V) block singular, alpha = alpha0
};

/// Solves A' alpha = B' for a possibly singular A'. Starting from the
/// minimum-norm solution alpha0 it applies
///   alpha = V2 (U2^T V2)^-1 U2^T alpha0
/// where U2, V2 are the trailing singular vectors of P W with
/// P = I - A'^+ A' the null-space projector. `weight` empty means identity.
HomotopyResult homotopy_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const Eigen::MatrixXd& weight = {});

/// Concentrated log-likelihood -(n/2) ln sigma^2 - (1/2) ln det R of the
/// hybrid model at length scales `theta`. Returns -inf when R cannot be
/// factored.
double profile_log_likelihood(const Eigen::MatrixXd& z_scaled, const Eigen::VectorXd& d,
                              const Eigen::MatrixXd& psi, const Eigen::VectorXd& theta,
                              const HpcfeConfig& config);

/// Multi-start points for the length-scale search (Sobol-spread in log space).
std::vector<Eigen::VectorXd> theta_starts(std::size_t dimension, const HpcfeConfig& config);

/// Persisted state of a fitted hybrid model.
struct HpcfeState {
  double g0 = 0.0;
  BasisSet basis;
  Eigen::VectorXd alpha;
  Eigen::VectorXd theta;
  double sigma2 = 0.0;
  double nugget = 0.0;
  Eigen::MatrixXd z_train;  // scaled reduced coordinates
  Eigen::VectorXd d;        // y - g0
  ReducedScaling scaling;
  double log_likelihood = 0.0;
  std::vector<std::string> warnings;
};

/// PCFE trend plus zero-mean Gaussian-process residual.
class HpcfeModel {
 public:
  explicit HpcfeModel(HpcfeState state);

  const HpcfeState& state() const { return state_; }
  std::size_t dimension() const { return static_cast<std::size_t>(state_.z_train.cols()); }

  /// Inputs are reduced coordinates before scaling.
  double predict_mean(const Eigen::VectorXd& z) const;
  Eigen::VectorXd predict_mean(const Eigen::MatrixXd& z) const;
  double predict_variance(const Eigen::VectorXd& z) const;
  /// Trend part g0 + Phi(z) alpha only.
  double trend(const Eigen::VectorXd& z) const;

 private:
  Eigen::VectorXd cross_correlation(const Eigen::VectorXd& z_scaled) const;

  HpcfeState state_;
  Eigen::MatrixXd psi_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd weights_;     // R^-1 (d - Psi alpha)
  Eigen::MatrixXd gls_pinv_;    // (Psi^T R^-1 Psi)^+
  unsigned max_degree_ = 0;
};

HpcfeModel fit_hpcfe(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const HpcfeConfig& config = {});

}  // namespace sashpcfe
