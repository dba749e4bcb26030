#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace sashpcfe {

using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Monte-Carlo estimate of the average outer product of gradients,
/// C = (1/n) sum_j grad_j grad_j^T, over the rows of `samples`.
Eigen::MatrixXd estimate_c(const GradientFn& gradient, const Eigen::MatrixXd& samples);

struct EigenPairs {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns; largest-magnitude component positive
};

/// Symmetric eigendecomposition C = W diag(values) W^T.
EigenPairs eigendecompose(const Eigen::MatrixXd& c);

/// Smallest r such that the leading r eigenvalues carry at least a fraction
/// `mu` of the total.
std::size_t choose_rank(const Eigen::VectorXd& eigenvalues, double mu);

struct ActiveSubspace {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd w1;  // N x r, orthonormal columns
  std::size_t rank = 0;
  double mu = 0.0;
  std::size_t n_grad_samples = 0;

  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  /// Projects every row of `x` (n x N -> n x r).
  Eigen::MatrixXd project_rows(const Eigen::MatrixXd& x) const;
};

ActiveSubspace build_active_subspace(const Eigen::MatrixXd& c, double mu, std::size_t n_grad_samples);

/// z = W1^T x.
Eigen::VectorXd project(const Eigen::MatrixXd& w1, const Eigen::VectorXd& x);

/// True-model evaluations needed by a forward-difference active subspace:
/// N_s1 (N + 1).
std::uint64_t fd_cost(std::uint64_t dimension, std::uint64_t n_samples);

}  // namespace sashpcfe
