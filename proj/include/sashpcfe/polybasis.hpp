#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sashpcfe {

/// Orthonormal Legendre polynomial psi_k(t) = sqrt(2k+1) P_k(t), orthonormal
/// with respect to the uniform density 1/2 on [-1, 1].
double legendre_eval(unsigned k, double t);

/// Writes psi_0(t)..psi_p(t) into `values` and, if non-empty, the
/// derivatives into `derivatives`. Both spans must hold p + 1 entries.
void legendre_values(unsigned p, double t, std::span<double> values,
                     std::span<double> derivatives = {});

/// One nonzero exponent of a multi-index.
struct Factor {
  std::uint32_t var;
  std::uint32_t degree;

  friend bool operator==(const Factor&, const Factor&) = default;
};

/// Exponent vector stored sparsely as (variable, degree) pairs sorted by
/// variable. The empty multi-index is the constant term.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<Factor> factors);
  static MultiIndex from_dense(std::span<const unsigned> exponents);

  std::span<const Factor> factors() const { return factors_; }
  unsigned total_degree() const { return total_degree_; }
  std::size_t support_size() const { return factors_.size(); }
  unsigned exponent(std::size_t var) const;
  /// Largest variable index referenced plus one (0 for the constant).
  std::size_t min_dimension() const;
  std::vector<unsigned> dense(std::size_t dimension) const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.factors_ == b.factors_;
  }

 private:
  std::vector<Factor> factors_;
  unsigned total_degree_ = 0;
};

/// Canonical graded ordering: total degree ascending, then exponent vectors
/// in descending lexicographic order (x1 before x2, x1^2 before x1 x2).
bool canonical_less(const MultiIndex& a, const MultiIndex& b);

/// Number of multi-indices in N variables with total degree <= p and at most
/// `max_interaction` nonzero exponents.
std::uint64_t total_degree_cardinality(std::size_t dimension, unsigned p,
                                       std::size_t max_interaction =
                                           std::numeric_limits<std::size_t>::max());

/// Ordered, duplicate-free list of multi-indices over a fixed dimension.
class BasisSet {
 public:
  BasisSet() = default;
  /// Takes ownership of `indices` and sorts them canonically. Throws on
  /// duplicates or on indices referencing variables >= dimension.
  BasisSet(std::size_t dimension, std::vector<MultiIndex> indices);

  /// Total-degree set in canonical order; index 0 is the constant term.
  static BasisSet total_degree(std::size_t dimension, unsigned p,
                               std::size_t max_interaction =
                                   std::numeric_limits<std::size_t>::max());

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  unsigned max_degree() const;
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  std::span<const MultiIndex> indices() const { return indices_; }

 private:
  std::size_t dimension_ = 0;
  std::vector<MultiIndex> indices_;
};

/// Table of univariate values psi_k(xi_i) for one point, laid out
/// dimension-major with stride p + 1.
class UnivariateTable {
 public:
  UnivariateTable(std::span<const double> xi, unsigned p, bool with_derivatives);

  double value(std::size_t var, unsigned degree) const { return values_[var * stride_ + degree]; }
  double derivative(std::size_t var, unsigned degree) const {
    return derivatives_[var * stride_ + degree];
  }

 private:
  std::size_t stride_;
  std::vector<double> values_;
  std::vector<double> derivatives_;
};

/// psi_beta(xi) for every beta in the basis.
Eigen::VectorXd eval_multibasis(std::span<const double> xi, const BasisSet& basis);

/// card x N matrix of partial derivatives d psi_beta / d xi_i.
Eigen::MatrixXd eval_multibasis_grad(std::span<const double> xi, const BasisSet& basis);

/// Rows of `points` evaluated on the basis (rows x card).
Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& points, const BasisSet& basis);

}  // namespace sashpcfe
