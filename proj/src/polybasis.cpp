#include "sashpcfe/polybasis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sashpcfe/error.hpp"

namespace sashpcfe {

namespace {

constexpr double kDomainSlack = 1e-12;

void check_domain(double t) {
  if (!(std::abs(t) <= 1.0 + kDomainSlack)) {
    std::ostringstream msg;
    msg << "Legendre argument " << t << " outside [-1, 1]";
    throw DomainError(msg.str());
  }
}

}  // namespace

void legendre_values(unsigned p, double t, std::span<double> values,
                     std::span<double> derivatives) {
  check_domain(t);
  if (values.size() < p + 1) throw DimensionMismatch("legendre_values buffer too small");
  const bool want_d = !derivatives.empty();
  if (want_d && derivatives.size() < p + 1) {
    throw DimensionMismatch("legendre_values derivative buffer too small");
  }
  // Standard Legendre P_n and P'_n by the three-term recurrences, then scale.
  double p_prev = 1.0;
  double p_cur = t;
  double d_cur = 1.0;
  values[0] = 1.0;
  if (want_d) derivatives[0] = 0.0;
  if (p == 0) return;
  values[1] = std::sqrt(3.0) * t;
  if (want_d) derivatives[1] = std::sqrt(3.0);
  for (unsigned n = 1; n < p; ++n) {
    const double p_next = ((2.0 * n + 1.0) * t * p_cur - n * p_prev) / (n + 1.0);
    const double d_next = (n + 1.0) * p_cur + t * d_cur;
    p_prev = p_cur;
    p_cur = p_next;
    d_cur = d_next;
    const double scale = std::sqrt(2.0 * (n + 1) + 1.0);
    values[n + 1] = scale * p_cur;
    if (want_d) derivatives[n + 1] = scale * d_cur;
  }
}

double legendre_eval(unsigned k, double t) {
  std::vector<double> values(k + 1);
  legendre_values(k, t, values);
  return values[k];
}

MultiIndex::MultiIndex(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::sort(factors_.begin(), factors_.end(),
            [](const Factor& a, const Factor& b) { return a.var < b.var; });
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].degree == 0) throw ParameterDomainError("multi-index factor with degree 0");
    if (i > 0 && factors_[i].var == factors_[i - 1].var) {
      throw ParameterDomainError("multi-index references a variable twice");
    }
    total_degree_ += factors_[i].degree;
  }
}

MultiIndex MultiIndex::from_dense(std::span<const unsigned> exponents) {
  std::vector<Factor> factors;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] > 0) {
      factors.push_back({static_cast<std::uint32_t>(i), exponents[i]});
    }
  }
  return MultiIndex(std::move(factors));
}

unsigned MultiIndex::exponent(std::size_t var) const {
  for (const Factor& f : factors_) {
    if (f.var == var) return f.degree;
  }
  return 0;
}

std::size_t MultiIndex::min_dimension() const {
  return factors_.empty() ? 0 : factors_.back().var + 1;
}

std::vector<unsigned> MultiIndex::dense(std::size_t dimension) const {
  std::vector<unsigned> out(dimension, 0);
  for (const Factor& f : factors_) {
    if (f.var >= dimension) throw DimensionMismatch("multi-index exceeds requested dimension");
    out[f.var] = f.degree;
  }
  return out;
}

bool canonical_less(const MultiIndex& a, const MultiIndex& b) {
  if (a.total_degree() != b.total_degree()) return a.total_degree() < b.total_degree();
  // Descending lexicographic comparison of the dense exponent vectors: the
  // first variable where the exponents differ decides, larger exponent first.
  const auto fa = a.factors();
  const auto fb = b.factors();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < fa.size() || j < fb.size()) {
    const std::size_t va = i < fa.size() ? fa[i].var : std::numeric_limits<std::size_t>::max();
    const std::size_t vb = j < fb.size() ? fb[j].var : std::numeric_limits<std::size_t>::max();
    if (va == vb) {
      if (fa[i].degree != fb[j].degree) return fa[i].degree > fb[j].degree;
      ++i;
      ++j;
    } else {
      // The side with the smaller variable index has a positive exponent there.
      return va < vb;
    }
  }
  return false;
}

std::uint64_t total_degree_cardinality(std::size_t dimension, unsigned p,
                                       std::size_t max_interaction) {
  // sum_k C(N, k) C(p, k); with no interaction cap this is C(N + p, p).
  auto binom = [](std::uint64_t n, std::uint64_t k) -> std::uint64_t {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  const std::size_t kmax = std::min<std::size_t>({dimension, p, max_interaction});
  std::uint64_t total = 0;
  for (std::size_t k = 0; k <= kmax; ++k) total += binom(dimension, k) * binom(p, k);
  return total;
}

BasisSet::BasisSet(std::size_t dimension, std::vector<MultiIndex> indices)
    : dimension_(dimension), indices_(std::move(indices)) {
  for (const MultiIndex& m : indices_) {
    if (m.min_dimension() > dimension) {
      throw DimensionMismatch("basis multi-index references a variable beyond the dimension");
    }
  }
  std::sort(indices_.begin(), indices_.end(), canonical_less);
  for (std::size_t i = 1; i < indices_.size(); ++i) {
    if (indices_[i] == indices_[i - 1]) throw ParameterDomainError("duplicate multi-index in basis");
  }
}

namespace {

// Appends every multi-index supported on a k-subset of variables (chosen in
// increasing order starting at `first`) with total degree <= budget.
void enumerate_support(std::size_t dimension, std::size_t first, unsigned budget,
                       std::size_t slots_left, std::vector<Factor>& current,
                       std::vector<MultiIndex>& out) {
  if (!current.empty()) out.emplace_back(current);
  if (slots_left == 0 || budget == 0) return;
  for (std::size_t var = first; var < dimension; ++var) {
    for (unsigned deg = 1; deg <= budget; ++deg) {
      current.push_back({static_cast<std::uint32_t>(var), deg});
      enumerate_support(dimension, var + 1, budget - deg, slots_left - 1, current, out);
      current.pop_back();
    }
  }
}

}  // namespace

BasisSet BasisSet::total_degree(std::size_t dimension, unsigned p, std::size_t max_interaction) {
  if (dimension == 0) throw ParameterDomainError("basis dimension must be >= 1");
  std::vector<MultiIndex> indices;
  indices.reserve(total_degree_cardinality(dimension, p, max_interaction));
  indices.emplace_back();
  std::vector<Factor> current;
  enumerate_support(dimension, 0, p, max_interaction, current, indices);
  return BasisSet(dimension, std::move(indices));
}

unsigned BasisSet::max_degree() const {
  unsigned p = 0;
  for (const MultiIndex& m : indices_) {
    for (const Factor& f : m.factors()) p = std::max(p, f.degree);
  }
  return p;
}

UnivariateTable::UnivariateTable(std::span<const double> xi, unsigned p, bool with_derivatives)
    : stride_(p + 1), values_(xi.size() * stride_) {
  if (with_derivatives) derivatives_.resize(values_.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    std::span<double> v(values_.data() + i * stride_, stride_);
    std::span<double> d;
    if (with_derivatives) d = std::span<double>(derivatives_.data() + i * stride_, stride_);
    legendre_values(p, xi[i], v, d);
  }
}

namespace {

void check_point(std::span<const double> xi, const BasisSet& basis) {
  if (xi.size() != basis.dimension()) {
    std::ostringstream msg;
    msg << "point has dimension " << xi.size() << ", basis expects " << basis.dimension();
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace

Eigen::VectorXd eval_multibasis(std::span<const double> xi, const BasisSet& basis) {
  check_point(xi, basis);
  const UnivariateTable table(xi, basis.max_degree(), false);
  Eigen::VectorXd out(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    double v = 1.0;
    for (const Factor& f : basis[j].factors()) v *= table.value(f.var, f.degree);
    out[static_cast<Eigen::Index>(j)] = v;
  }
  return out;
}

Eigen::MatrixXd eval_multibasis_grad(std::span<const double> xi, const BasisSet& basis) {
  check_point(xi, basis);
  const UnivariateTable table(xi, basis.max_degree(), true);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(basis.size()),
                                              static_cast<Eigen::Index>(xi.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const auto factors = basis[j].factors();
    for (std::size_t a = 0; a < factors.size(); ++a) {
      double v = table.derivative(factors[a].var, factors[a].degree);
      for (std::size_t b = 0; b < factors.size(); ++b) {
        if (b != a) v *= table.value(factors[b].var, factors[b].degree);
      }
      out(static_cast<Eigen::Index>(j), factors[a].var) = v;
    }
  }
  return out;
}

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& points, const BasisSet& basis) {
  if (static_cast<std::size_t>(points.cols()) != basis.dimension()) {
    throw DimensionMismatch("design points do not match basis dimension");
  }
  Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(basis.size()));
  std::vector<double> row(basis.dimension());
  const unsigned p = basis.max_degree();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = points(i, static_cast<Eigen::Index>(j));
    const UnivariateTable table(row, p, false);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      double v = 1.0;
      for (const Factor& f : basis[j].factors()) v *= table.value(f.var, f.degree);
      out(i, static_cast<Eigen::Index>(j)) = v;
    }
  }
  return out;
}

}  // namespace sashpcfe
