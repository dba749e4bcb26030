#include <doctest.h>

#include <cmath>
#include <random>

#include "sashpcfe/error.hpp"
#include "sashpcfe/polybasis.hpp"
#include "sashpcfe/probspace.hpp"

using namespace sashpcfe;

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Bonnet recurrence for the classical Legendre polynomial, independent of
// the library's normalized recurrence.
double legendre_plain(unsigned k, double t) {
  if (k == 0) return 1.0;
  double p0 = 1.0, p1 = t;
  for (unsigned n = 2; n <= k; ++n) {
    const double p2 = ((2.0 * n - 1.0) * t * p1 - (n - 1.0) * p0) / n;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace

TEST_CASE("orthonormal Legendre values") {
  CHECK(legendre_eval(0, 0.3) == 1.0);
  CHECK(legendre_eval(0, -1.0) == 1.0);
  CHECK(legendre_eval(1, 0.5) == doctest::Approx(std::sqrt(3.0) * 0.5).epsilon(1e-15));
  CHECK(legendre_eval(2, 1.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  for (unsigned k = 0; k <= 8; ++k) {
    for (double t : {-0.93, -0.2, 0.0, 0.41, 0.999}) {
      CHECK(legendre_eval(k, t) == doctest::Approx(std::sqrt(2.0 * k + 1.0) * legendre_plain(k, t)).epsilon(1e-13));
    }
  }
  CHECK_NOTHROW(legendre_eval(3, 1.0 + 1e-13));
  CHECK_THROWS_AS(legendre_eval(1, 1.1), DomainError);
}

TEST_CASE("canonical graded ordering") {
  const BasisSet b = BasisSet::total_degree(2, 2);
  REQUIRE(b.size() == 6);
  CHECK(b[0].total_degree() == 0);
  const std::vector<std::vector<unsigned>> expected = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (std::size_t i = 0; i < 6; ++i) CHECK(b[i].dense(2) == expected[i]);
  CHECK(canonical_less(b[1], b[2]));
  CHECK_FALSE(canonical_less(b[2], b[1]));
}

TEST_CASE("duplicate multi-indices are rejected") {
  const unsigned e[2] = {1, 1};
  std::vector<MultiIndex> v = {MultiIndex::from_dense(e), MultiIndex::from_dense(e)};
  CHECK_THROWS_AS(BasisSet(2, v), ParameterDomainError);
}

TEST_CASE("basis cardinality follows the binomial formula") {
  for (std::size_t n = 1; n <= 100; ++n) {
    for (unsigned p = 0; p <= 5; ++p) {
      CHECK(total_degree_cardinality(n, p) == binomial(n + p, p));
    }
  }
  for (std::size_t n : {1u, 2u, 5u, 10u, 20u}) {
    for (unsigned p = 0; p <= 5; ++p) CHECK(BasisSet::total_degree(n, p).size() == binomial(n + p, p));
  }
  for (std::size_t n : {40u, 100u}) {
    for (unsigned p = 0; p <= 3; ++p) CHECK(BasisSet::total_degree(n, p).size() == binomial(n + p, p));
  }
}

TEST_CASE("multivariate basis evaluation") {
  const BasisSet b = BasisSet::total_degree(3, 3);
  const double zero[3] = {0.0, 0.0, 0.0};
  const Eigen::VectorXd v = eval_multibasis(zero, b);
  CHECK(v[0] == 1.0);
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (b[j].total_degree() % 2 == 1) CHECK(v[static_cast<Eigen::Index>(j)] == 0.0);
  }

  const unsigned e11[2] = {1, 1};
  const BasisSet one(2, {MultiIndex::from_dense(e11)});
  const double xi[2] = {0.5, -0.5};
  CHECK(eval_multibasis(xi, one)[0] == doctest::Approx(-0.75).epsilon(1e-15));
  const double wrong[3] = {0, 0, 0};
  CHECK_THROWS_AS(eval_multibasis(wrong, one), DimensionMismatch);
}

TEST_CASE("Monte Carlo Gram matrix is close to identity") {
  const BasisSet b = BasisSet::total_degree(2, 3);
  const SampleMatrix u = mc_uniform(1000000, 2, 17);
  const Eigen::MatrixXd xi = (2.0 * u.values.array() - 1.0).matrix();
  const Eigen::MatrixXd psi = design_matrix(xi, b);
  const Eigen::MatrixXd gram = psi.transpose() * psi / static_cast<double>(xi.rows());
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
  CHECK((gram - eye).cwiseAbs().maxCoeff() <= 5e-3);
}

TEST_CASE("basis gradients") {
  const BasisSet b = BasisSet::total_degree(2, 1);
  const double xi[2] = {0.3, -0.7};
  const Eigen::MatrixXd g = eval_multibasis_grad(xi, b);
  CHECK(g.row(0).isZero());
  CHECK(g(1, 0) == doctest::Approx(std::sqrt(3.0)));
  CHECK(g(1, 1) == 0.0);
}

TEST_CASE("basis gradients agree with central finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-0.9, 0.9);
  const std::size_t n = 4;
  const BasisSet b = BasisSet::total_degree(n, 4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xi(n);
    for (auto& v : xi) v = unif(rng);
    const std::size_t j = 1 + rng() % (b.size() - 1);
    const BasisSet single(n, {b[j]});
    const Eigen::MatrixXd g = eval_multibasis_grad(xi, single);
    for (std::size_t k = 0; k < n; ++k) {
      const double h = 1e-5;
      std::vector<double> up = xi, dn = xi;
      up[k] += h;
      dn[k] -= h;
      const double fd = (eval_multibasis(up, single)[0] - eval_multibasis(dn, single)[0]) / (2 * h);
      const double an = g(0, static_cast<Eigen::Index>(k));
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
    }
  }
  CHECK(worst <= 1e-6);
}
