#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sashpcfe/error.hpp"
#include "sashpcfe/probspace.hpp"

using namespace sashpcfe;

namespace {

SampleMatrix one(Space space, std::initializer_list<double> row) {
  SampleMatrix m{space, Eigen::MatrixXd(1, static_cast<Eigen::Index>(row.size()))};
  Eigen::Index k = 0;
  for (double v : row) m.values(0, k++) = v;
  return m;
}

ProbabilisticModel single(const Marginal& m) { return ProbabilisticModel({{"x", m}}); }

// Warnock's closed form of the squared L2-star discrepancy.
double l2_star_discrepancy(const Eigen::MatrixXd& u) {
  const auto n = static_cast<double>(u.rows());
  const auto d = u.cols();
  double a = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    double p = 1.0;
    for (Eigen::Index k = 0; k < d; ++k) p *= 1.0 - u(i, k) * u(i, k);
    a += p;
  }
  double b = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.rows(); ++j) {
      double p = 1.0;
      for (Eigen::Index k = 0; k < d; ++k) p *= 1.0 - std::max(u(i, k), u(j, k));
      b += p;
    }
  }
  return std::pow(3.0, -static_cast<double>(d)) - std::pow(2.0, 1.0 - static_cast<double>(d)) / n * a + b / (n * n);
}

}  // namespace

TEST_CASE("moment matching of lognormal and Gumbel marginals") {
  const DistributionParams ln = moment_match(MarginalKind::Lognormal, 1e7, 5e5);
  CHECK(ln.second == doctest::Approx(std::sqrt(std::log(1.0025))).epsilon(1e-12));
  CHECK(ln.second == doctest::Approx(0.049969).epsilon(1e-5));
  CHECK(ln.first == doctest::Approx(std::log(1e14 / std::sqrt(1e14 + 2.5e11))).epsilon(1e-12));

  const DistributionParams gu = moment_match(MarginalKind::Gumbel, 15.0, 1.5);
  CHECK(gu.second == doctest::Approx(1.16953).epsilon(1e-5));
  CHECK(gu.first == doctest::Approx(14.3249).epsilon(1e-5));

  const DistributionParams no = moment_match(MarginalKind::Normal, 100.0, 0.2);
  CHECK(no.first == 100.0);
  CHECK(no.second == 0.2);
}

TEST_CASE("invalid distribution parameters are rejected") {
  CHECK_THROWS_AS(Marginal::normal(0.0, 0.0), ParameterDomainError);
  CHECK_THROWS_AS(Marginal::lognormal(-1.0, 0.1), ParameterDomainError);
  CHECK_THROWS_AS(Marginal::gumbel(1.0, -2.0), ParameterDomainError);
  CHECK_THROWS_AS(Marginal::uniform(1.0, 1.0), ParameterDomainError);
  CHECK_THROWS_AS(Marginal::normal(0.0, 1.0).truncated({50.0, 60.0}), ParameterDomainError);
}

TEST_CASE("transform examples") {
  const SampleMatrix u = transform(one(Space::Physical, {0.25}), Space::StdLegendre, single(Marginal::uniform(0, 1)));
  CHECK(u.values(0, 0) == doctest::Approx(-0.5).epsilon(1e-15));
  const SampleMatrix n = transform(one(Space::Physical, {0.0}), Space::StdUniform, single(Marginal::normal(0, 1)));
  CHECK(n.values(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  const Marginal g = Marginal::gumbel(15.0, 1.5);
  const SampleMatrix gu = transform(one(Space::Physical, {g.params().first}), Space::StdUniform, single(g));
  CHECK(gu.values(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(gu.values(0, 0) == doctest::Approx(0.36788).epsilon(1e-5));
}

TEST_CASE("values outside the support raise a domain error") {
  CHECK_THROWS_AS(transform(one(Space::Physical, {2.0}), Space::StdUniform, single(Marginal::uniform(0, 1))),
                  DomainError);
  CHECK_THROWS_AS(transform(one(Space::Physical, {-1.0}), Space::StdUniform, single(Marginal::lognormal(1, 0.1))),
                  DomainError);
  CHECK_THROWS_AS(transform(one(Space::StdLegendre, {1.5}), Space::Physical, single(Marginal::normal(0, 1))),
                  DomainError);
  CHECK_THROWS_AS(
      transform(one(Space::Physical, {3.0}), Space::StdUniform, single(Marginal::normal(0, 1).truncated({-1, 1}))),
      DomainError);
}

TEST_CASE("physical -> legendre -> physical round trip for every marginal kind") {
  const std::vector<Marginal> marginals = {
      Marginal::uniform(-2.0, 5.0),         Marginal::normal(100.0, 0.2),
      Marginal::lognormal(1e7, 5e5),        Marginal::gumbel(15.0, 1.5),
      Marginal::normal(3.0, 1.0).truncated({2.0, 5.0}), Marginal::gumbel(2.0, 0.3).truncated({1.5, 3.0}),
      Marginal::lognormal(1.0, 0.1).truncated({0.8, 1.3})};
  for (const Marginal& m : marginals) {
    const ProbabilisticModel model = single(m);
    SampleMatrix xi{Space::StdLegendre, Eigen::MatrixXd(41, 1)};
    for (int i = 0; i < 41; ++i) xi.values(i, 0) = -0.975 + 0.04875 * i;
    const SampleMatrix x = transform(xi, Space::Physical, model);
    const SampleMatrix back = transform(transform(x, Space::StdLegendre, model), Space::Physical, model);
    for (int i = 0; i < 41; ++i) {
      CHECK(back.values(i, 0) == doctest::Approx(x.values(i, 0)).epsilon(1e-9));
      CHECK(m.ppf(m.cdf(x.values(i, 0))) == doctest::Approx(x.values(i, 0)).epsilon(1e-10));
    }
  }
}

TEST_CASE("truncated CDF is renormalized to the interval") {
  const Marginal base = Marginal::normal(0.0, 1.0);
  const Marginal t = base.truncated({-1.0, 2.0});
  CHECK(t.cdf(-1.0) == doctest::Approx(0.0));
  CHECK(t.cdf(2.0) == doctest::Approx(1.0));
  const double phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }(0.5);
  const double lo = 0.5 * std::erfc(1.0 / std::sqrt(2.0));
  const double hi = 0.5 * std::erfc(-2.0 / std::sqrt(2.0));
  CHECK(t.cdf(0.5) == doctest::Approx((phi - lo) / (hi - lo)).epsilon(1e-13));
  CHECK(t.mass() == doctest::Approx(hi - lo).epsilon(1e-13));
  CHECK(t.untruncated().mass() == 1.0);
}

TEST_CASE("CDFs are monotone onto [0, 1]") {
  for (const Marginal& m : {Marginal::uniform(0, 1), Marginal::normal(0, 1), Marginal::lognormal(2, 0.5),
                            Marginal::gumbel(0, 1)}) {
    double prev = 0.0;
    for (int i = 1; i < 200; ++i) {
      const double x = m.ppf(i / 200.0);
      const double c = m.cdf(x);
      CHECK(c >= prev);
      CHECK(c <= 1.0);
      prev = c;
    }
  }
}

TEST_CASE("Sobol points match published direction numbers") {
  const SampleMatrix first = sobol_points(1, 1);
  CHECK(first.values(0, 0) == 0.5);

  // Rows 1..5 of scipy.stats.qmc.Sobol(d=5, scramble=False).
  const double expected[5][5] = {{0.5, 0.5, 0.5, 0.5, 0.5},
                                 {0.75, 0.25, 0.25, 0.25, 0.75},
                                 {0.25, 0.75, 0.75, 0.75, 0.25},
                                 {0.375, 0.375, 0.625, 0.875, 0.375},
                                 {0.875, 0.875, 0.125, 0.375, 0.875}};
  const SampleMatrix p = sobol_points(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int k = 0; k < 5; ++k) CHECK(p.values(i, k) == expected[i][k]);
  }

  const SampleMatrix big = sobol_points(1023, 1000);
  CHECK(big.values(776, 0) == 0.6923828125);
  CHECK(big.values(776, 299) == 0.0302734375);
  CHECK(big.values(776, 500) == 0.8701171875);
  CHECK(big.values(776, 999) == 0.3837890625);
  CHECK(big.values(1022, 0) == 0.0009765625);
  CHECK(big.values(1022, 299) == 0.4951171875);
  CHECK(big.values(1022, 500) == 0.3818359375);
  CHECK(big.values(1022, 999) == 0.8564453125);

  const SampleMatrix skipped = sobol_points(4, 1000, 776);
  CHECK(skipped.values(0, 999) == 0.3837890625);
}

TEST_CASE("Sobol points lie in (0, 1) and are deterministic") {
  const SampleMatrix a = sobol_points(3, 2);
  CHECK(a.space == Space::StdUniform);
  CHECK((a.values.array() > 0.0).all());
  CHECK((a.values.array() < 1.0).all());
  const SampleMatrix big = sobol_points(4096, 40);
  CHECK((big.values.array() > 0.0).all());
  CHECK((big.values.array() < 1.0).all());
  CHECK(sobol_points(100, 7).values == sobol_points(100, 7).values);
  CHECK_THROWS_AS(sobol_points(1, 1001), UnsupportedDimension);
}

TEST_CASE("Sobol discrepancy is below pseudo-random discrepancy") {
  const SampleMatrix s = sobol_points(1024, 10);
  const SampleMatrix r = mc_uniform(1024, 10, 7);
  CHECK(l2_star_discrepancy(s.values) < l2_star_discrepancy(r.values));
}

TEST_CASE("scrambled Sobol points are seeded and stay in (0, 1)") {
  const SampleMatrix a = scrambled_sobol_points(512, 12, 3);
  const SampleMatrix b = scrambled_sobol_points(512, 12, 3);
  const SampleMatrix c = scrambled_sobol_points(512, 12, 4);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK((a.values.array() > 0.0).all());
  CHECK((a.values.array() < 1.0).all());
  // Points 1..15 of a base-2 net fill 15 distinct strata of each axis.
  const SampleMatrix head = scrambled_sobol_points(15, 12, 3);
  for (Eigen::Index k = 0; k < head.cols(); ++k) {
    std::vector<int> bins(16, 0);
    for (Eigen::Index i = 0; i < 15; ++i) ++bins[static_cast<std::size_t>(head.values(i, k) * 16)];
    CHECK(std::count(bins.begin(), bins.end(), 1) == 15);
  }
}

TEST_CASE("uniform stream chunks are independent of evaluation order") {
  const UniformStream s(11, 3);
  Eigen::MatrixXd a(UniformStream::kChunkRows, 3), b(UniformStream::kChunkRows, 3), c(10, 3);
  s.fill_chunk(2, a);
  s.fill_chunk(0, b);
  s.fill_chunk(2, c);
  CHECK(a.topRows(10) == c);
  CHECK(a != b);
  CHECK((a.array() > 0.0).all());
  CHECK((a.array() < 1.0).all());
}

TEST_CASE("Monte Carlo sampling moments") {
  const SampleMatrix u = mc_sample(single(Marginal::uniform(0, 1)), 100000, 1);
  CHECK(std::abs(u.values.mean() - 0.5) <= 0.005);

  const SampleMatrix ln = mc_sample(single(Marginal::lognormal(1e7, 5e5)), 1000000, 2);
  CHECK(std::abs(ln.values.mean() / 1e7 - 1.0) <= 0.002);

  const SampleMatrix a = mc_sample(single(Marginal::normal(0, 1)), 1000, 5);
  const SampleMatrix b = mc_sample(single(Marginal::normal(0, 1)), 1000, 5);
  CHECK(a.values == b.values);

  const std::size_t n = 200000;
  for (const Marginal& m : {Marginal::uniform(-1, 3), Marginal::normal(10, 2), Marginal::lognormal(5, 1),
                            Marginal::gumbel(15, 1.5)}) {
    const SampleMatrix x = mc_sample(single(m), n, 9);
    const double mean = x.values.mean();
    const double sd = std::sqrt((x.values.array() - mean).square().sum() / static_cast<double>(n - 1));
    CHECK(std::abs(mean - m.mean()) <= 5.0 * m.sd() / std::sqrt(static_cast<double>(n)));
    // sd of the sample sd ~ sd * sqrt((kurtosis - 1) / 4n); Gumbel kurtosis is 5.4.
    CHECK(std::abs(sd - m.sd()) <= 5.0 * m.sd() * std::sqrt(4.4 / (4.0 * static_cast<double>(n))));
  }
}

TEST_CASE("truncated sampling stays inside the interval") {
  const Marginal m = Marginal::gumbel(15.0, 1.5).truncated({14.0, 17.0});
  const SampleMatrix x = mc_sample(single(m), 20000, 4);
  CHECK(x.values.minCoeff() >= 14.0);
  CHECK(x.values.maxCoeff() <= 17.0);
}
