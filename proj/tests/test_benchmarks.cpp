#include <doctest.h>

#include <cmath>
#include <random>

#include "sashpcfe/benchmarks.hpp"
#include "sashpcfe/error.hpp"

using namespace sashpcfe;

namespace {

std::vector<double> means(const ProbabilisticModel& m) {
  std::vector<double> x;
  for (std::size_t i = 0; i < m.dimension(); ++i) x.push_back(m[i].marginal.mean());
  return x;
}

// Displacement method through the compatibility matrix: K = B^T diag(EA/L) B.
Eigen::VectorXd truss_oracle(const std::vector<double>& x, const TrussGeometry& g) {
  const std::size_t nl = g.loads.size();
  const std::size_t ndof = 3 * g.nodes.size();
  std::vector<int> map(ndof, -1);
  int nf = 0;
  for (std::size_t d = 0; d < ndof; ++d) {
    if (std::find(g.supports.begin(), g.supports.end(), d) == g.supports.end()) map[d] = nf++;
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.elements.size()), nf);
  Eigen::VectorXd stiff(static_cast<Eigen::Index>(g.elements.size()));
  for (std::size_t e = 0; e < g.elements.size(); ++e) {
    const auto& [i, j] = g.elements[e];
    double len2 = 0.0;
    for (int a = 0; a < 3; ++a) len2 += std::pow(g.nodes[j][a] - g.nodes[i][a], 2);
    const double len = std::sqrt(len2);
    for (int a = 0; a < 3; ++a) {
      const double c = (g.nodes[j][a] - g.nodes[i][a]) / len;
      if (map[3 * j + a] >= 0) b(static_cast<Eigen::Index>(e), map[3 * j + a]) += c;
      if (map[3 * i + a] >= 0) b(static_cast<Eigen::Index>(e), map[3 * i + a]) -= c;
    }
    stiff[static_cast<Eigen::Index>(e)] = x[nl] * x[nl + 1 + e] / len;
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(nf);
  for (std::size_t l = 0; l < nl; ++l) {
    const int dof = map[3 * g.loads[l].node + static_cast<std::size_t>(g.loads[l].axis)];
    if (dof >= 0) f[dof] += g.loads[l].sign * x[l];
  }
  const Eigen::MatrixXd k = b.transpose() * stiff.asDiagonal() * b;
  const Eigen::VectorXd uf = k.fullPivLu().solve(f);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));
  for (std::size_t d = 0; d < ndof; ++d) {
    if (map[d] >= 0) u[static_cast<Eigen::Index>(d)] = uf[map[d]];
  }
  return u;
}

TrussGeometry single_bar(double len) {
  TrussGeometry g;
  g.nodes = {{0.0, 0.0, 0.0}, {len, 0.0, 0.0}};
  g.elements = {{0, 1}};
  g.supports = {0, 1, 2, 4, 5};
  g.loads = {{1, 0, 1.0}};
  return g;
}

}  // namespace

TEST_CASE("Sobol g-function examples") {
  const double x[2] = {0.5, 0.5}, a[2] = {1.0, 1.0};
  CHECK(sobol_g(x, a, 0.0) == doctest::Approx(0.25));
  const double x3[3] = {0.1, 0.5, 0.9}, a3[3] = {2.0, 0.0, 5.0};
  CHECK(sobol_g(x3, a3, 0.35) == -0.35);
  const double bad[2] = {1.2, 0.5};
  CHECK_THROWS_AS(sobol_g(bad, a, 0.0), DomainError);
  const double neg[2] = {-1.0, 1.0};
  CHECK_THROWS_AS(sobol_g(x, neg, 0.0), ParameterDomainError);
}

TEST_CASE("Sobol g-function factor bounds") {
  const std::vector<double> a = sobol_coefficients(10);
  double lo = 1.0, hi = 1.0;
  for (double ai : a) {
    lo *= ai / (1.0 + ai);
    hi *= (2.0 + ai) / (1.0 + ai);
  }
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(10);
    for (auto& v : x) v = unif(rng);
    const double g = sobol_g(x, a, 0.0);
    CHECK(g >= lo * (1.0 - 1e-14));
    CHECK(g <= hi * (1.0 + 1e-14));
  }
}

TEST_CASE("Sobol benchmark failure probability matches the closed form") {
  const double analytic = 0.35 * std::log(0.7 / 0.5) - 0.1;
  const LimitState ls = sobol_limit_state(10);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = 1000000;
  int fails = 0;
  std::vector<double> x(10);
  for (int i = 0; i < n; ++i) {
    for (auto& v : x) v = unif(rng);
    fails += ls.evaluate(x) < 0.0;
  }
  const double pf = static_cast<double>(fails) / n;
  CHECK(std::abs(pf - analytic) <= 3.0 * std::sqrt(analytic * (1 - analytic) / n) + 2e-4);
}

TEST_CASE("beam stress at the mean values") {
  // Exact rational evaluation of K, the moment at L3 and the transformed inertia.
  const std::vector<double> x = means(beam_model(false));
  const BeamStress s = beam_stress(x);
  CHECK(s.k == doctest::Approx(142.9268292682927).epsilon(1e-12));
  CHECK(s.moment == doctest::Approx(18000.0).epsilon(1e-12));
  CHECK(s.inertia == doctest::Approx(161532357.72357723).epsilon(1e-12));
  CHECK(std::abs(s.sigma - 15.926734204126335) <= 1e-10 * 15.926734204126335);
  CHECK(std::abs(beam_limit_state(x) - (21.0 - 15.926734204126335)) <= 1e-10 * 21.0);
}

TEST_CASE("beam with no loads") {
  std::vector<double> x = means(beam_model(false));
  for (int i = 11; i < 17; ++i) x[static_cast<std::size_t>(i)] = 0.0;
  CHECK(beam_stress(x).sigma == 0.0);
  CHECK(beam_limit_state(x) == x[19]);
}

TEST_CASE("beam stress is homogeneous in the loads") {
  const std::vector<double> x = means(beam_model(false));
  std::vector<double> y = x;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unif(5.0, 19.0);
  for (int i = 11; i < 17; ++i) y[static_cast<std::size_t>(i)] = unif(rng);
  for (double c : {0.5, 2.0, 3.7}) {
    std::vector<double> z = y;
    for (int i = 11; i < 17; ++i) z[static_cast<std::size_t>(i)] *= c;
    CHECK(beam_stress(z).sigma == doctest::Approx(c * beam_stress(y).sigma).epsilon(1e-12));
  }
  std::vector<double> bad = x;
  bad[0] = -1.0;
  CHECK_THROWS_AS(beam_stress(bad), DomainError);
}

TEST_CASE("single bar axial displacement") {
  const TrussGeometry g = single_bar(120.0);
  const std::vector<double> x{500.0, 1e7, 0.8};
  const TrussResponse r = truss_solve(x, g);
  CHECK(r.displacements[3] == doctest::Approx(500.0 * 120.0 / (1e7 * 0.8)).epsilon(1e-14));
  CHECK(r.u_horizontal == doctest::Approx(500.0 * 120.0 / (1e7 * 0.8)).epsilon(1e-14));
  CHECK(r.u_vertical == 0.0);
}

TEST_CASE("unsupported truss is a mechanism") {
  TrussGeometry g = single_bar(10.0);
  g.supports = {0, 1, 2, 5};
  CHECK_THROWS_AS(truss_solve(std::vector<double>{1.0, 1.0, 1.0}, g), NumericalError);
}

TEST_CASE("25-bar truss matches an independent assembly") {
  const TrussGeometry& g = truss25_geometry();
  const ProbabilisticModel m = truss_model();
  REQUIRE(g.input_dimension() == m.dimension());
  REQUIRE(g.elements.size() == 25);
  REQUIRE(g.nodes.size() == 10);
  const std::vector<double> x = means(m);
  const TrussResponse r = truss_solve(x, g);
  const Eigen::VectorXd u = truss_oracle(x, g);
  CHECK((r.displacements - u).norm() <= 1e-8 * u.norm());
  CHECK(r.residual <= 1e-10);
  CHECK(r.u_vertical == doctest::Approx(u(Eigen::seqN(2, 10, 3)).cwiseAbs().maxCoeff()).epsilon(1e-8));

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> y = x;
    std::uniform_real_distribution<double> unif(0.7, 1.3);
    for (auto& v : y) v *= unif(rng);
    const TrussResponse ry = truss_solve(y, g);
    CHECK((ry.displacements - truss_oracle(y, g)).norm() <= 1e-8 * ry.displacements.norm());
    CHECK(ry.residual <= 1e-10);
  }
}

TEST_CASE("truss scaling laws") {
  const TrussGeometry& g = truss25_geometry();
  const std::vector<double> x = means(truss_model());
  const TrussResponse base = truss_solve(x, g);
  std::vector<double> doubled = x;
  for (std::size_t i = g.loads.size() + 1; i < x.size(); ++i) doubled[i] *= 2.0;
  const TrussResponse half = truss_solve(doubled, g);
  CHECK((half.displacements - 0.5 * base.displacements).norm() <= 1e-12 * base.displacements.norm());

  std::vector<double> heavy = x;
  for (std::size_t i = 0; i < g.loads.size(); ++i) heavy[i] *= 10.0;
  CHECK(truss_limit_state(heavy, g) < 0.0);
  CHECK(truss_limit_state(heavy, g) ==
        doctest::Approx(0.4 - 10.0 * std::max(base.u_horizontal, base.u_vertical)).epsilon(1e-10));

  std::vector<double> unloaded = x;
  for (std::size_t i = 0; i < g.loads.size(); ++i) unloaded[i] = 0.0;
  CHECK(truss_limit_state(unloaded, g) == 0.4);
}

TEST_CASE("truss stiffness is symmetric") {
  const TrussGeometry& g = truss25_geometry();
  const std::vector<double> x = means(truss_model());
  // Maxwell-Betti: unit loads at two free DOFs give reciprocal displacements.
  TrussGeometry a = g, b = g;
  a.loads = {{4, 0, 1.0}};
  b.loads = {{7, 2, 1.0}};
  std::vector<double> xa{1.0};
  xa.insert(xa.end(), x.begin() + static_cast<long>(g.loads.size()), x.end());
  const TrussResponse ra = truss_solve(xa, a), rb = truss_solve(xa, b);
  CHECK(ra.displacements[3 * 7 + 2] == doctest::Approx(rb.displacements[3 * 4 + 0]).epsilon(1e-10));
}

TEST_CASE("benchmark registry") {
  const auto names = benchmark_names();
  CHECK(names.size() == 5);
  for (const auto& n : names) {
    const Benchmark b = make_benchmark(n);
    CHECK(b.limit_state.dimension == b.model.dimension());
  }
  CHECK(make_benchmark("sobol-m40").sas_train == 900);
  CHECK(make_benchmark("composite-beam").mcs_samples == 1000000);
  CHECK_THROWS_AS(make_benchmark("nope"), ConfigError);
}
