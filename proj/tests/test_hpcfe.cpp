#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sashpcfe/error.hpp"
#include "sashpcfe/hpcfe.hpp"
#include "sashpcfe/probspace.hpp"

using namespace sashpcfe;

namespace {

Eigen::MatrixXd design(std::size_t n, std::size_t d) {
  return (2.0 * sobol_points(n, d).values.array() - 1.0).matrix();
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

// Independent SVD-based pseudo-inverse.
Eigen::MatrixXd pinv_oracle(const Eigen::MatrixXd& a) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) inv[i] = s[i] > 1e-10 * s[0] ? 1.0 / s[i] : 0.0;
  return svd.matrixV().leftCols(s.size()) * inv.asDiagonal() * svd.matrixU().leftCols(s.size()).transpose();
}

HpcfeConfig trend(unsigned order, unsigned degree) {
  HpcfeConfig c;
  c.max_order = order;
  c.basis_degree = degree;
  return c;
}

Eigen::VectorXd at(double t) { return Eigen::VectorXd::Constant(1, t); }

}  // namespace

TEST_CASE("trend basis sizes") {
  CHECK(pcfe_basis(1, 1, 2).size() == 2);
  CHECK(pcfe_basis(2, 2, 2).size() == 8);
  CHECK(pcfe_basis(3, 2, 3).size() == 3 * 3 + 9 * 3);
  CHECK(build_design_matrix(design(10, 2), trend(2, 2)).psi.cols() == 8);
}

TEST_CASE("redundant extended-basis terms collapse to one column") {
  const std::vector<MultiIndex> raw = pcfe_extended_bases(2, 2, 2);
  const BasisSet basis = pcfe_basis(2, 2, 2);
  CHECK(raw.size() > basis.size());
  const MultiIndex u = MultiIndex::from_dense(std::vector<unsigned>{1, 0});
  CHECK(std::count(raw.begin(), raw.end(), u) == 2);
  CHECK(std::count(basis.indices().begin(), basis.indices().end(), u) == 1);
  for (const MultiIndex& m : raw) {
    CHECK(std::find(basis.indices().begin(), basis.indices().end(), m) != basis.indices().end());
    CHECK(m.total_degree() > 0);
  }
}

TEST_CASE("correlation matrix matches the kernel formula") {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd z = random_matrix(5, 3, rng);
  const Eigen::Vector3d theta(0.3, 2.0, 7.5);
  const Eigen::MatrixXd r = correlation_matrix(z, theta, 1e-6);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < 3; ++k) s += theta[k] * std::pow(z(i, k) - z(j, k), 2);
      const double expect = std::exp(-s) + (i == j ? 1e-6 : 0.0);
      CHECK(std::abs(r(i, j) - expect) <= 1e-14);
    }
  }
  const Eigen::MatrixXd same = Eigen::MatrixXd::Ones(3, 2);
  CHECK((correlation_matrix(same, Eigen::Vector2d(1.0, 1.0), 0.0).array() == 1.0).all());
  Eigen::MatrixXd far(2, 1);
  far << 0.0, 100.0;
  CHECK(correlation_matrix(far, Eigen::VectorXd::Ones(1), 0.0)(0, 1) == 0.0);
}

TEST_CASE("duplicate points need a larger nugget") {
  const Eigen::MatrixXd same = Eigen::MatrixXd::Ones(3, 1);
  const CorrelationFactor f = factor_correlation(same, Eigen::VectorXd::Ones(1), 0.0);
  CHECK(f.nugget > 0.0);
  CHECK(f.llt.info() == Eigen::Success);
  CHECK(factor_correlation(design(6, 2), Eigen::Vector2d(1.0, 1.0), 1e-8).nugget == 1e-8);
}

TEST_CASE("homotopy on the hand-solvable singular system") {
  Eigen::Matrix2d a;
  a << 1.0, 0.0, 0.0, 0.0;
  const HomotopyResult h = homotopy_solve(a, Eigen::Vector2d(1.0, 0.0));
  CHECK((h.alpha0 - Eigen::Vector2d(1.0, 0.0)).norm() <= 1e-14);
  CHECK((a * h.alpha - Eigen::Vector2d(1.0, 0.0)).norm() <= 1e-12);
}

TEST_CASE("homotopy on random rank-deficient systems") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd f = random_matrix(6, 10, rng);
    const Eigen::MatrixXd a = f.transpose() * f;
    const Eigen::VectorXd b = a * random_matrix(10, 1, rng);
    const HomotopyResult h = homotopy_solve(a, b);
    CHECK((a * h.alpha - b).norm() <= 1e-8 * b.norm());
    CHECK((h.alpha - h.alpha0).norm() <= 1e-8 * h.alpha0.norm());
    CHECK((h.alpha0 - pinv_oracle(a) * b).norm() <= 1e-8 * h.alpha0.norm());

    const Eigen::MatrixXd g = random_matrix(10, 10, rng);
    const Eigen::MatrixXd w = g * g.transpose() + Eigen::MatrixXd::Identity(10, 10);
    const HomotopyResult hw = homotopy_solve(a, b, w);
    CHECK((a * hw.alpha - b).norm() <= 1e-8 * b.norm());
  }
}

TEST_CASE("homotopy on a full-rank system is the direct solve") {
  std::mt19937_64 rng(78);
  const Eigen::MatrixXd f = random_matrix(8, 8, rng);
  const Eigen::MatrixXd a = f.transpose() * f + Eigen::MatrixXd::Identity(8, 8);
  const Eigen::VectorXd b = random_matrix(8, 1, rng);
  const HomotopyResult h = homotopy_solve(a, b);
  const Eigen::VectorXd direct = a.llt().solve(b);
  CHECK((h.alpha - direct).norm() <= 1e-10 * direct.norm());
  CHECK((h.alpha0 - direct).norm() <= 1e-10 * direct.norm());
  CHECK(h.weighted_rank == 0);
}

TEST_CASE("pseudo-inverse satisfies the Penrose conditions") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd a = random_matrix(7, 4, rng) * random_matrix(4, 9, rng);
  const Eigen::MatrixXd p = pseudo_inverse(a);
  CHECK((a * p * a - a).norm() <= 1e-10 * a.norm());
  CHECK((p * a * p - p).norm() <= 1e-10 * p.norm());
  CHECK(((a * p).transpose() - a * p).norm() <= 1e-10);
  CHECK(((p * a).transpose() - p * a).norm() <= 1e-10);
}

TEST_CASE("fit interpolates noise-free data") {
  const Eigen::MatrixXd z = design(30, 2);
  Eigen::VectorXd y(30);
  for (Eigen::Index i = 0; i < 30; ++i) y[i] = std::exp(z(i, 0)) * std::sin(2.0 * z(i, 1)) + z(i, 0) * z(i, 1);
  const HpcfeModel m = fit_hpcfe(z, y);
  const double range = y.maxCoeff() - y.minCoeff();
  for (Eigen::Index i = 0; i < 30; ++i) {
    const Eigen::VectorXd zi = z.row(i).transpose();
    CHECK(std::abs(m.predict_mean(zi) - y[i]) <= 1e-5 * range);
    CHECK(m.predict_variance(zi) <= 1e-6 * m.state().sigma2);
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector2d p(unif(rng), unif(rng));
    CHECK(m.predict_variance(Eigen::VectorXd(p)) >= 0.0);
  }
  CHECK(m.state().sigma2 >= 0.0);
  CHECK(m.state().d.size() == 30);
}

TEST_CASE("fitted likelihood is no worse than any start") {
  const Eigen::MatrixXd z = design(25, 2);
  Eigen::VectorXd y(25);
  for (Eigen::Index i = 0; i < 25; ++i) y[i] = std::cos(3.0 * z(i, 0)) + z(i, 1) * z(i, 1) * z(i, 1);
  const HpcfeConfig cfg;
  const HpcfeModel m = fit_hpcfe(z, y, cfg);
  const Eigen::MatrixXd psi = build_design_matrix(m.state().z_train, cfg).psi;
  for (const Eigen::VectorXd& t : theta_starts(2, cfg)) {
    CHECK(m.state().log_likelihood >= profile_log_likelihood(m.state().z_train, m.state().d, psi, t, cfg));
  }
  CHECK(m.state().log_likelihood ==
        doctest::Approx(profile_log_likelihood(m.state().z_train, m.state().d, psi, m.state().theta, cfg)));
}

TEST_CASE("trend-only data are absorbed by the trend") {
  const Eigen::MatrixXd half = design(10, 2) * 0.8 + Eigen::MatrixXd::Constant(10, 2, 0.05);
  Eigen::MatrixXd z(20, 2);
  z << half, -half;
  const Eigen::MatrixXd zs = ReducedScaling::from_training(z).apply(z);
  const double s3 = std::sqrt(3.0);
  const double s7 = std::sqrt(7.0);
  // Odd terms only, so the symmetric design has a zero response mean.
  auto truth = [&](const Eigen::VectorXd& v) {
    return 1.7 * s3 * v[0] + 0.4 * s3 * v[1] - 0.6 * s7 * (5.0 * std::pow(v[0], 3) - 3.0 * v[0]) / 2.0;
  };
  Eigen::VectorXd y(20);
  for (Eigen::Index i = 0; i < 20; ++i) y[i] = truth(zs.row(i).transpose());
  REQUIRE(std::abs(y.mean()) <= 1e-14);
  const HpcfeModel m = fit_hpcfe(z, y, trend(2, 3));
  CHECK(m.state().sigma2 <= 1e-12 * y.squaredNorm());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unif(-0.9, 0.9);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector2d p(unif(rng), unif(rng));
    const double expect = truth(m.state().scaling.apply(Eigen::VectorXd(p)));
    CHECK(std::abs(m.predict_mean(Eigen::VectorXd(p)) - expect) <= 1e-8);
    CHECK(std::abs(m.trend(Eigen::VectorXd(p)) - expect) <= 1e-8);
  }
}

TEST_CASE("constant response fits to a zero trend") {
  const Eigen::MatrixXd z = design(12, 1);
  const HpcfeModel m = fit_hpcfe(z, Eigen::VectorXd::Constant(12, 3.25));
  CHECK(m.state().g0 == 3.25);
  CHECK(m.state().alpha.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(m.state().sigma2 <= 1e-20);
  CHECK(m.predict_mean(at(0.3)) == doctest::Approx(3.25));
}

TEST_CASE("one-dimensional sine is reproduced") {
  const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(12, -1.0, 1.0);
  const Eigen::VectorXd y = (M_PI * z.array()).sin().matrix();
  const HpcfeModel m = fit_hpcfe(z, y);
  double worst = 0.0;
  for (double t = -1.0; t <= 1.0; t += 1e-3) {
    worst = std::max(worst, std::abs(m.predict_mean(at(t)) - std::sin(M_PI * t)));
  }
  CHECK(worst <= 1e-2);
}

TEST_CASE("kriging variance matches a brute-force GLS oracle") {
  Eigen::MatrixXd z(3, 1);
  z << -0.7, 0.1, 0.8;
  const Eigen::Vector3d y(0.3, -0.5, 1.2);
  const HpcfeModel m = fit_hpcfe(z, y, trend(1, 1));
  const HpcfeState& s = m.state();
  REQUIRE(s.basis.size() == 1);

  const Eigen::VectorXd zt = s.z_train.col(0);
  Eigen::Matrix3d r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = std::exp(-s.theta[0] * std::pow(zt[i] - zt[j], 2)) + (i == j ? s.nugget : 0.0);
  }
  const Eigen::Matrix3d ri = r.inverse();
  const Eigen::Vector3d psi = std::sqrt(3.0) * zt;
  const Eigen::Vector3d d = y.array() - y.mean();
  const double a = psi.dot(ri * psi);
  const double alpha = psi.dot(ri * d) / a;
  CHECK(std::abs(s.alpha[0] - alpha) <= 1e-10 * std::max(1.0, std::abs(alpha)));
  const Eigen::Vector3d e = d - alpha * psi;
  CHECK(std::abs(s.sigma2 - e.dot(ri * e) / 3.0) <= 1e-10 * std::max(1.0, s.sigma2));

  for (double t : {-1.2, -0.3, 0.0, 0.45, 0.95, 1.6}) {
    const double ts = s.scaling.apply(at(t))[0];
    Eigen::Vector3d rv;
    for (int i = 0; i < 3; ++i) rv[i] = std::exp(-s.theta[0] * std::pow(zt[i] - ts, 2));
    const double phi = std::sqrt(3.0) * ts;
    const double u = psi.dot(ri * rv) - phi;
    const double s2 = s.sigma2 * (1.0 - rv.dot(ri * rv) + u * u / a);
    const double mu = s.g0 + phi * alpha + rv.dot(ri * e);
    CHECK(std::abs(m.predict_variance(at(t)) - std::max(s2, 0.0)) <= 1e-10 * s.sigma2);
    CHECK(std::abs(m.predict_mean(at(t)) - mu) <= 1e-10);
  }
}

TEST_CASE("far-field prediction reduces to the trend") {
  const Eigen::MatrixXd z = design(16, 2);
  Eigen::VectorXd y(16);
  for (Eigen::Index i = 0; i < 16; ++i) y[i] = std::sin(2.0 * z(i, 0)) + z(i, 1);
  HpcfeState st = fit_hpcfe(z, y, trend(2, 2)).state();
  st.theta = Eigen::Vector2d(50.0, 50.0);
  const HpcfeModel m(st);
  const Eigen::Vector2d far(4.0, -4.0);
  CHECK(std::abs(m.predict_mean(Eigen::VectorXd(far)) - m.trend(Eigen::VectorXd(far))) <= 1e-12 * std::max(1.0, std::abs(m.trend(Eigen::VectorXd(far)))));
  CHECK(m.predict_variance(Eigen::VectorXd(far)) >= st.sigma2);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(fit_hpcfe(design(5, 2), Eigen::VectorXd::Zero(4)), DimensionMismatch);
  CHECK_THROWS_AS(fit_hpcfe(design(5, 2), Eigen::VectorXd::Zero(5), trend(0, 3)), ConfigError);
  HpcfeConfig bad;
  bad.theta_lo = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(5);
  y[2] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(fit_hpcfe(design(5, 2), y), NumericalError);
}

TEST_CASE("minimum-norm likelihood equals the identity-weighted homotopy likelihood") {
  // Narrow trend (q' < n) and a wide, rank-deficient one (q' = 16 > n = 12, rank 8).
  Eigen::MatrixXd wide_z(12, 2);
  wide_z << design(12, 1), design(12, 1);
  const std::vector<std::pair<Eigen::MatrixXd, HpcfeConfig>> cases{
      {design(40, 2), trend(2, 3)},
      {wide_z, trend(1, 8)}};
  for (const auto& [z, plain] : cases) {
    Eigen::VectorXd d(z.rows());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::sin(3.0 * z(i, 0)) * std::exp(z(i, 1));
    d.array() -= d.mean();
    const Eigen::MatrixXd psi = build_design_matrix(z, plain).psi;
    HpcfeConfig weighted = plain;
    weighted.weight = Eigen::MatrixXd::Identity(psi.cols(), psi.cols());
    for (const Eigen::Vector2d& t : {Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(10.0, 0.1), Eigen::Vector2d(31.6, 31.6),
                                    Eigen::Vector2d(3.16, 0.0316)}) {
      const double a = profile_log_likelihood(z, d, psi, t, plain);
      const double b = profile_log_likelihood(z, d, psi, t, weighted);
      CHECK(a == doctest::Approx(b).epsilon(1e-6));
    }
  }
  // Ill-conditioned wide case, against a 60-digit evaluation of the GLS
  // residual over an orthonormal basis of range(Psi).
  Eigen::VectorXd d(12);
  for (Eigen::Index i = 0; i < 12; ++i) d[i] = std::sin(3.0 * wide_z(i, 0)) * std::exp(wide_z(i, 1));
  d.array() -= d.mean();
  const HpcfeConfig wide = trend(1, 8);
  const Eigen::MatrixXd psi = build_design_matrix(wide_z, wide).psi;
  CHECK(profile_log_likelihood(wide_z, d, psi, Eigen::Vector2d(0.316227766016838, 0.316227766016838), wide) ==
        doctest::Approx(84.34181577201283).epsilon(1e-8));
  CHECK(profile_log_likelihood(wide_z, d, psi, Eigen::Vector2d(0.0562341325190349, 0.177827941003892), wide) ==
        doctest::Approx(94.13041636814752).epsilon(1e-8));
}
