#include "sashpcfe/activesub.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "sashpcfe/error.hpp"

namespace sashpcfe {

Eigen::MatrixXd estimate_c(const GradientFn& gradient, const Eigen::MatrixXd& samples) {
  if (samples.rows() < 1) throw ParameterDomainError("estimate_c needs at least one sample");
  const Eigen::Index n = samples.cols();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < samples.rows(); ++j) {
    const Eigen::VectorXd g = gradient(samples.row(j).transpose());
    if (g.size() != n) throw DimensionMismatch("gradient has the wrong length");
    if (!g.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite gradient at sample " << j;
      throw NumericalError(msg.str());
    }
    c.selfadjointView<Eigen::Lower>().rankUpdate(g);
  }
  c = c.selfadjointView<Eigen::Lower>();
  c /= static_cast<double>(samples.rows());
  return c;
}

EigenPairs eigendecompose(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols() || c.rows() == 0) throw DimensionMismatch("C must be square");
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw NumericalError("eigendecompose: matrix is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (c + c.transpose()));
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");

  const Eigen::Index n = c.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return solver.eigenvalues()[a] > solver.eigenvalues()[b];
  });

  EigenPairs out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    out.values[i] = solver.eigenvalues()[src];
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    out.vectors.col(i) = v;
  }
  return out;
}

std::size_t choose_rank(const Eigen::VectorXd& eigenvalues, double mu) {
  if (!(mu > 0.0 && mu < 1.0)) throw ParameterDomainError("threshold mu must lie in (0, 1)");
  const double total = eigenvalues.sum();
  if (!(total > 0.0)) throw NumericalError("eigenvalue spectrum is zero: no output variability");
  double running = 0.0;
  for (Eigen::Index r = 0; r < eigenvalues.size(); ++r) {
    running += eigenvalues[r];
    if (running / total >= mu) return static_cast<std::size_t>(r + 1);
  }
  return static_cast<std::size_t>(eigenvalues.size());
}

Eigen::VectorXd ActiveSubspace::project(const Eigen::VectorXd& x) const {
  return sashpcfe::project(w1, x);
}

Eigen::MatrixXd ActiveSubspace::project_rows(const Eigen::MatrixXd& x) const {
  if (x.cols() != w1.rows()) throw DimensionMismatch("projection input has wrong dimension");
  return x * w1;
}

ActiveSubspace build_active_subspace(const Eigen::MatrixXd& c, double mu, std::size_t n_grad_samples) {
  const EigenPairs pairs = eigendecompose(c);
  ActiveSubspace out;
  out.eigenvalues = pairs.values;
  out.rank = choose_rank(pairs.values, mu);
  out.w1 = pairs.vectors.leftCols(static_cast<Eigen::Index>(out.rank));
  out.mu = mu;
  out.n_grad_samples = n_grad_samples;
  return out;
}

Eigen::VectorXd project(const Eigen::MatrixXd& w1, const Eigen::VectorXd& x) {
  if (x.size() != w1.rows()) throw DimensionMismatch("projection input has wrong dimension");
  return w1.transpose() * x;
}

std::uint64_t fd_cost(std::uint64_t dimension, std::uint64_t n_samples) {
  return n_samples * (dimension + 1);
}

}  // namespace sashpcfe
