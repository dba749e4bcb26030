#include "sashpcfe/spce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sashpcfe/error.hpp"

namespace sashpcfe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Candidate columns psi_beta(xi^(i)) evaluated on demand from a table of
// univariate values, so the full design matrix is never stored.
class CandidateColumns {
 public:
  CandidateColumns(const Eigen::MatrixXd& xi, const BasisSet& candidates, unsigned p)
      : candidates_(candidates), stride_(p + 1) {
    const Eigen::Index ns = xi.rows();
    const auto n = static_cast<std::size_t>(xi.cols());
    uni_.resize(ns, static_cast<Eigen::Index>(n * stride_));
    std::vector<double> values(stride_);
    for (std::size_t v = 0; v < n; ++v) {
      for (Eigen::Index i = 0; i < ns; ++i) {
        legendre_values(p, xi(i, static_cast<Eigen::Index>(v)), values);
        for (std::size_t k = 0; k < stride_; ++k) {
          uni_(i, static_cast<Eigen::Index>(v * stride_ + k)) = values[k];
        }
      }
    }
    tmp_.resize(ns);
  }

  Eigen::Index rows() const { return uni_.rows(); }

  void column(std::size_t j, Eigen::VectorXd& out) const {
    out.setOnes(uni_.rows());
    for (const Factor& f : candidates_[j].factors()) out.array() *= uni_.col(index(f)).array();
  }

  double dot(std::size_t j, const Eigen::VectorXd& v) const {
    const auto factors = candidates_[j].factors();
    switch (factors.size()) {
      case 1:
        return uni_.col(index(factors[0])).dot(v);
      case 2:
        return (uni_.col(index(factors[0])).array() * uni_.col(index(factors[1])).array() *
                v.array())
            .sum();
      default: {
        tmp_ = uni_.col(index(factors[0]));
        for (std::size_t a = 1; a + 1 < factors.size(); ++a) {
          tmp_.array() *= uni_.col(index(factors[a])).array();
        }
        return (tmp_.array() * uni_.col(index(factors.back())).array() * v.array()).sum();
      }
    }
  }

 private:
  Eigen::Index index(const Factor& f) const {
    return static_cast<Eigen::Index>(f.var * stride_ + f.degree);
  }

  const BasisSet& candidates_;
  std::size_t stride_;
  Eigen::MatrixXd uni_;
  mutable Eigen::VectorXd tmp_;
};

void validate_training(const Eigen::MatrixXd& xi, const Eigen::VectorXd& y, unsigned p_max) {
  if (xi.rows() != y.size()) throw DimensionMismatch("training inputs and responses differ in length");
  if (xi.rows() < 3) throw ParameterDomainError("sparse PCE needs at least 3 training points");
  if (xi.cols() < 1) throw ParameterDomainError("sparse PCE needs at least one input");
  if (p_max < 1) throw ParameterDomainError("p_max must be >= 1");
  if (!y.allFinite()) throw NumericalError("training responses must be finite");
}

double corrected_factor(double ns, double terms, double trace_term) {
  if (ns <= terms) return kInf;
  return ns / (ns - terms) * (1.0 + trace_term);
}

}  // namespace

double SparsePceModel::predict(std::span<const double> xi) const {
  if (xi.size() != dimension) throw DimensionMismatch("prediction point has wrong dimension");
  if (basis.empty()) return intercept;
  return intercept + eval_multibasis(xi, basis).dot(coefficients);
}

Eigen::VectorXd SparsePceModel::predict(const Eigen::MatrixXd& xi) const {
  if (static_cast<std::size_t>(xi.cols()) != dimension) {
    throw DimensionMismatch("prediction points have wrong dimension");
  }
  if (basis.empty()) return Eigen::VectorXd::Constant(xi.rows(), intercept);
  return (design_matrix(xi, basis) * coefficients).array() + intercept;
}

Eigen::VectorXd SparsePceModel::gradient(std::span<const double> xi) const {
  if (xi.size() != dimension) throw DimensionMismatch("gradient point has wrong dimension");
  if (basis.empty()) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension));
  return eval_multibasis_grad(xi, basis).transpose() * coefficients;
}

LooScore loo_error(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& y) {
  const Eigen::Index n = regressors.rows();
  const Eigen::Index p = regressors.cols();
  if (y.size() != n) throw DimensionMismatch("regressors and responses differ in length");
  if (p == 0 || n <= p) return {kInf, kInf, false};

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(regressors);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const double rmin = r.diagonal().cwiseAbs().minCoeff();
  if (!(rmin > 1e-12 * r.diagonal().cwiseAbs().maxCoeff())) {
    throw NumericalError("loo_error: regressor matrix is rank deficient");
  }
  const Eigen::VectorXd resid = y - q * (q.transpose() * y);
  const Eigen::VectorXd hat = q.rowwise().squaredNorm();

  const double mean = y.mean();
  double var = (y.array() - mean).square().mean();
  if (!(var > 0.0)) var = 1.0;

  LooScore score;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = 1.0 - hat[i];
    if (denom < 1e-10) {
      score.reliable = false;
      score.raw = kInf;
      score.corrected = kInf;
      return score;
    }
    const double v = resid[i] / denom;
    sum += v * v;
  }
  score.raw = sum / static_cast<double>(n) / var;
  const Eigen::MatrixXd rinv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  score.corrected = score.raw * corrected_factor(static_cast<double>(n), static_cast<double>(p),
                                                 rinv.squaredNorm());
  return score;
}

BasisSet lar_candidates(std::size_t dimension, const LarOptions& options) {
  std::size_t order = options.max_interaction;
  if (order == 0) {
    order = 1;
    const std::size_t top = std::min<std::size_t>(dimension, options.p_max);
    for (std::size_t q = top; q >= 1; --q) {
      if (total_degree_cardinality(dimension, options.p_max, q) <= options.candidate_limit + 1) {
        order = q;
        break;
      }
    }
  }
  BasisSet full = BasisSet::total_degree(dimension, options.p_max, order);
  std::vector<MultiIndex> rest(full.indices().begin() + 1, full.indices().end());
  return BasisSet(dimension, std::move(rest));
}

LarPath lar_path(const Eigen::MatrixXd& xi, const Eigen::VectorXd& y, const LarOptions& options) {
  validate_training(xi, y, options.p_max);
  const auto dim = static_cast<std::size_t>(xi.cols());
  const Eigen::Index ns = xi.rows();
  const double nsd = static_cast<double>(ns);

  LarPath path;
  path.candidates = lar_candidates(dim, options);
  const std::size_t nc = path.candidates.size();
  const CandidateColumns cols(xi, path.candidates, options.p_max);

  // Column standardization.
  Eigen::VectorXd mean(static_cast<Eigen::Index>(nc));
  Eigen::VectorXd norm(static_cast<Eigen::Index>(nc));
  std::vector<char> usable(nc, 0);
  Eigen::VectorXd raw(ns);
  std::size_t n_usable = 0;
  for (std::size_t j = 0; j < nc; ++j) {
    cols.column(j, raw);
    const auto jj = static_cast<Eigen::Index>(j);
    mean[jj] = raw.mean();
    norm[jj] = (raw.array() - mean[jj]).matrix().norm();
    if (norm[jj] > 1e-10 * raw.norm()) {
      usable[j] = 1;
      ++n_usable;
    } else {
      norm[jj] = 1.0;
    }
  }

  const double ybar = y.mean();
  const Eigen::VectorXd yc = y.array() - ybar;
  const double var_y = yc.squaredNorm() / nsd;
  if (yc.norm() <= 1e-13 * (std::abs(ybar) + 1.0) * std::sqrt(nsd) || n_usable == 0) {
    path.best_size = 0;
    path.best_loo = 0.0;
    if (n_usable == 0 && yc.norm() > 0.0) {
      path.warnings.push_back("no usable candidate columns; returning the constant model");
    }
    return path;
  }

  auto correlate = [&](const Eigen::VectorXd& v) {
    const double sum_v = v.sum();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nc));
    for (std::size_t j = 0; j < nc; ++j) {
      if (!usable[j]) continue;
      const auto jj = static_cast<Eigen::Index>(j);
      out[jj] = (cols.dot(j, v) - mean[jj] * sum_v) / norm[jj];
    }
    return out;
  };

  const std::size_t m_max = std::min<std::size_t>(n_usable, static_cast<std::size_t>(ns) - 1);
  const std::size_t window =
      options.early_stop_window > 0 ? options.early_stop_window : std::max<std::size_t>(20, m_max / 10);

  // OLS/LOO state: thin QR of [1, psi_A] in the raw orthonormal-basis scale.
  const auto cap = static_cast<Eigen::Index>(m_max + 1);
  Eigen::MatrixXd q(ns, cap);
  Eigen::MatrixXd rinv = Eigen::MatrixXd::Zero(cap, cap);
  q.col(0).setConstant(1.0 / std::sqrt(nsd));
  rinv(0, 0) = 1.0 / std::sqrt(nsd);
  double frob = rinv(0, 0) * rinv(0, 0);
  Eigen::VectorXd resid = yc;
  Eigen::VectorXd hat = Eigen::VectorXd::Constant(ns, 1.0 / nsd);

  // LAR state on standardized columns.
  Eigen::MatrixXd xa(ns, static_cast<Eigen::Index>(m_max));
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_max),
                                               static_cast<Eigen::Index>(m_max));
  Eigen::VectorXd signs(static_cast<Eigen::Index>(m_max));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_max));
  std::vector<char> in_model(nc, 0);
  Eigen::Index k = 0;

  Eigen::VectorXd c = correlate(yc);
  double c0 = 0.0;
  for (std::size_t j = 0; j < nc; ++j) {
    if (usable[j]) c0 = std::max(c0, std::abs(c[static_cast<Eigen::Index>(j)]));
  }

  auto loo_now = [&]() {
    const double terms = static_cast<double>(k + 1);
    if (nsd <= terms) return kInf;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < ns; ++i) {
      const double denom = 1.0 - hat[i];
      if (denom < 1e-10) return kInf;
      const double v = resid[i] / denom;
      sum += v * v;
    }
    return sum / nsd / var_y * corrected_factor(nsd, terms, frob);
  };

  path.best_size = 0;
  path.best_loo = loo_now();
  std::size_t steps_since_best = 0;

  Eigen::VectorXd col_raw(ns);
  Eigen::VectorXd x(ns);
  auto try_enter = [&](std::size_t j) {
    cols.column(j, col_raw);
    const double col_norm = col_raw.norm();
    // Twice-iterated Gram-Schmidt against the current Q.
    Eigen::VectorXd coef = q.leftCols(k + 1).transpose() * col_raw;
    Eigen::VectorXd v = col_raw - q.leftCols(k + 1) * coef;
    const Eigen::VectorXd coef2 = q.leftCols(k + 1).transpose() * v;
    v -= q.leftCols(k + 1) * coef2;
    coef += coef2;
    const double rho = v.norm();
    if (!(rho > 1e-10 * col_norm)) return false;

    const auto jj = static_cast<Eigen::Index>(j);
    x = (col_raw.array() - mean[jj]) / norm[jj];
    Eigen::VectorXd l;
    double d2 = x.squaredNorm();
    if (k > 0) {
      const Eigen::VectorXd g = xa.leftCols(k).transpose() * x;
      l = chol.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(g);
      d2 -= l.squaredNorm();
    }
    if (!(d2 > 1e-10)) return false;

    // Commit to both factorizations.
    const Eigen::Index qk = k + 1;
    q.col(qk) = v / rho;
    resid -= q.col(qk).dot(resid) * q.col(qk);
    hat.array() += q.col(qk).array().square();
    Eigen::VectorXd top = -(rinv.topLeftCorner(qk, qk).triangularView<Eigen::Upper>() * coef) / rho;
    rinv.col(qk).head(qk) = top;
    rinv(qk, qk) = 1.0 / rho;
    frob += top.squaredNorm() + 1.0 / (rho * rho);

    xa.col(k) = x;
    if (k > 0) chol.row(k).head(k) = l.transpose();
    chol(k, k) = std::sqrt(d2);
    signs[k] = c[jj] >= 0.0 ? 1.0 : -1.0;
    beta[k] = 0.0;
    ++k;
    return true;
  };

  auto record = [&](std::size_t j, bool dropped, double loo) {
    LarStep step;
    step.entered = j;
    step.dropped = dropped;
    step.loo = loo;
    step.min_active_corr = kInf;
    for (Eigen::Index a = 0; a < k; ++a) {
      const double v = std::abs(c[static_cast<Eigen::Index>(path.active[static_cast<std::size_t>(a)])]);
      step.max_active_corr = std::max(step.max_active_corr, v);
      step.min_active_corr = std::min(step.min_active_corr, v);
    }
    if (k == 0) step.min_active_corr = 0.0;
    for (std::size_t i = 0; i < nc; ++i) {
      if (usable[i] && !in_model[i]) {
        step.max_inactive_corr = std::max(step.max_inactive_corr, std::abs(c[static_cast<Eigen::Index>(i)]));
      }
    }
    if (options.record_path) {
      for (Eigen::Index a = 0; a < k; ++a) {
        step.lar_coefficients.emplace_back(path.active[static_cast<std::size_t>(a)], beta[a]);
      }
    }
    path.steps.push_back(std::move(step));
  };

  auto select_max = [&]() -> std::ptrdiff_t {
    std::ptrdiff_t best = -1;
    double best_c = -1.0;
    for (std::size_t j = 0; j < nc; ++j) {
      if (!usable[j] || in_model[j]) continue;
      const double v = std::abs(c[static_cast<Eigen::Index>(j)]);
      if (v > best_c) {
        best_c = v;
        best = static_cast<std::ptrdiff_t>(j);
      }
    }
    return best;
  };

  std::ptrdiff_t next = select_max();
  while (next >= 0) {
    const auto j = static_cast<std::size_t>(next);
    in_model[j] = 1;
    bool stop = false;
    if (try_enter(j)) {
      path.active.push_back(j);
      const double loo = loo_now();
      record(j, false, loo);
      if (loo < path.best_loo * (1.0 - 1e-9) - 1e-15) {
        path.best_loo = loo;
        path.best_size = path.active.size();
        steps_since_best = 0;
      } else {
        ++steps_since_best;
      }
      if (static_cast<std::size_t>(k) >= m_max) stop = true;
      if (options.early_stop && steps_since_best >= window) stop = true;
      if (resid.squaredNorm() <= 1e-26 * yc.squaredNorm()) stop = true;
    } else {
      std::ostringstream msg;
      msg << "candidate term " << j << " is collinear with the active set and was dropped";
      path.warnings.push_back(msg.str());
      record(j, true, kInf);
    }
    if (stop) break;
    if (k == 0) {
      next = select_max();
      continue;
    }

    // Equiangular direction for the active set.
    double big_c = 0.0;
    for (Eigen::Index a = 0; a < k; ++a) {
      big_c = std::max(big_c, std::abs(c[static_cast<Eigen::Index>(path.active[static_cast<std::size_t>(a)])]));
    }
    if (big_c <= 1e-13 * c0) break;
    const auto lk = chol.topLeftCorner(k, k).triangularView<Eigen::Lower>();
    Eigen::VectorXd w = lk.solve(signs.head(k));
    w = lk.transpose().solve(w);
    const double norm_a = 1.0 / std::sqrt(signs.head(k).dot(w));
    w *= norm_a;
    const Eigen::VectorXd u = xa.leftCols(k) * w;
    const Eigen::VectorXd acorr = correlate(u);

    double gamma = big_c / norm_a;
    next = -1;
    for (std::size_t i = 0; i < nc; ++i) {
      if (!usable[i] || in_model[i]) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const double d1 = norm_a - acorr[ii];
      if (d1 > 1e-14) {
        const double g = (big_c - c[ii]) / d1;
        if (g > 0.0 && g < gamma) {
          gamma = g;
          next = static_cast<std::ptrdiff_t>(i);
        }
      }
      const double d2 = norm_a + acorr[ii];
      if (d2 > 1e-14) {
        const double g = (big_c + c[ii]) / d2;
        if (g > 0.0 && g < gamma) {
          gamma = g;
          next = static_cast<std::ptrdiff_t>(i);
        }
      }
    }
    c -= gamma * acorr;
    beta.head(k) += gamma * w;
  }
  return path;
}

SparsePceModel fit_lar(const Eigen::MatrixXd& xi, const Eigen::VectorXd& y, const LarOptions& options) {
  LarPath path = lar_path(xi, y, options);
  SparsePceModel model;
  model.dimension = static_cast<std::size_t>(xi.cols());
  model.p_max = options.p_max;
  model.warnings = path.warnings;

  if (path.best_size == 0) {
    model.intercept = y.mean();
    model.basis = BasisSet(model.dimension, {});
    model.coefficients.resize(0);
    model.loo_error = path.best_loo;
    return model;
  }

  const std::size_t k = path.best_size;
  std::vector<MultiIndex> terms;
  terms.reserve(k);
  for (std::size_t a = 0; a < k; ++a) terms.push_back(path.candidates[path.active[a]]);
  const BasisSet selected(model.dimension, terms);

  Eigen::MatrixXd psi(xi.rows(), static_cast<Eigen::Index>(k + 1));
  psi.col(0).setOnes();
  psi.rightCols(static_cast<Eigen::Index>(k)) = design_matrix(xi, selected);
  const Eigen::VectorXd coef = psi.colPivHouseholderQr().solve(y);
  model.intercept = coef[0];
  model.coefficients = coef.tail(static_cast<Eigen::Index>(k));
  model.basis = selected;
  model.loo_error = loo_error(psi, y).corrected;
  return model;
}

}  // namespace sashpcfe
