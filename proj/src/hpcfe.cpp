#include "sashpcfe/hpcfe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sashpcfe/error.hpp"
#include "sashpcfe/probspace.hpp"

namespace sashpcfe {

namespace {

constexpr double kSigma2Floor = 1e-300;

// Orthonormal Legendre values without a domain check; scaled prediction
// inputs may fall slightly outside [-1, 1].
void legendre_unchecked(unsigned p, double t, double* out) {
  double prev = 1.0;
  double cur = t;
  out[0] = 1.0;
  if (p >= 1) out[1] = std::sqrt(3.0) * t;
  for (unsigned n = 1; n < p; ++n) {
    const double next = ((2.0 * n + 1.0) * t * cur - n * prev) / (n + 1.0);
    prev = cur;
    cur = next;
    out[n + 1] = std::sqrt(2.0 * (n + 1) + 1.0) * next;
  }
}

Eigen::RowVectorXd basis_row(const double* z, std::size_t r, const BasisSet& basis, unsigned p) {
  std::vector<double> table(r * (p + 1));
  for (std::size_t k = 0; k < r; ++k) legendre_unchecked(p, z[k], table.data() + k * (p + 1));
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    double v = 1.0;
    for (const Factor& f : basis[j].factors()) v *= table[f.var * (p + 1) + f.degree];
    row[static_cast<Eigen::Index>(j)] = v;
  }
  return row;
}

Eigen::MatrixXd basis_rows(const Eigen::MatrixXd& z, const BasisSet& basis) {
  const unsigned p = basis.max_degree();
  const std::size_t r = static_cast<std::size_t>(z.cols());
  Eigen::MatrixXd out(z.rows(), static_cast<Eigen::Index>(basis.size()));
  std::vector<double> point(r);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (std::size_t k = 0; k < r; ++k) point[k] = z(i, static_cast<Eigen::Index>(k));
    out.row(i) = basis_row(point.data(), r, basis, p);
  }
  return out;
}

// Every exponent assignment in 1..degree over the variables in `vars`.
void append_full_support(const std::vector<std::uint32_t>& vars, unsigned degree,
                         std::vector<MultiIndex>& out) {
  std::vector<std::uint32_t> exps(vars.size(), 1);
  while (true) {
    std::vector<Factor> factors;
    factors.reserve(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) factors.push_back({vars[i], exps[i]});
    out.emplace_back(std::move(factors));
    std::size_t i = vars.size();
    while (i > 0) {
      --i;
      if (exps[i] < degree) {
        ++exps[i];
        std::fill(exps.begin() + static_cast<std::ptrdiff_t>(i) + 1, exps.end(), 1u);
        break;
      }
      if (i == 0) return;
    }
    if (vars.empty()) return;
  }
}

// Calls fn for each combination of `k` indices out of 0..n-1, in lexicographic order.
template <class Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n) return;
  std::vector<std::uint32_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0u);
  while (true) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

struct GlsSolution {
  CorrelationFactor factor;
  Eigen::VectorXd alpha;
  Eigen::VectorXd weights;  // R^-1 (d - Psi alpha)
  double sigma2 = 0.0;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  bool fallback = false;
};

GlsSolution solve_gls(const Eigen::MatrixXd& z, const Eigen::VectorXd& d, const Eigen::MatrixXd& psi,
                      const Eigen::VectorXd& theta, const HpcfeConfig& config) {
  GlsSolution out;
  out.factor = factor_correlation(z, theta, config.nugget);
  const Eigen::LLT<Eigen::MatrixXd>& llt = out.factor.llt;
  const Eigen::MatrixXd rinv_psi = llt.solve(psi);
  const Eigen::VectorXd rinv_d = llt.solve(d);
  const Eigen::MatrixXd a = psi.transpose() * rinv_psi;
  const Eigen::VectorXd b = psi.transpose() * rinv_d;
  const HomotopyResult h = homotopy_solve(0.5 * (a + a.transpose()), b, config.weight);
  out.alpha = h.alpha;
  out.fallback = h.fallback;
  out.weights = rinv_d - rinv_psi * out.alpha;
  const Eigen::VectorXd resid = d - psi * out.alpha;
  const double n = static_cast<double>(d.size());
  out.sigma2 = std::max(resid.dot(out.weights) / n, kSigma2Floor);
  const Eigen::MatrixXd& l = llt.matrixLLT();
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  out.log_likelihood = -0.5 * n * std::log(out.sigma2) - 0.5 * logdet;
  return out;
}

// Orthonormal basis of the orthogonal complement of range(Psi).
Eigen::MatrixXd range_complement(const Eigen::MatrixXd& psi) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(psi * psi.transpose());
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double tol = 1e-10 * std::max(lam.maxCoeff(), 0.0);
  Eigen::Index k = 0;
  while (k < lam.size() && !(lam[k] > tol)) ++k;
  return es.eigenvectors().leftCols(k);
}

// Concentrated log-likelihood for W = I, where the homotopy solution equals the
// minimum-norm GLS solution. For q' <= n it works in whitened form G = L^-1 Psi;
// for q' > n the GLS residual form is d^T Q (Q^T R Q)^-1 Q^T d with Q spanning
// the complement of range(Psi).
double min_norm_log_likelihood(const Eigen::MatrixXd& z, const Eigen::VectorXd& d, const Eigen::MatrixXd& psi,
                               const Eigen::VectorXd& theta, const HpcfeConfig& config,
                               const Eigen::MatrixXd* complement = nullptr) {
  const CorrelationFactor factor = factor_correlation(z, theta, config.nugget);
  const Eigen::Index n = psi.rows();
  double rss = 0.0;
  if (psi.cols() <= n) {
    const auto l = factor.llt.matrixL();
    const Eigen::MatrixXd g = l.solve(psi);
    const Eigen::VectorXd dt = l.solve(d);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.transpose() * g);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double tol = 1e-10 * std::max(lam.maxCoeff(), 0.0);
    Eigen::VectorXd c = es.eigenvectors().transpose() * (g.transpose() * dt);
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = lam[i] > tol && lam[i] > 0.0 ? c[i] / lam[i] : 0.0;
    rss = (dt - g * (es.eigenvectors() * c)).squaredNorm();
  } else {
    const Eigen::MatrixXd q = complement ? *complement : range_complement(psi);
    if (q.cols() > 0) {
      const Eigen::MatrixXd rq = correlation_matrix(z, theta, factor.nugget) * q;
      const Eigen::LLT<Eigen::MatrixXd> small(q.transpose() * rq);
      if (small.info() != Eigen::Success) throw NumericalError("projected correlation matrix is not positive definite");
      const Eigen::VectorXd v = q.transpose() * d;
      rss = v.dot(small.solve(v));
    }
  }
  const double nd = static_cast<double>(n);
  const double sigma2 = std::max(rss / nd, kSigma2Floor);
  const double logdet = 2.0 * factor.llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * nd * std::log(sigma2) - 0.5 * logdet;
}

// Bounded Nelder-Mead minimisation; points are clamped into [lo, hi].
struct NmResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
};

template <class Fn>
NmResult nelder_mead(Fn&& f, const Eigen::VectorXd& x0, double lo, double hi, std::size_t max_evals) {
  const Eigen::Index n = x0.size();
  auto clamp = [&](Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < n; ++i) v[i] = std::clamp(v[i], lo, hi);
    return v;
  };
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  std::size_t evals = 0;
  auto eval = [&](const Eigen::VectorXd& v) {
    ++evals;
    const double y = f(v);
    return std::isfinite(y) ? y : std::numeric_limits<double>::infinity();
  };
  const double step = 0.15 * (hi - lo);
  pts.push_back(clamp(x0));
  vals.push_back(eval(pts[0]));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = pts[0];
    v[i] += (v[i] + step <= hi) ? step : -step;
    pts.push_back(clamp(v));
    vals.push_back(eval(pts.back()));
  }
  std::vector<std::size_t> order(static_cast<std::size_t>(n) + 1);
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    double size = 0.0;
    for (const auto& p : pts) size = std::max(size, (p - pts[best]).cwiseAbs().maxCoeff());
    const double spread = vals[worst] - vals[best];
    if (size < 1e-6 || (std::isfinite(spread) && spread <= 1e-10 * (1.0 + std::abs(vals[best])) && size < 1e-3)) {
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= static_cast<double>(n);
    const Eigen::VectorXd xr = clamp(centroid + (centroid - pts[worst]));
    const double fr = eval(xr);
    if (fr < vals[best]) {
      const Eigen::VectorXd xe = clamp(centroid + 2.0 * (centroid - pts[worst]));
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = eval(pts[i]);
    }
  }
  NmResult out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (vals[i] < out.f || !out.x.size()) {
      out.f = vals[i];
      out.x = pts[i];
    }
  }
  return out;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace

void HpcfeConfig::validate() const {
  if (max_order < 1) throw ConfigError("H-PCFE max_order must be at least 1");
  if (basis_degree < 1) throw ConfigError("H-PCFE basis_degree must be at least 1");
  if (!(nugget >= 0.0) || !std::isfinite(nugget)) throw ConfigError("H-PCFE nugget must be non-negative");
  if (!(theta_lo > 0.0) || !(theta_hi >= theta_lo) || !std::isfinite(theta_hi)) {
    throw ConfigError("H-PCFE theta bounds must satisfy 0 < lo <= hi");
  }
  if (restarts < 1) throw ConfigError("H-PCFE restarts must be at least 1");
  if (max_evaluations < 1) throw ConfigError("H-PCFE max_evaluations must be at least 1");
}

ReducedScaling ReducedScaling::from_training(const Eigen::MatrixXd& z, double margin) {
  if (z.rows() < 1 || z.cols() < 1) throw DimensionMismatch("empty training inputs");
  ReducedScaling s;
  s.lo = z.colwise().minCoeff().transpose();
  s.hi = z.colwise().maxCoeff().transpose();
  for (Eigen::Index k = 0; k < z.cols(); ++k) {
    double width = s.hi[k] - s.lo[k];
    if (!(width > 0.0)) width = std::max(1.0, std::abs(s.lo[k]));
    s.lo[k] -= margin * width;
    s.hi[k] += margin * width;
  }
  return s;
}

Eigen::VectorXd ReducedScaling::apply(const Eigen::VectorXd& z) const {
  if (z.size() != lo.size()) throw DimensionMismatch("reduced input has wrong dimension");
  return (2.0 * (z - lo).array() / (hi - lo).array() - 1.0).matrix();
}

Eigen::MatrixXd ReducedScaling::apply(const Eigen::MatrixXd& z) const {
  if (z.cols() != lo.size()) throw DimensionMismatch("reduced input has wrong dimension");
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) out.row(i) = apply(Eigen::VectorXd(z.row(i).transpose())).transpose();
  return out;
}

bool ReducedScaling::contains(const Eigen::VectorXd& z) const {
  if (z.size() != lo.size()) return false;
  return ((z - lo).array() >= 0.0).all() && ((hi - z).array() >= 0.0).all();
}

std::vector<MultiIndex> pcfe_extended_bases(std::size_t dimension, unsigned max_order, unsigned degree) {
  if (dimension < 1) throw ParameterDomainError("H-PCFE needs at least one reduced variable");
  if (degree < 1) throw ParameterDomainError("component basis degree must be at least 1");
  std::vector<MultiIndex> out;
  const std::size_t top = std::min<std::size_t>(max_order, dimension);
  for (std::size_t order = 1; order <= top; ++order) {
    for_each_combination(dimension, order, [&](const std::vector<std::uint32_t>& comp) {
      // Extended basis of this component: terms supported on each non-empty subset.
      for (std::size_t k = 1; k <= comp.size(); ++k) {
        for_each_combination(comp.size(), k, [&](const std::vector<std::uint32_t>& sel) {
          std::vector<std::uint32_t> vars;
          for (std::uint32_t s : sel) vars.push_back(comp[s]);
          append_full_support(vars, degree, out);
        });
      }
    });
  }
  return out;
}

BasisSet pcfe_basis(std::size_t dimension, unsigned max_order, unsigned degree) {
  std::vector<MultiIndex> raw = pcfe_extended_bases(dimension, max_order, degree);
  std::sort(raw.begin(), raw.end(), canonical_less);
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
  return BasisSet(dimension, std::move(raw));
}

DesignMatrix build_design_matrix(const Eigen::MatrixXd& z_scaled, const HpcfeConfig& config) {
  BasisSet basis = pcfe_basis(static_cast<std::size_t>(z_scaled.cols()), config.max_order, config.basis_degree);
  Eigen::MatrixXd psi = basis_rows(z_scaled, basis);
  return {std::move(psi), std::move(basis)};
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& z, const Eigen::VectorXd& theta, double nugget) {
  if (theta.size() != z.cols()) throw DimensionMismatch("theta length differs from input dimension");
  const Eigen::Index n = z.rows();
  Eigen::MatrixXd r(n, n);
  const Eigen::MatrixXd zt = z.transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    r(j, j) = 1.0 + nugget;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double s = (theta.array() * (zt.col(i) - zt.col(j)).array().square()).sum();
      r(i, j) = r(j, i) = std::exp(-s);
    }
  }
  return r;
}

CorrelationFactor factor_correlation(const Eigen::MatrixXd& z, const Eigen::VectorXd& theta, double nugget) {
  Eigen::MatrixXd r = correlation_matrix(z, theta, 0.0);
  double jitter = nugget;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Eigen::MatrixXd rj = r;
    rj.diagonal().array() += jitter;
    CorrelationFactor f{Eigen::LLT<Eigen::MatrixXd>(rj), jitter};
    if (f.llt.info() == Eigen::Success && f.llt.matrixLLT().diagonal().minCoeff() > 0.0) return f;
    jitter = (jitter > 0.0 ? jitter : 1e-12) * 10.0;
  }
  std::ostringstream msg;
  msg << "correlation matrix is not positive definite (final nugget " << jitter / 10.0 << ")";
  throw NumericalError(msg.str());
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rtol) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() ? s.maxCoeff() : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > rtol * smax && s[i] > 0.0) inv[i] = 1.0 / s[i];
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

HomotopyResult homotopy_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& weight) {
  const Eigen::Index q = a.rows();
  if (a.cols() != q || b.size() != q) throw DimensionMismatch("homotopy_solve: A' must be q x q and B' length q");
  if (weight.size() != 0 && (weight.rows() != q || weight.cols() != q)) {
    throw DimensionMismatch("homotopy weight must be q x q");
  }
  HomotopyResult out;
  const Eigen::MatrixXd a_pinv = pseudo_inverse(a);
  out.alpha0 = a_pinv * b;
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(q, q) - a_pinv * a;
  const Eigen::MatrixXd pw = weight.size() ? Eigen::MatrixXd(p * weight) : p;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(pw, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() ? s.maxCoeff() : 0.0;
  std::size_t rank = 0;
  if (smax > 1e-12) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s[i] > 1e-10 * smax) ++rank;
    }
  }
  out.weighted_rank = rank;
  const Eigen::Index tail = q - static_cast<Eigen::Index>(rank);
  if (tail == 0) {
    out.alpha = out.alpha0;
    out.fallback = true;
    return out;
  }
  const Eigen::MatrixXd u2 = svd.matrixU().rightCols(tail);
  const Eigen::MatrixXd v2 = svd.matrixV().rightCols(tail);
  const Eigen::MatrixXd block = u2.transpose() * v2;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(block);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) {
    out.alpha = out.alpha0;
    out.fallback = true;
    return out;
  }
  out.alpha = v2 * lu.solve(Eigen::VectorXd(u2.transpose() * out.alpha0));
  return out;
}

double profile_log_likelihood(const Eigen::MatrixXd& z_scaled, const Eigen::VectorXd& d, const Eigen::MatrixXd& psi,
                              const Eigen::VectorXd& theta, const HpcfeConfig& config) {
  try {
    if (config.weight.size() == 0) return min_norm_log_likelihood(z_scaled, d, psi, theta, config);
    return solve_gls(z_scaled, d, psi, theta, config).log_likelihood;
  } catch (const NumericalError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

std::vector<Eigen::VectorXd> theta_starts(std::size_t dimension, const HpcfeConfig& config) {
  const double lo = std::log10(config.theta_lo);
  const double hi = std::log10(config.theta_hi);
  const SampleMatrix u = sobol_points(config.restarts, dimension);
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index i = 0; i < u.values.rows(); ++i) {
    Eigen::VectorXd t(static_cast<Eigen::Index>(dimension));
    for (Eigen::Index k = 0; k < t.size(); ++k) t[k] = std::pow(10.0, lo + (hi - lo) * u.values(i, k));
    out.push_back(t);
  }
  return out;
}

HpcfeModel::HpcfeModel(HpcfeState state) : state_(std::move(state)) {
  const Eigen::Index n = state_.z_train.rows();
  const Eigen::Index r = state_.z_train.cols();
  if (n < 1 || r < 1) throw DimensionMismatch("H-PCFE model has no training data");
  if (state_.d.size() != n) throw DimensionMismatch("H-PCFE residual length differs from training size");
  if (state_.theta.size() != r) throw DimensionMismatch("H-PCFE theta length differs from dimension");
  if (state_.basis.dimension() != static_cast<std::size_t>(r)) throw DimensionMismatch("H-PCFE basis dimension");
  if (state_.alpha.size() != static_cast<Eigen::Index>(state_.basis.size())) {
    throw DimensionMismatch("H-PCFE coefficient count differs from basis size");
  }
  if (state_.scaling.lo.size() != r || state_.scaling.hi.size() != r) throw DimensionMismatch("H-PCFE scaling box");
  max_degree_ = state_.basis.max_degree();
  psi_ = basis_rows(state_.z_train, state_.basis);
  Eigen::MatrixXd rm = correlation_matrix(state_.z_train, state_.theta, state_.nugget);
  llt_.compute(rm);
  if (llt_.info() != Eigen::Success) throw NumericalError("H-PCFE correlation matrix is not positive definite");
  weights_ = llt_.solve(Eigen::VectorXd(state_.d - psi_ * state_.alpha));
  const Eigen::MatrixXd a = psi_.transpose() * llt_.solve(psi_);
  gls_pinv_ = pseudo_inverse(0.5 * (a + a.transpose()));
}

Eigen::VectorXd HpcfeModel::cross_correlation(const Eigen::VectorXd& zs) const {
  const Eigen::Index n = state_.z_train.rows();
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < zs.size(); ++k) {
      const double dz = state_.z_train(i, k) - zs[k];
      s += state_.theta[k] * dz * dz;
    }
    r[i] = std::exp(-s);
  }
  return r;
}

double HpcfeModel::trend(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd zs = state_.scaling.apply(z);
  return state_.g0 + basis_row(zs.data(), dimension(), state_.basis, max_degree_).dot(state_.alpha);
}

double HpcfeModel::predict_mean(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd zs = state_.scaling.apply(z);
  const double t = basis_row(zs.data(), dimension(), state_.basis, max_degree_).dot(state_.alpha);
  return state_.g0 + t + cross_correlation(zs).dot(weights_);
}

Eigen::VectorXd HpcfeModel::predict_mean(const Eigen::MatrixXd& z) const {
  if (z.cols() != static_cast<Eigen::Index>(dimension())) throw DimensionMismatch("reduced input has wrong dimension");
  Eigen::VectorXd out(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) out[i] = predict_mean(Eigen::VectorXd(z.row(i).transpose()));
  return out;
}

double HpcfeModel::predict_variance(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd zs = state_.scaling.apply(z);
  const Eigen::VectorXd r = cross_correlation(zs);
  const Eigen::VectorXd rinv_r = llt_.solve(r);
  const Eigen::RowVectorXd phi = basis_row(zs.data(), dimension(), state_.basis, max_degree_);
  const Eigen::VectorXd u = psi_.transpose() * rinv_r - phi.transpose();
  const double s2 = state_.sigma2 * (1.0 - r.dot(rinv_r) + u.dot(gls_pinv_ * u));
  return std::max(s2, 0.0);
}

HpcfeModel fit_hpcfe(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const HpcfeConfig& config) {
  config.validate();
  if (z.rows() != y.size()) throw DimensionMismatch("H-PCFE inputs and outputs differ in length");
  if (z.rows() < 2 || z.cols() < 1) throw ParameterDomainError("H-PCFE needs at least two training points");
  if (!z.allFinite() || !y.allFinite()) throw NumericalError("H-PCFE training data contain non-finite values");

  HpcfeState st;
  st.scaling = ReducedScaling::from_training(z);
  st.z_train = st.scaling.apply(z);
  st.g0 = y.mean();
  st.d = y.array() - st.g0;
  DesignMatrix dm = build_design_matrix(st.z_train, config);
  st.basis = std::move(dm.basis);
  const Eigen::MatrixXd& psi = dm.psi;
  if (config.weight.size() != 0 &&
      (config.weight.rows() != psi.cols() || config.weight.cols() != psi.cols())) {
    throw ConfigError("homotopy weight must be q' x q' with q' the trend basis size");
  }
  if (psi.cols() >= z.rows()) {
    st.warnings.push_back("trend basis size is not smaller than the training set");
  }

  const double lo = std::log10(config.theta_lo);
  const double hi = std::log10(config.theta_hi);
  Eigen::MatrixXd complement;
  const bool wide = config.weight.size() == 0 && psi.cols() > psi.rows();
  if (wide) complement = range_complement(psi);
  auto objective = [&](const Eigen::VectorXd& log_theta) {
    const Eigen::VectorXd theta = log_theta.unaryExpr([](double v) { return std::pow(10.0, v); });
    if (!wide) return -profile_log_likelihood(st.z_train, st.d, psi, theta, config);
    try {
      return -min_norm_log_likelihood(st.z_train, st.d, psi, theta, config, &complement);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Eigen::VectorXd best_log;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& start : theta_starts(static_cast<std::size_t>(z.cols()), config)) {
    const Eigen::VectorXd x0 = start.array().log10().matrix();
    const NmResult res = nelder_mead(objective, x0, lo, hi, config.max_evaluations);
    const double ll = -res.f;
    if (!best_log.size() || ll > best_ll || (ll == best_ll && lex_less(res.x, best_log))) {
      best_ll = ll;
      best_log = res.x;
    }
  }
  if (!std::isfinite(best_ll)) throw NumericalError("no admissible length scales: correlation matrix singular everywhere");

  st.theta = best_log.unaryExpr([](double v) { return std::pow(10.0, v); });
  for (Eigen::Index k = 0; k < best_log.size(); ++k) {
    if (best_log[k] <= lo + 1e-6 || best_log[k] >= hi - 1e-6) {
      std::ostringstream msg;
      msg << "length scale " << k << " at its search bound (theta = " << st.theta[k] << ")";
      st.warnings.push_back(msg.str());
    }
  }
  const GlsSolution gls = solve_gls(st.z_train, st.d, psi, st.theta, config);
  if (gls.fallback && config.weight.size() != 0) {
    st.warnings.push_back("homotopy block singular; minimum-norm trend coefficients used");
  }
  if (gls.factor.nugget != config.nugget) {
    std::ostringstream msg;
    msg << "nugget raised to " << gls.factor.nugget << " for a stable factorisation";
    st.warnings.push_back(msg.str());
  }
  st.alpha = gls.alpha;
  st.sigma2 = gls.sigma2;
  st.nugget = gls.factor.nugget;
  st.log_likelihood = best_ll;
  return HpcfeModel(std::move(st));
}

}  // namespace sashpcfe
