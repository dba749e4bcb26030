#include "sashpcfe/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "sashpcfe/error.hpp"

namespace sashpcfe {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

ReliabilityResult make_result(const std::string& method, std::uint64_t failures, std::size_t n,
                              std::uint64_t seed) {
  ReliabilityResult r;
  r.method = method;
  r.pf = static_cast<double>(failures) / static_cast<double>(n);
  r.beta = reliability_index(r.pf);
  r.cov = mc_cov(r.pf, n);
  r.seed = seed;
  return r;
}

// Standardized sample chunk `c` of the MCS stream.
void standardized_chunk(const UniformStream& stream, std::uint64_t c, Eigen::MatrixXd& block) {
  stream.fill_chunk(c, block);
  block = (2.0 * block.array() - 1.0).matrix();
}

Eigen::MatrixXd sobol_standardized(std::size_t n, std::size_t d, std::uint64_t skip) {
  const SampleMatrix u = sobol_points(n, d, skip);
  return (2.0 * u.values.array() - 1.0).matrix();
}

BatchPredictor spce_predictor(const SparsePceModel& model) {
  return [&model](const Eigen::MatrixXd& xi) { return model.predict(xi); };
}

void collect_scatter(const BatchPredictor& reduced_predict, const Eigen::MatrixXd& w1, std::size_t dimension,
                     const PipelineConfig& config, PipelineArtifacts& art) {
  const std::size_t n = std::min(config.scatter_points, config.n_mcs);
  const UniformStream stream(config.seed, dimension);
  art.scatter_z.resize(static_cast<Eigen::Index>(n), w1.cols());
  art.scatter_label.assign(n, 0);
  std::size_t done = 0;
  for (std::uint64_t c = 0; done < n; ++c) {
    const std::size_t rows = std::min(UniformStream::kChunkRows, n - done);
    Eigen::MatrixXd block(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dimension));
    standardized_chunk(stream, c, block);
    const Eigen::MatrixXd z = block * w1;
    const Eigen::VectorXd g = reduced_predict(z);
    art.scatter_z.middleRows(static_cast<Eigen::Index>(done), static_cast<Eigen::Index>(rows)) = z;
    for (std::size_t i = 0; i < rows; ++i) art.scatter_label[done + i] = g[static_cast<Eigen::Index>(i)] < 0.0 ? 1 : 0;
    done += rows;
  }
}

}  // namespace

LimitState counting(const LimitState& inner, std::shared_ptr<std::uint64_t> counter) {
  LimitState out = inner;
  auto fn = inner.evaluate;
  out.evaluate = [fn, counter](std::span<const double> x) {
    ++*counter;
    return fn(x);
  };
  return out;
}

double reliability_index(double pf) {
  if (!(pf >= 0.0 && pf <= 1.0)) throw ParameterDomainError("failure probability must lie in [0, 1]");
  if (pf == 0.0) return std::numeric_limits<double>::infinity();
  if (pf == 1.0) return -std::numeric_limits<double>::infinity();
  return kSqrt2 * boost::math::erfc_inv(2.0 * pf);
}

double failure_probability(double beta) {
  return 0.5 * std::erfc(beta / kSqrt2);
}

std::optional<double> mc_cov(double pf, std::size_t n) {
  if (!(pf > 0.0) || n == 0) return std::nullopt;
  return std::sqrt((1.0 - pf) / (static_cast<double>(n) * pf));
}

ReliabilityResult mcs_standardized(const BatchPredictor& predict, std::size_t dimension, std::size_t n,
                                   std::uint64_t seed, const std::string& method) {
  if (n < 1) throw ParameterDomainError("Monte Carlo sample size must be at least 1");
  const UniformStream stream(seed, dimension);
  std::uint64_t failures = 0;
  std::size_t done = 0;
  Eigen::MatrixXd block;
  for (std::uint64_t c = 0; done < n; ++c) {
    const std::size_t rows = std::min(UniformStream::kChunkRows, n - done);
    block.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dimension));
    standardized_chunk(stream, c, block);
    const Eigen::VectorXd g = predict(block);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        std::ostringstream msg;
        msg << "non-finite limit-state value at sample " << done + static_cast<std::size_t>(i);
        throw NumericalError(msg.str());
      }
      if (g[i] < 0.0) ++failures;
    }
    done += rows;
  }
  ReliabilityResult r = make_result(method, failures, n, seed);
  r.n_surrogate_evals = n;
  return r;
}

ReliabilityResult mcs_probability(const LimitState& limit_state, const ProbabilisticModel& model, std::size_t n,
                                  std::uint64_t seed) {
  if (limit_state.dimension != model.dimension()) throw DimensionMismatch("limit state and model dimensions differ");
  auto predict = [&](const Eigen::MatrixXd& xi) {
    const std::size_t d = model.dimension();
    Eigen::VectorXd g(xi.rows());
    std::vector<double> row(d), x(d);
    for (Eigen::Index i = 0; i < xi.rows(); ++i) {
      for (std::size_t k = 0; k < d; ++k) row[k] = xi(i, static_cast<Eigen::Index>(k));
      legendre_to_physical(model, row, x);
      g[i] = limit_state.evaluate(x);
    }
    return g;
  };
  ReliabilityResult r = mcs_standardized(predict, model.dimension(), n, seed, "mcs");
  r.n_model_evals = n;
  r.n_surrogate_evals = 0;
  return r;
}

void PipelineConfig::validate() const {
  if (n_train < 2) throw ConfigError("training size N_s must be at least 2");
  if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("threshold mu must lie in (0, 1)");
  if (n_mcs < 1) throw ConfigError("Monte Carlo sample size must be at least 1");
  if (lar.p_max < 1) throw ConfigError("p_max must be at least 1");
  hpcfe.validate();
}

std::size_t PipelineConfig::gradient_samples(std::size_t dimension) const {
  return n_grad ? n_grad : 10 * dimension;
}

TrainingSet training_design(const LimitState& limit_state, const ProbabilisticModel& model, std::size_t n) {
  const std::size_t d = model.dimension();
  if (limit_state.dimension != d) throw DimensionMismatch("limit state and model dimensions differ");
  TrainingSet t;
  t.xi = sobol_standardized(n, d, 0);
  t.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  t.y.resize(static_cast<Eigen::Index>(n));
  std::vector<double> row(d), x(d);
  for (Eigen::Index i = 0; i < t.xi.rows(); ++i) {
    for (std::size_t k = 0; k < d; ++k) row[k] = t.xi(i, static_cast<Eigen::Index>(k));
    legendre_to_physical(model, row, x);
    for (std::size_t k = 0; k < d; ++k) t.x(i, static_cast<Eigen::Index>(k)) = x[k];
    t.y[i] = limit_state.evaluate(x);
    if (!std::isfinite(t.y[i])) {
      std::ostringstream msg;
      msg << "non-finite limit-state value at training point " << i;
      throw NumericalError(msg.str());
    }
  }
  return t;
}

PipelineOutput sas_hpcfe_pipeline(const LimitState& limit_state, const ProbabilisticModel& model,
                                  const PipelineConfig& config) {
  config.validate();
  const std::size_t d = model.dimension();
  auto counter = std::make_shared<std::uint64_t>(0);
  const TrainingSet train = training_design(counting(limit_state, counter), model, config.n_train);

  PipelineOutput out;
  PipelineArtifacts& art = out.artifacts;
  art.spce = fit_lar(train.xi, train.y, config.lar);
  const SparsePceModel& spce = *art.spce;
  for (const auto& w : spce.warnings) art.warnings.push_back("S-PCE: " + w);

  const std::size_t n_grad = config.gradient_samples(d);
  const Eigen::MatrixXd grad_points = sobol_standardized(n_grad, d, config.n_train);
  const Eigen::MatrixXd c = estimate_c(
      [&spce](const Eigen::VectorXd& xi) { return spce.gradient(std::span<const double>(xi.data(), xi.size())); },
      grad_points);
  art.subspace = build_active_subspace(c, config.mu, n_grad);
  const ActiveSubspace& sub = *art.subspace;
  if (sub.rank == d) art.warnings.push_back("active subspace rank equals the input dimension; no reduction");
  art.fd_cost = fd_cost(d, n_grad);

  const Eigen::MatrixXd z = sub.project_rows(train.xi);
  art.hpcfe = fit_hpcfe(z, train.y, config.hpcfe);
  const HpcfeModel& hp = *art.hpcfe;
  for (const auto& w : hp.state().warnings) art.warnings.push_back("H-PCFE: " + w);

  const Eigen::MatrixXd w1 = sub.w1;
  const BatchPredictor reduced = [&hp](const Eigen::MatrixXd& zb) { return hp.predict_mean(zb); };
  const BatchPredictor full = [&hp, &w1](const Eigen::MatrixXd& xi) {
    return hp.predict_mean(Eigen::MatrixXd(xi * w1));
  };
  out.result = mcs_standardized(full, d, config.n_mcs, config.seed, "sas-hpcfe");
  out.result.n_model_evals = *counter;
  out.result.rank = sub.rank;
  collect_scatter(reduced, w1, d, config, art);
  return out;
}

PipelineOutput spce_only_pipeline(const LimitState& limit_state, const ProbabilisticModel& model,
                                  const PipelineConfig& config) {
  config.validate();
  const std::size_t d = model.dimension();
  auto counter = std::make_shared<std::uint64_t>(0);
  const TrainingSet train = training_design(counting(limit_state, counter), model, config.n_train);
  PipelineOutput out;
  out.artifacts.spce = fit_lar(train.xi, train.y, config.lar);
  for (const auto& w : out.artifacts.spce->warnings) out.artifacts.warnings.push_back("S-PCE: " + w);
  out.result = mcs_standardized(spce_predictor(*out.artifacts.spce), d, config.n_mcs, config.seed, "spce");
  out.result.n_model_evals = *counter;
  return out;
}

std::vector<ConvergenceRow> convergence_study(const std::function<ReliabilityResult(std::size_t)>& run,
                                              const std::vector<std::size_t>& schedule) {
  std::vector<ConvergenceRow> rows;
  for (std::size_t n : schedule) {
    ConvergenceRow row;
    row.n_train = n;
    row.beta = run(n).beta;
    if (!rows.empty()) {
      const double prev = rows.back().beta;
      if (std::isfinite(prev) && std::isfinite(row.beta) && prev != 0.0) {
        row.converged = std::abs(row.beta - prev) / std::abs(prev) < 0.01;
      } else {
        row.converged = prev == row.beta;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::size_t> doubling_schedule(std::size_t start, std::size_t stop) {
  if (start < 1) throw ParameterDomainError("schedule start must be at least 1");
  std::vector<std::size_t> out;
  for (std::size_t n = start; n <= stop; n *= 2) out.push_back(n);
  return out;
}

}  // namespace sashpcfe
