#include <doctest.h>

#include <cmath>
#include <memory>

#include "sashpcfe/error.hpp"
#include "sashpcfe/reliability.hpp"

using namespace sashpcfe;

namespace {

LimitState make_ls(std::size_t dim, std::function<double(std::span<const double>)> fn) {
  LimitState ls;
  ls.name = "synthetic";
  ls.dimension = dim;
  ls.evaluate = std::move(fn);
  return ls;
}

ProbabilisticModel unit_box(std::size_t dim, double lo, double hi) {
  std::vector<Variable> vars;
  for (std::size_t i = 0; i < dim; ++i) vars.push_back({"x" + std::to_string(i + 1), Marginal::uniform(lo, hi)});
  return ProbabilisticModel(std::move(vars));
}

}  // namespace

TEST_CASE("reliability index examples") {
  CHECK(reliability_index(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(reliability_index(0.0177) == doctest::Approx(2.1038).epsilon(5e-5));
  CHECK(reliability_index(0.0018) == doctest::Approx(2.9112).epsilon(5e-5));
  CHECK(std::isinf(reliability_index(0.0)));
  CHECK(reliability_index(0.0) > 0.0);
  CHECK(reliability_index(1.0) < 0.0);
  CHECK_THROWS_AS(reliability_index(1.5), ParameterDomainError);
}

TEST_CASE("pf and beta round trip") {
  for (double pf = 1e-7; pf < 1.0; pf *= 1.7) {
    CHECK(std::abs(failure_probability(reliability_index(pf)) - pf) <= 1e-12);
  }
}

TEST_CASE("Monte Carlo coefficient of variation") {
  CHECK(*mc_cov(0.5, 100) == doctest::Approx(0.1));
  CHECK_FALSE(mc_cov(0.0, 100));
}

TEST_CASE("always-safe limit state") {
  const ReliabilityResult r = mcs_probability(make_ls(2, [](std::span<const double>) { return 1.0; }),
                                              unit_box(2, 0.0, 1.0), 1000, 4);
  CHECK(r.pf == 0.0);
  CHECK(std::isinf(r.beta));
  CHECK_FALSE(r.cov);
  CHECK(r.n_model_evals == 1000);
}

TEST_CASE("uniform threshold estimator") {
  const LimitState ls = make_ls(1, [](std::span<const double> x) { return x[0] - 0.5; });
  const ReliabilityResult r = mcs_probability(ls, unit_box(1, 0.0, 1.0), 1000000, 11);
  CHECK(std::abs(r.pf - 0.5) <= 0.0015);
  REQUIRE(r.cov);
  CHECK(*r.cov == doctest::Approx(std::sqrt(0.5 / (1e6 * 0.5))));

  const std::size_t n = 2000;
  double mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) mean += mcs_probability(ls, unit_box(1, 0.0, 1.0), n, seed).pf;
  mean /= 50.0;
  CHECK(std::abs(mean - 0.5) <= 3.0 * 0.5 / std::sqrt(50.0 * n));
}

TEST_CASE("estimates are deterministic per seed") {
  const LimitState ls = make_ls(3, [](std::span<const double> x) { return 1.2 - x[0] - x[1] * x[2]; });
  const ProbabilisticModel m = unit_box(3, 0.0, 1.0);
  CHECK(mcs_probability(ls, m, 5000, 9).pf == mcs_probability(ls, m, 5000, 9).pf);
}

TEST_CASE("non-finite limit-state values are reported") {
  const LimitState ls = make_ls(1, [](std::span<const double> x) { return x[0] > 0.9 ? std::nan("") : 1.0; });
  CHECK_THROWS_WITH_AS(mcs_probability(ls, unit_box(1, 0.0, 1.0), 100, 1), doctest::Contains("sample"),
                       NumericalError);
}

TEST_CASE("counting wrapper") {
  auto counter = std::make_shared<std::uint64_t>(0);
  const LimitState ls = counting(make_ls(1, [](std::span<const double> x) { return x[0]; }), counter);
  const double x = 0.25;
  for (int i = 0; i < 7; ++i) ls.evaluate(std::span<const double>(&x, 1));
  CHECK(*counter == 7);
}

TEST_CASE("convergence study flags") {
  const std::vector<double> betas{2.0, 2.1, 2.105};
  std::size_t call = 0;
  auto run = [&](std::size_t) {
    ReliabilityResult r;
    r.beta = betas[call++];
    return r;
  };
  const auto rows = convergence_study(run, doubling_schedule(200, 800));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].n_train == 200);
  CHECK(rows[2].n_train == 800);
  CHECK_FALSE(rows[0].converged);
  CHECK_FALSE(rows[1].converged);
  CHECK(rows[2].converged);

  call = 0;
  const auto single = convergence_study(run, {100});
  REQUIRE(single.size() == 1);
  CHECK_FALSE(single[0].converged);
}

TEST_CASE("convergence of a trend-only quadratic") {
  const ProbabilisticModel m = unit_box(3, -1.0, 1.0);
  const LimitState ls = make_ls(3, [](std::span<const double> x) { return 0.9 - x[0] * x[0] - 0.5 * x[1] + 0.2 * x[2]; });
  PipelineConfig cfg;
  cfg.lar.p_max = 2;
  cfg.n_mcs = 20000;
  const std::size_t cardinality = 10;
  auto run = [&](std::size_t n) {
    cfg.n_train = n;
    return spce_only_pipeline(ls, m, cfg).result;
  };
  const auto rows = convergence_study(run, {5, 10, 20, 40});
  const double exact = mcs_probability(ls, m, cfg.n_mcs, cfg.seed).pf;
  for (const auto& row : rows) {
    if (row.n_train > cardinality) CHECK(std::abs(failure_probability(row.beta) - exact) <= 2.0 / cfg.n_mcs);
  }
  CHECK(rows[2].n_train == 20);
  CHECK(rows[3].converged);
}

TEST_CASE("S-PCE pipeline on constant limit states") {
  const ProbabilisticModel m = unit_box(2, -1.0, 1.0);
  PipelineConfig cfg;
  cfg.n_train = 20;
  cfg.n_mcs = 1000;
  CHECK(spce_only_pipeline(make_ls(2, [](std::span<const double>) { return -1.0; }), m, cfg).result.pf == 1.0);
  CHECK(spce_only_pipeline(make_ls(2, [](std::span<const double>) { return 2.0; }), m, cfg).result.pf == 0.0);
}

TEST_CASE("S-PCE pipeline reproduces a polynomial generator") {
  const ProbabilisticModel m = unit_box(4, -1.0, 1.0);
  const LimitState ls = make_ls(4, [](std::span<const double> x) { return 0.6 - x[0] * x[1] - 0.5 * x[2] * x[2]; });
  PipelineConfig cfg;
  cfg.n_train = 120;
  cfg.lar.p_max = 3;
  cfg.n_mcs = 50000;
  const PipelineOutput out = spce_only_pipeline(ls, m, cfg);
  const ReliabilityResult direct = mcs_probability(ls, m, cfg.n_mcs, cfg.seed);
  CHECK(std::abs(out.result.pf - direct.pf) <= 3.0 * *direct.cov * direct.pf);
  CHECK(out.result.n_model_evals == 120);
}

TEST_CASE("SAS-HPCFE pipeline on an additive two-variable problem") {
  // g = 1.5 - x1^2 - x2 with x ~ U[-1, 1]^6: pf = (1/2) [t^3/3 - t/2] from sqrt(1/2) to 1.
  const double s = std::sqrt(0.5);
  const double pf = 0.5 * ((1.0 / 3.0 - 0.5) - (s * s * s / 3.0 - 0.5 * s));
  const ProbabilisticModel m = unit_box(6, -1.0, 1.0);
  auto counter = std::make_shared<std::uint64_t>(0);
  const LimitState ls =
      counting(make_ls(6, [](std::span<const double> x) { return 1.5 - x[0] * x[0] - x[1]; }), counter);
  PipelineConfig cfg;
  cfg.n_train = 150;
  cfg.lar.p_max = 3;
  cfg.n_mcs = 100000;
  const PipelineOutput out = sas_hpcfe_pipeline(ls, m, cfg);
  CHECK(out.result.rank == 2);
  CHECK(out.result.n_model_evals == 150);
  CHECK(*counter == 150);
  CHECK(out.artifacts.fd_cost == fd_cost(6, 60));
  const double cov = *mc_cov(pf, cfg.n_mcs);
  CHECK(std::abs(out.result.pf - pf) <= 3.0 * cov * pf);
  REQUIRE(out.artifacts.subspace);
  CHECK(out.artifacts.subspace->w1.rows() == 6);
  CHECK(out.artifacts.scatter_z.rows() == static_cast<Eigen::Index>(cfg.scatter_points));

  cfg.mu = 0.5;
  const PipelineOutput lower = sas_hpcfe_pipeline(ls, m, cfg);
  CHECK(lower.result.rank <= out.result.rank);
}

TEST_CASE("pipeline configuration validation") {
  PipelineConfig cfg;
  cfg.mu = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.mu = 0.98;
  cfg.n_train = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(PipelineConfig{}.gradient_samples(7) == 70);
}
