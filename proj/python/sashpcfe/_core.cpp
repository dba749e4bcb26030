#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sashpcfe/activesub.hpp"
#include "sashpcfe/benchmarks.hpp"
#include "sashpcfe/error.hpp"
#include "sashpcfe/hpcfe.hpp"
#include "sashpcfe/probspace.hpp"
#include "sashpcfe/reliability.hpp"
#include "sashpcfe/spce.hpp"
#include "sashpcfe/study.hpp"

namespace py = pybind11;
using namespace sashpcfe;

namespace {

py::dict result_dict(const ReliabilityResult& r) {
  py::dict d;
  d["method"] = r.method;
  d["pf"] = r.pf;
  d["beta"] = r.beta;
  d["n_model_evals"] = r.n_model_evals;
  d["n_surrogate_evals"] = r.n_surrogate_evals;
  d["cov"] = r.cov ? py::cast(*r.cov) : py::none();
  d["r"] = r.rank ? py::cast(r.rank) : py::none();
  d["seed"] = r.seed;
  return d;
}

Eigen::VectorXd evaluate_rows(const LimitState& ls, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != ls.dimension) throw DimensionMismatch("input has the wrong number of columns");
  Eigen::VectorXd g(x.rows());
  std::vector<double> row(ls.dimension);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k < ls.dimension; ++k) row[k] = x(i, static_cast<Eigen::Index>(k));
    g[i] = ls.evaluate(row);
  }
  return g;
}

PipelineConfig pipeline_config(const Benchmark& b, std::size_t n_train, std::size_t n_mcs, std::uint64_t seed,
                               double mu) {
  PipelineConfig cfg;
  cfg.n_train = n_train ? n_train : b.sas_train;
  cfg.n_mcs = n_mcs ? n_mcs : b.mcs_samples;
  cfg.seed = seed;
  cfg.mu = mu;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse active subspace and hybrid PCFE surrogates for reliability analysis";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<ParameterDomainError>(m, "ParameterDomainError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<UnsupportedDimension>(m, "UnsupportedDimension", base.ptr());

  m.def("sobol_points", [](std::size_t n, std::size_t d, std::uint64_t skip) { return sobol_points(n, d, skip).values; },
        py::arg("n"), py::arg("d"), py::arg("skip") = 0, "Unscrambled Sobol points in [0, 1)^d.");
  m.def("reliability_index", &reliability_index, py::arg("pf"));
  m.def("failure_probability", &failure_probability, py::arg("beta"));
  m.def("fd_cost", &fd_cost, py::arg("dimension"), py::arg("n_samples"));
  m.def("benchmark_names", &benchmark_names);

  m.def(
      "limit_state",
      [](const std::string& name, const Eigen::MatrixXd& x) { return evaluate_rows(make_benchmark(name).limit_state, x); },
      py::arg("name"), py::arg("x"), "Evaluates a benchmark limit state on rows of physical inputs.");
  m.def(
      "mcs",
      [](const std::string& name, std::size_t n, std::uint64_t seed, bool truncation) {
        const Benchmark b = make_benchmark(name, truncation);
        py::gil_scoped_release release;
        const ReliabilityResult r = mcs_probability(b.limit_state, b.model, n ? n : b.mcs_samples, seed);
        py::gil_scoped_acquire acquire;
        return result_dict(r);
      },
      py::arg("name"), py::arg("n") = 0, py::arg("seed") = 20240601, py::arg("truncation") = false);
  m.def(
      "sas_hpcfe",
      [](const std::string& name, std::size_t n_train, std::size_t n_mcs, std::uint64_t seed, double mu,
         bool truncation) {
        const Benchmark b = make_benchmark(name, truncation);
        const PipelineConfig cfg = pipeline_config(b, n_train, n_mcs, seed, mu);
        PipelineOutput out;
        {
          py::gil_scoped_release release;
          out = sas_hpcfe_pipeline(b.limit_state, b.model, cfg);
        }
        py::dict d = result_dict(out.result);
        d["eigenvalues"] = out.artifacts.subspace->eigenvalues;
        d["fd_cost"] = out.artifacts.fd_cost;
        return d;
      },
      py::arg("name"), py::arg("n_train") = 0, py::arg("n_mcs") = 0, py::arg("seed") = 20240601,
      py::arg("mu") = 0.98, py::arg("truncation") = false);

  py::class_<SparsePceModel>(m, "SparsePce")
      .def_readonly("intercept", &SparsePceModel::intercept)
      .def_readonly("coefficients", &SparsePceModel::coefficients)
      .def_readonly("loo_error", &SparsePceModel::loo_error)
      .def_property_readonly("indices",
                             [](const SparsePceModel& s) {
                               std::vector<std::vector<unsigned>> out;
                               for (const MultiIndex& mi : s.basis.indices()) out.push_back(mi.dense(s.dimension));
                               return out;
                             })
      .def("predict", [](const SparsePceModel& s, const Eigen::MatrixXd& xi) { return s.predict(xi); })
      .def("gradient", [](const SparsePceModel& s, const Eigen::VectorXd& xi) {
        return s.gradient(std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size())));
      });
  m.def(
      "fit_spce",
      [](const Eigen::MatrixXd& xi, const Eigen::VectorXd& y, unsigned p_max) {
        LarOptions o;
        o.p_max = p_max;
        return fit_lar(xi, y, o);
      },
      py::arg("xi"), py::arg("y"), py::arg("p_max") = 5, "Sparse PCE by hybrid LAR on standardized inputs.");

  py::class_<HpcfeModel>(m, "Hpcfe")
      .def_property_readonly("theta", [](const HpcfeModel& h) { return h.state().theta; })
      .def_property_readonly("sigma2", [](const HpcfeModel& h) { return h.state().sigma2; })
      .def("predict_mean", [](const HpcfeModel& h, const Eigen::MatrixXd& z) { return h.predict_mean(z); })
      .def("predict_variance", [](const HpcfeModel& h, const Eigen::MatrixXd& z) {
        Eigen::VectorXd out(z.rows());
        for (Eigen::Index i = 0; i < z.rows(); ++i) out[i] = h.predict_variance(Eigen::VectorXd(z.row(i).transpose()));
        return out;
      });
  m.def(
      "fit_hpcfe",
      [](const Eigen::MatrixXd& z, const Eigen::VectorXd& y, unsigned max_order, unsigned basis_degree) {
        HpcfeConfig c;
        c.max_order = max_order;
        c.basis_degree = basis_degree;
        return fit_hpcfe(z, y, c);
      },
      py::arg("z"), py::arg("y"), py::arg("max_order") = 2, py::arg("basis_degree") = 3);

  m.def(
      "run_study",
      [](const std::string& config, const std::string& out) {
        StudyConfig c = load_study_config(config);
        if (!out.empty()) c.output_dir = out;
        std::ostringstream log;
        py::list rows;
        for (const StudyRow& r : run_study(c, log)) {
          py::dict d = result_dict(r.result);
          d["error_pct"] = r.error_pct ? py::cast(*r.error_pct) : py::none();
          rows.append(d);
        }
        return rows;
      },
      py::arg("config"), py::arg("out") = "", "Runs a study config; returns one dict per method.");
}
