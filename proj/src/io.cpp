#include "sashpcfe/io.hpp"

#include <fstream>
#include <sstream>

#include "sashpcfe/error.hpp"

namespace sashpcfe::io {

namespace {

Json vec(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vec_from(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
  return v;
}

// Row-major nested arrays.
Json mat(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec(m.row(i).transpose()));
  return out;
}

Eigen::MatrixXd mat_from(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("ragged matrix in JSON");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

Json basis_json(const BasisSet& basis) {
  Json out = Json::array();
  for (const MultiIndex& mi : basis.indices()) out.push_back(mi.dense(basis.dimension()));
  return out;
}

BasisSet basis_from(std::size_t dimension, const Json& j) {
  std::vector<MultiIndex> terms;
  for (const Json& row : j) {
    const auto dense = row.get<std::vector<unsigned>>();
    if (dense.size() != dimension) throw ConfigError("multi-index length differs from dimension");
    terms.push_back(MultiIndex::from_dense(dense));
  }
  return BasisSet(dimension, std::move(terms));
}

template <class Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json to_json(const Marginal& m) {
  Json j;
  j["distribution"] = to_string(m.kind());
  j["mean"] = m.mean();
  j["sd"] = m.sd();
  if (m.truncation()) j["truncation"] = {m.truncation()->lo, m.truncation()->hi};
  return j;
}

Marginal marginal_from_json(const Json& j) {
  return guarded("marginal", [&] {
    const MarginalKind kind = marginal_kind_from_string(j.at("distribution").get<std::string>());
    const double mean = j.at("mean").get<double>();
    const double sd = j.at("sd").get<double>();
    Marginal m = [&] {
      switch (kind) {
        case MarginalKind::Uniform: {
          const DistributionParams p = moment_match(kind, mean, sd);
          return Marginal::uniform(p.first, p.second);
        }
        case MarginalKind::Normal:
          return Marginal::normal(mean, sd);
        case MarginalKind::Lognormal:
          return Marginal::lognormal(mean, sd);
        case MarginalKind::Gumbel:
          return Marginal::gumbel(mean, sd);
      }
      throw ConfigError("unknown distribution");
    }();
    if (j.contains("truncation")) {
      const Json& t = j.at("truncation");
      m = m.truncated({t.at(0).get<double>(), t.at(1).get<double>()});
    }
    return m;
  });
}

Json to_json(const ProbabilisticModel& model) {
  Json out = Json::array();
  for (const Variable& v : model.variables()) {
    Json j;
    j["name"] = v.name;
    const Json m = to_json(v.marginal);
    for (const auto& [k, val] : m.items()) j[k] = val;
    out.push_back(j);
  }
  return out;
}

ProbabilisticModel model_from_json(const Json& j) {
  return guarded("probabilistic model", [&] {
    if (!j.is_array() || j.empty()) throw ConfigError("probabilistic model must be a non-empty array");
    std::vector<Variable> vars;
    for (const Json& v : j) vars.push_back({v.at("name").get<std::string>(), marginal_from_json(v)});
    return ProbabilisticModel(std::move(vars));
  });
}

Json to_json(const SparsePceModel& model) {
  Json j;
  j["dimension"] = model.dimension;
  j["p_max"] = model.p_max;
  j["intercept"] = model.intercept;
  j["indices"] = basis_json(model.basis);
  j["coefficients"] = vec(model.coefficients);
  j["loo_error"] = model.loo_error;
  return j;
}

SparsePceModel spce_from_json(const Json& j) {
  return guarded("sparse PCE", [&] {
    SparsePceModel m;
    m.dimension = j.at("dimension").get<std::size_t>();
    m.p_max = j.at("p_max").get<unsigned>();
    m.intercept = j.at("intercept").get<double>();
    m.basis = basis_from(m.dimension, j.at("indices"));
    m.coefficients = vec_from(j.at("coefficients"));
    m.loo_error = j.at("loo_error").get<double>();
    if (m.coefficients.size() != static_cast<Eigen::Index>(m.basis.size())) {
      throw ConfigError("sparse PCE coefficient count differs from index count");
    }
    return m;
  });
}

Json to_json(const ActiveSubspace& s) {
  Json j;
  j["eigenvalues"] = vec(s.eigenvalues);
  j["W1"] = mat(s.w1);
  j["r"] = s.rank;
  j["mu"] = s.mu;
  j["n_grad_samples"] = s.n_grad_samples;
  return j;
}

ActiveSubspace subspace_from_json(const Json& j) {
  return guarded("active subspace", [&] {
    ActiveSubspace s;
    s.eigenvalues = vec_from(j.at("eigenvalues"));
    s.w1 = mat_from(j.at("W1"));
    s.rank = j.at("r").get<std::size_t>();
    s.mu = j.at("mu").get<double>();
    s.n_grad_samples = j.value("n_grad_samples", std::size_t{0});
    if (static_cast<std::size_t>(s.w1.cols()) != s.rank) throw ConfigError("W1 column count differs from r");
    return s;
  });
}

Json to_json(const HpcfeModel& model) {
  const HpcfeState& s = model.state();
  Json j;
  j["dimension"] = model.dimension();
  j["g0"] = s.g0;
  j["indices"] = basis_json(s.basis);
  j["alpha"] = vec(s.alpha);
  j["theta"] = vec(s.theta);
  j["sigma2"] = s.sigma2;
  j["nugget"] = s.nugget;
  j["log_likelihood"] = s.log_likelihood;
  j["scaling"] = {{"lo", vec(s.scaling.lo)}, {"hi", vec(s.scaling.hi)}};
  j["z_train"] = mat(s.z_train);
  j["d"] = vec(s.d);
  j["warnings"] = s.warnings;
  return j;
}

HpcfeModel hpcfe_from_json(const Json& j) {
  return guarded("H-PCFE model", [&] {
    HpcfeState s;
    const auto dim = j.at("dimension").get<std::size_t>();
    s.g0 = j.at("g0").get<double>();
    s.basis = basis_from(dim, j.at("indices"));
    s.alpha = vec_from(j.at("alpha"));
    s.theta = vec_from(j.at("theta"));
    s.sigma2 = j.at("sigma2").get<double>();
    s.nugget = j.at("nugget").get<double>();
    s.log_likelihood = j.value("log_likelihood", 0.0);
    s.scaling.lo = vec_from(j.at("scaling").at("lo"));
    s.scaling.hi = vec_from(j.at("scaling").at("hi"));
    s.z_train = mat_from(j.at("z_train"));
    s.d = vec_from(j.at("d"));
    if (j.contains("warnings")) s.warnings = j.at("warnings").get<std::vector<std::string>>();
    return HpcfeModel(std::move(s));
  });
}

Json to_json(const TrussGeometry& g) {
  Json j;
  Json nodes = Json::array();
  for (const auto& n : g.nodes) nodes.push_back({n[0], n[1], n[2]});
  j["nodes"] = nodes;
  Json elements = Json::array();
  for (const auto& e : g.elements) elements.push_back({e[0], e[1]});
  j["elements"] = elements;
  j["supports"] = g.supports;
  Json loads = Json::object();
  const char* axes = "xyz";
  for (std::size_t i = 0; i < g.loads.size(); ++i) {
    const TrussLoad& l = g.loads[i];
    std::string axis = (l.sign < 0 ? "-" : "") + std::string(1, axes[l.axis]);
    loads["P" + std::to_string(i + 1)] = {l.node, axis};
  }
  j["loads"] = loads;
  j["horizontal"] = g.horizontal == HorizontalMeasure::Planar ? "planar" : "component";
  return j;
}

Json to_json(const ReliabilityResult& r) {
  Json j;
  j["method"] = r.method;
  j["pf"] = r.pf;
  j["beta"] = std::isfinite(r.beta) ? Json(r.beta) : Json(r.beta > 0 ? "inf" : "-inf");
  j["n_model_evals"] = r.n_model_evals;
  j["n_surrogate_evals"] = r.n_surrogate_evals;
  j["cov"] = r.cov ? Json(*r.cov) : Json(nullptr);
  j["r"] = r.rank ? Json(r.rank) : Json(nullptr);
  j["seed"] = r.seed;
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

}  // namespace sashpcfe::io
