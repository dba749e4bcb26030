#include "sashpcfe/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sashpcfe/error.hpp"

namespace sashpcfe {

double sobol_g(std::span<const double> x, std::span<const double> a, double b) {
  if (x.size() != a.size()) throw DimensionMismatch("sobol_g: x and a differ in length");
  double prod = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw DomainError("sobol_g: x outside [0, 1]");
    if (!(a[i] >= 0.0)) throw ParameterDomainError("sobol_g: coefficients must be non-negative");
    prod *= (std::abs(4.0 * x[i] - 2.0) + a[i]) / (1.0 + a[i]);
  }
  return prod - b;
}

std::vector<double> sobol_coefficients(std::size_t m) {
  if (m < 2) throw ParameterDomainError("Sobol benchmark needs m >= 2");
  std::vector<double> a(m, 500.0);
  a[0] = 1.0;
  a[1] = 1.0;
  return a;
}

ProbabilisticModel sobol_model(std::size_t m) {
  std::vector<Variable> vars;
  for (std::size_t i = 0; i < m; ++i) vars.push_back({"x" + std::to_string(i + 1), Marginal::uniform(0.0, 1.0)});
  return ProbabilisticModel(std::move(vars));
}

LimitState sobol_limit_state(std::size_t m, double b) {
  const std::vector<double> a = sobol_coefficients(m);
  LimitState ls;
  ls.name = "sobol-m" + std::to_string(m);
  ls.dimension = m;
  ls.evaluate = [a, b](std::span<const double> x) { return sobol_g(x, a, b); };
  return ls;
}

BeamStress beam_stress(std::span<const double> x) {
  if (x.size() != 20) throw DimensionMismatch("beam input must have 20 entries");
  const double a = x[0], b = x[1], c = x[2], d = x[3];
  const double l1 = x[4], l2 = x[5], l3 = x[6], len = x[10];
  const double ea = x[17], ew = x[18];
  if (!(a > 0 && b > 0 && c > 0 && d > 0 && len > 0 && ea > 0 && ew > 0)) {
    throw DomainError("beam section dimensions, span and moduli must be positive");
  }
  const double n = ea / ew;
  const double denom_k = a * b + n * d * c;
  BeamStress s;
  s.k = (0.5 * a * b * b + n * d * c * (b + 0.5 * d)) / denom_k;
  double reaction = 0.0;
  for (int i = 0; i < 6; ++i) reaction += x[11 + i] * (len - x[4 + i]);
  reaction /= len;
  s.moment = reaction * l3 - x[11] * (l3 - l1) - x[12] * (l3 - l2);
  s.inertia = a * b * b * b / 12.0 + a * b * (s.k - 0.5 * b) * (s.k - 0.5 * b) + n * c * d * d * d / 12.0 +
              n * d * c * (b + 0.5 * d - s.k) * (b + 0.5 * d - s.k);
  if (!(s.inertia > 0.0)) throw DomainError("beam section has non-positive second moment");
  s.sigma = s.moment * s.k / s.inertia * 1000.0;
  return s;
}

double beam_limit_state(std::span<const double> x) {
  return x[19] - beam_stress(x).sigma;
}

ProbabilisticModel beam_model(bool truncation) {
  struct Row {
    const char* name;
    double mean, sd;
    MarginalKind kind;
    Interval bounds;
  };
  using K = MarginalKind;
  const Row rows[] = {
      {"A", 100, 0.2, K::Normal, {99.4, 100.6}},   {"B", 200, 0.2, K::Normal, {199.4, 200.6}},
      {"C", 80, 0.2, K::Normal, {79.4, 80.6}},     {"D", 20, 0.2, K::Normal, {19.4, 20.6}},
      {"L1", 200, 1, K::Normal, {197, 203}},       {"L2", 400, 1, K::Normal, {397, 403}},
      {"L3", 600, 1, K::Normal, {597, 603}},       {"L4", 800, 1, K::Normal, {797, 803}},
      {"L5", 1000, 1, K::Normal, {997, 1003}},     {"L6", 1200, 1, K::Normal, {1197, 1203}},
      {"L", 1400, 2, K::Normal, {1394, 1406}},     {"P1", 15, 1.5, K::Gumbel, {5, 19}},
      {"P2", 15, 1.5, K::Gumbel, {5, 19}},         {"P3", 15, 1.5, K::Gumbel, {5, 19}},
      {"P4", 15, 1.5, K::Gumbel, {5, 19}},         {"P5", 15, 1.5, K::Gumbel, {5, 19}},
      {"P6", 15, 1.5, K::Gumbel, {5, 19}},         {"Ea", 70, 7, K::Normal, {49, 91}},
      {"Ew", 8.75, 0.875, K::Normal, {6.125, 11.375}}, {"S", 21, 2.1, K::Gumbel, {16, 35}},
  };
  std::vector<Variable> vars;
  for (const Row& r : rows) {
    Marginal m = r.kind == K::Normal ? Marginal::normal(r.mean, r.sd) : Marginal::gumbel(r.mean, r.sd);
    if (truncation) m = m.truncated(r.bounds);
    vars.push_back({r.name, m});
  }
  return ProbabilisticModel(std::move(vars));
}

LimitState beam_limit_state_fn() {
  LimitState ls;
  ls.name = "composite-beam";
  ls.dimension = 20;
  ls.evaluate = [](std::span<const double> x) { return beam_limit_state(x); };
  return ls;
}

void TrussGeometry::validate() const {
  if (nodes.empty() || elements.empty()) throw ConfigError("truss geometry needs nodes and elements");
  for (const auto& e : elements) {
    if (e[0] >= nodes.size() || e[1] >= nodes.size() || e[0] == e[1]) {
      throw ConfigError("truss element references an invalid node");
    }
  }
  for (std::size_t dof : supports) {
    if (dof >= 3 * nodes.size()) throw ConfigError("truss support DOF out of range");
  }
  if (supports.size() >= 3 * nodes.size()) throw ConfigError("truss has no free DOFs");
  for (const auto& l : loads) {
    if (l.node >= nodes.size() || l.axis < 0 || l.axis > 2) throw ConfigError("truss load references an invalid DOF");
  }
}

TrussGeometry truss_geometry_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("truss geometry: ") + e.what());
  }
  TrussGeometry g;
  try {
    for (const auto& n : j.at("nodes")) g.nodes.push_back({n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>()});
    for (const auto& e : j.at("elements")) g.elements.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>()});
    for (const auto& s : j.at("supports")) g.supports.push_back(s.get<std::size_t>());
    std::map<int, TrussLoad> ordered;
    for (const auto& [key, val] : j.at("loads").items()) {
      if (key.size() < 2 || key[0] != 'P') throw ConfigError("truss load keys must be P1, P2, ...");
      const int idx = std::stoi(key.substr(1));
      TrussLoad load;
      load.node = val.at(0).get<std::size_t>();
      std::string axis = val.at(1).get<std::string>();
      if (!axis.empty() && (axis[0] == '-' || axis[0] == '+')) {
        load.sign = axis[0] == '-' ? -1.0 : 1.0;
        axis = axis.substr(1);
      }
      if (axis == "x") load.axis = 0;
      else if (axis == "y") load.axis = 1;
      else if (axis == "z") load.axis = 2;
      else throw ConfigError("truss load axis must be x, y or z (optionally signed)");
      if (!ordered.emplace(idx, load).second) throw ConfigError("duplicate truss load key " + key);
    }
    int expect = 1;
    for (const auto& [idx, load] : ordered) {
      if (idx != expect++) throw ConfigError("truss load keys must be consecutive from P1");
      g.loads.push_back(load);
    }
    if (j.contains("horizontal")) {
      const std::string h = j.at("horizontal").get<std::string>();
      if (h == "component") g.horizontal = HorizontalMeasure::Component;
      else if (h == "planar") g.horizontal = HorizontalMeasure::Planar;
      else throw ConfigError("truss horizontal measure must be 'component' or 'planar'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("truss geometry: ") + e.what());
  }
  g.validate();
  return g;
}

TrussGeometry load_truss_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open truss geometry file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return truss_geometry_from_json(ss.str());
}

const TrussGeometry& truss25_geometry() {
  static const TrussGeometry g = [] {
    TrussGeometry t;
    t.nodes = {{-37.5, 0, 200},    {37.5, 0, 200},   {-37.5, 37.5, 100}, {37.5, 37.5, 100},
               {37.5, -37.5, 100}, {-37.5, -37.5, 100}, {-100, 100, 0},  {100, 100, 0},
               {100, -100, 0},     {-100, -100, 0}};
    const int conn[25][2] = {{1, 2}, {1, 4}, {2, 3}, {1, 5}, {2, 6},  {2, 4}, {2, 5}, {1, 3}, {1, 6},
                             {3, 6}, {4, 5}, {3, 4}, {5, 6}, {3, 10}, {6, 7}, {4, 9}, {5, 8}, {3, 8},
                             {4, 7}, {6, 9}, {5, 10}, {3, 7}, {4, 8}, {5, 9}, {6, 10}};
    for (const auto& c : conn) t.elements.push_back({static_cast<std::size_t>(c[0] - 1), static_cast<std::size_t>(c[1] - 1)});
    for (std::size_t n = 6; n < 10; ++n) {
      for (std::size_t a = 0; a < 3; ++a) t.supports.push_back(3 * n + a);
    }
    t.loads = {{0, 0, 1.0}, {0, 1, 1.0}, {0, 2, -1.0}, {1, 1, 1.0}, {1, 2, -1.0}, {5, 0, 1.0}, {2, 0, 1.0}};
    t.validate();
    return t;
  }();
  return g;
}

TrussResponse truss_solve(std::span<const double> x, const TrussGeometry& geometry) {
  const std::size_t nl = geometry.loads.size();
  const std::size_t ne = geometry.elements.size();
  if (x.size() != geometry.input_dimension()) throw DimensionMismatch("truss input has the wrong length");
  const double e_mod = x[nl];
  if (!(e_mod > 0.0)) throw DomainError("truss Young's modulus must be positive");
  const std::size_t ndof = 3 * geometry.nodes.size();

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ndof), static_cast<Eigen::Index>(ndof));
  for (std::size_t e = 0; e < ne; ++e) {
    const double area = x[nl + 1 + e];
    if (!(area > 0.0)) throw DomainError("truss member areas must be positive");
    const auto& [i, j] = geometry.elements[e];
    Eigen::Vector3d dx;
    for (int a = 0; a < 3; ++a) dx[a] = geometry.nodes[j][a] - geometry.nodes[i][a];
    const double len = dx.norm();
    const Eigen::Vector3d lam = dx / len;
    const Eigen::Matrix3d ke = (e_mod * area / len) * lam * lam.transpose();
    const Eigen::Index bi = static_cast<Eigen::Index>(3 * i), bj = static_cast<Eigen::Index>(3 * j);
    k.block<3, 3>(bi, bi) += ke;
    k.block<3, 3>(bj, bj) += ke;
    k.block<3, 3>(bi, bj) -= ke;
    k.block<3, 3>(bj, bi) -= ke;
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));
  for (std::size_t l = 0; l < nl; ++l) {
    const TrussLoad& load = geometry.loads[l];
    f[static_cast<Eigen::Index>(3 * load.node + load.axis)] += load.sign * x[l];
  }

  std::vector<bool> fixed(ndof, false);
  for (std::size_t dof : geometry.supports) fixed[dof] = true;
  std::vector<Eigen::Index> free;
  for (std::size_t d = 0; d < ndof; ++d) {
    if (!fixed[d]) free.push_back(static_cast<Eigen::Index>(d));
  }
  const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd kff(nf, nf);
  Eigen::VectorXd ff(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    ff[a] = f[free[a]];
    for (Eigen::Index b = 0; b < nf; ++b) kff(a, b) = k(free[a], free[b]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(kff);
  const double kscale = kff.diagonal().cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success || llt.matrixLLT().diagonal().minCoeff() <= 1e-7 * std::sqrt(kscale)) {
    throw NumericalError("truss stiffness matrix is singular (mechanism)");
  }
  const Eigen::VectorXd uf = llt.solve(ff);

  TrussResponse out;
  out.displacements = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));
  for (Eigen::Index a = 0; a < nf; ++a) out.displacements[free[a]] = uf[a];
  const double fnorm = ff.norm();
  out.residual = fnorm > 0.0 ? (kff * uf - ff).norm() / fnorm : 0.0;
  for (std::size_t n = 0; n < geometry.nodes.size(); ++n) {
    const Eigen::Index b = static_cast<Eigen::Index>(3 * n);
    const double ux = out.displacements[b], uy = out.displacements[b + 1], uz = out.displacements[b + 2];
    const double h = geometry.horizontal == HorizontalMeasure::Planar ? std::hypot(ux, uy)
                                                                      : std::max(std::abs(ux), std::abs(uy));
    out.u_horizontal = std::max(out.u_horizontal, h);
    out.u_vertical = std::max(out.u_vertical, std::abs(uz));
  }
  return out;
}

double truss_limit_state(std::span<const double> x, const TrussGeometry& geometry, double u0) {
  const TrussResponse r = truss_solve(x, geometry);
  return u0 - std::max(r.u_horizontal, r.u_vertical);
}

ProbabilisticModel truss_model() {
  std::vector<Variable> vars;
  vars.push_back({"P1", Marginal::lognormal(1000, 100)});
  for (int i = 2; i <= 5; ++i) vars.push_back({"P" + std::to_string(i), Marginal::normal(10000, 500)});
  vars.push_back({"P6", Marginal::lognormal(600, 60)});
  vars.push_back({"P7", Marginal::lognormal(500, 50)});
  vars.push_back({"E", Marginal::lognormal(1e7, 5e5)});
  const struct {
    int count;
    double mean;
  } groups[] = {{1, 0.4}, {4, 0.1}, {4, 3.4}, {2, 0.4}, {2, 1.3}, {4, 0.9}, {4, 1.0}, {4, 3.4}};
  int idx = 1;
  for (const auto& g : groups) {
    for (int i = 0; i < g.count; ++i, ++idx) {
      vars.push_back({"A" + std::to_string(idx), Marginal::lognormal(g.mean, 0.1 * g.mean)});
    }
  }
  return ProbabilisticModel(std::move(vars));
}

LimitState truss_limit_state_fn(const TrussGeometry& geometry, double u0) {
  geometry.validate();
  LimitState ls;
  ls.name = "truss-25";
  ls.dimension = geometry.input_dimension();
  ls.cost_class = "moderate";
  ls.evaluate = [geometry, u0](std::span<const double> x) { return truss_limit_state(x, geometry, u0); };
  return ls;
}

std::vector<std::string> benchmark_names() {
  return {"composite-beam", "sobol-m10", "sobol-m100", "sobol-m40", "truss-25"};
}

Benchmark make_benchmark(const std::string& name, bool truncation) {
  if (name == "sobol-m10" || name == "sobol-m40" || name == "sobol-m100") {
    const std::size_t m = std::stoul(name.substr(7));
    const std::size_t sas = m == 10 ? 800 : (m == 40 ? 900 : 1100);
    return {name, sobol_model(m), sobol_limit_state(m), sas, 1300, 100000};
  }
  if (name == "composite-beam") return {name, beam_model(truncation), beam_limit_state_fn(), 800, 1000, 1000000};
  if (name == "truss-25") return {name, truss_model(), truss_limit_state_fn(truss25_geometry()), 1000, 1100, 100000};
  throw ConfigError("unknown benchmark '" + name + "'");
}

}  // namespace sashpcfe
