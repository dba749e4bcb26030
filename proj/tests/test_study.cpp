#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sashpcfe/benchmarks.hpp"
#include "sashpcfe/error.hpp"
#include "sashpcfe/io.hpp"
#include "sashpcfe/study.hpp"

using namespace sashpcfe;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sashpcfe_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return io::read_file(p.string()); }

std::string config_error(const std::string& text) {
  try {
    parse_study_config(text, "study.json", ".");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("probabilistic model JSON round trip") {
  const ProbabilisticModel m = beam_model(true);
  const ProbabilisticModel back = io::model_from_json(io::to_json(m));
  REQUIRE(back.dimension() == m.dimension());
  for (std::size_t i = 0; i < m.dimension(); ++i) {
    CHECK(back[i].name == m[i].name);
    CHECK(back[i].marginal.kind() == m[i].marginal.kind());
    CHECK(back[i].marginal.mean() == doctest::Approx(m[i].marginal.mean()).epsilon(1e-12));
    CHECK(back[i].marginal.sd() == doctest::Approx(m[i].marginal.sd()).epsilon(1e-12));
    CHECK(back[i].marginal.cdf(m[i].marginal.mean() * 1.001) ==
          doctest::Approx(m[i].marginal.cdf(m[i].marginal.mean() * 1.001)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(io::model_from_json(io::Json::array()), ConfigError);
  CHECK_THROWS_AS(io::model_from_json(io::Json::parse(R"([{"name": "x"}])")), ConfigError);
}

TEST_CASE("surrogate JSON round trips predict identically") {
  const Eigen::MatrixXd xi = (2.0 * sobol_points(60, 3).values.array() - 1.0).matrix();
  Eigen::VectorXd y(60);
  for (Eigen::Index i = 0; i < 60; ++i) y[i] = std::sin(xi(i, 0)) + xi(i, 1) * xi(i, 2);
  const SparsePceModel s = fit_lar(xi, y);
  const SparsePceModel s2 = io::spce_from_json(io::Json::parse(io::to_json(s).dump()));
  const HpcfeModel h = fit_hpcfe(xi.leftCols(2), y);
  const HpcfeModel h2 = io::hpcfe_from_json(io::Json::parse(io::to_json(h).dump()));
  const ActiveSubspace a = build_active_subspace(Eigen::Matrix3d(Eigen::Vector3d(3.0, 1.0, 0.01).asDiagonal()), 0.9, 30);
  const ActiveSubspace a2 = io::subspace_from_json(io::Json::parse(io::to_json(a).dump()));
  CHECK(a2.rank == a.rank);
  CHECK(a2.w1 == a.w1);
  for (Eigen::Index i = 0; i < 10; ++i) {
    const Eigen::VectorXd p = xi.row(i).transpose() * 0.77;
    CHECK(s2.predict(std::span<const double>(p.data(), 3)) == s.predict(std::span<const double>(p.data(), 3)));
    CHECK(h2.predict_mean(Eigen::VectorXd(p.head(2))) == h.predict_mean(Eigen::VectorXd(p.head(2))));
    CHECK(h2.predict_variance(Eigen::VectorXd(p.head(2))) == h.predict_variance(Eigen::VectorXd(p.head(2))));
  }
}

TEST_CASE("truss geometry JSON round trip") {
  const TrussGeometry& g = truss25_geometry();
  const TrussGeometry back = truss_geometry_from_json(io::to_json(g).dump());
  CHECK(back.nodes == g.nodes);
  CHECK(back.elements == g.elements);
  CHECK(back.supports == g.supports);
  REQUIRE(back.loads.size() == g.loads.size());
  for (std::size_t i = 0; i < g.loads.size(); ++i) {
    CHECK(back.loads[i].node == g.loads[i].node);
    CHECK(back.loads[i].axis == g.loads[i].axis);
    CHECK(back.loads[i].sign == g.loads[i].sign);
  }
  const TrussGeometry shipped = load_truss_geometry(SASHPCFE_SOURCE_DIR "/data/truss25.json");
  CHECK(shipped.nodes == g.nodes);
  CHECK(shipped.elements == g.elements);
  CHECK_THROWS_AS(truss_geometry_from_json(R"({"nodes": [[0,0,0]], "elements": [[0, 3]], "supports": [], "loads": {}})"),
                  ConfigError);
}

TEST_CASE("JSON line map") {
  const std::string text = "{\n  \"a\": 1,\n  \"b\": {\n    \"c\": [\n      5,\n      6\n    ]\n  }\n}\n";
  const JsonLineMap m(text);
  CHECK(m.line("/a") == 2);
  CHECK(m.line("/b") == 3);
  CHECK(m.line("/b/c/1") == 6);
  CHECK(m.line("/b/zzz") == 3);
}

TEST_CASE("config errors carry line numbers") {
  CHECK(config_error("{\n  \"benchmark\": \"sobol-m10\",\n  \"methods\": [\"mcs\"],\n  \"sedd\": 1\n}") ==
        "study.json:4: unknown key 'sedd'");
  CHECK(config_error("{\n  \"benchmark\": \"nope\",\n  \"methods\": [\"mcs\"]\n}").starts_with(
      "study.json:2: unknown benchmark 'nope' (known: "));
  CHECK(config_error("{\n  \"benchmark\": \"sobol-m10\",\n  \"methods\": [\n    \"mcs\",\n    \"form\"\n  ]\n}")
            .starts_with("study.json:5: unknown method 'form'"));
  CHECK(config_error("{\"benchmark\": \"sobol-m10\",\n\"methods\": [\"mcs\"],\n\"sas_hpcfe\": {\"mu\": 1.5}}")
            .starts_with("study.json:3:"));
  CHECK(config_error("{\"benchmark\": \"sobol-m10\",\n\"methods\": [\"mcs\"],\n\"spce\": {\"n_train\": 2}}")
            .starts_with("study.json:3:"));
  CHECK(config_error("{\"methods\": [\"mcs\"]}").find("exactly one of") != std::string::npos);
  CHECK(config_error("{\n\"benchmark\": \"sobol-m10\",\n\"methods\": [\"mcs\"]\n,}").starts_with("study.json:4: invalid JSON"));
  CHECK(config_error("{\"benchmark\": \"sobol-m10\",\n\"geometry\": \"x.json\",\n\"methods\": [\"mcs\"]}")
            .starts_with("study.json:2:"));
  CHECK(config_error("{\"benchmark\": \"sobol-m10\", \"methods\": [\"mcs\", \"mcs\"]}").find("twice") !=
        std::string::npos);
}

TEST_CASE("valid config defaults") {
  const StudyConfig c = parse_study_config(
      R"({"benchmark": "sobol-m40", "methods": ["sas-hpcfe", "mcs"], "sas_hpcfe": {"hpcfe": {"restarts": 3}}})", "s.json",
      ".");
  CHECK(c.methods == std::vector<std::string>{"mcs", "sas-hpcfe"});
  CHECK(c.sas.n_train == 900);
  CHECK(c.spce.n_train == 1300);
  CHECK(c.mcs_samples == 100000);
  CHECK(c.sas.hpcfe.restarts == 3);
  CHECK(c.seed == 20240601);
  CHECK_FALSE(c.truncation);
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"sobol_m10", "sobol_m40", "sobol_m100", "composite_beam", "truss25"}) {
    const StudyConfig c = load_study_config(std::string(SASHPCFE_SOURCE_DIR "/configs/") + name + ".json");
    CHECK(c.methods.size() == 3);
    CHECK_NOTHROW(resolve_problem(c));
  }
}

TEST_CASE("study run writes reproducible artifacts") {
  const fs::path dir = scratch("run");
  const std::string text = R"({"benchmark": "sobol-m10", "methods": ["sas-hpcfe", "mcs", "spce"],
    "mcs": {"n": 20000}, "spce": {"n_train": 120, "n_mcs": 20000},
    "sas_hpcfe": {"n_train": 120, "n_mcs": 20000, "p_max": 3, "scatter_points": 50,
                  "hpcfe": {"restarts": 2, "max_evaluations": 40}}})";
  StudyConfig c = parse_study_config(text, "inline", ".");
  c.output_dir = (dir / "a").string();
  std::ostringstream log;
  const std::vector<StudyRow> rows = run_study(c, log);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].result.method == "mcs");
  CHECK_FALSE(rows[0].error_pct);
  for (std::size_t i = 1; i < 3; ++i) {
    REQUIRE(rows[i].error_pct);
    const double be = rows[0].result.beta, b = rows[i].result.beta;
    CHECK(*rows[i].error_pct == doctest::Approx(std::abs(be - b) / be * 100.0));
    CHECK(rows[i].result.n_model_evals == 120);
  }
  for (const char* f : {"results.csv", "model.json", "spce.json", "sas_spce.json", "subspace.json", "hpcfe.json",
                        "eigenvalues.csv", "reduced_scatter.csv", "summary.json"}) {
    CHECK_MESSAGE(fs::exists(dir / "a" / f), f);
  }
  const auto csv = lines(slurp(dir / "a" / "results.csv"));
  REQUIRE(csv.size() == 4);
  CHECK(csv[0] == "method,pf,beta,n_model_evals,cov,r,seed,error_pct");
  CHECK(csv[1].starts_with("mcs,"));
  CHECK(lines(slurp(dir / "a" / "reduced_scatter.csv")).size() == 51);
  const io::Json summary = io::Json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(summary["fd_cost"].get<std::uint64_t>() == fd_cost(10, 100));

  c.output_dir = (dir / "b").string();
  run_study(c, log);
  CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));
  CHECK(slurp(dir / "a" / "hpcfe.json") == slurp(dir / "b" / "hpcfe.json"));
  CHECK(results_csv(rows) == slurp(dir / "a" / "results.csv"));

  std::ostringstream out, err;
  CHECK(report_study((dir / "a").string(), out, err) == 0);
  const auto rep = lines(out.str());
  REQUIRE(rep.size() >= 4);
  CHECK(rep[1].starts_with("mcs"));
  CHECK(rep[2].starts_with("sas-hpcfe"));
  CHECK(rep[3].starts_with("spce"));
  CHECK(out.str().find("benchmark: sobol-m10") != std::string::npos);
}

TEST_CASE("report edge cases") {
  const fs::path dir = scratch("report");
  std::ostringstream out, err;
  CHECK(report_study((dir / "missing").string(), out, err) == 2);
  CHECK(report_study(dir.string(), out, err) == 0);
  CHECK(out.str().find("no results") != std::string::npos);
  io::write_file((dir / "results.csv").string(),
                 "method,pf,beta,n_model_evals,cov,r,seed,error_pct\n"
                 "spce,0.02,2.0537489,1300,,,1,2.3\nmcs,0.0177,2.10375298,100000,0.02,,1,\n");
  std::ostringstream out2, err2;
  CHECK(report_study(dir.string(), out2, err2) == 0);
  const auto rep = lines(out2.str());
  CHECK(rep[1].starts_with("mcs"));
  CHECK(rep[1].find("2.1038") != std::string::npos);
  CHECK(rep[2].starts_with("spce"));
  CHECK(err2.str().find("summary.json") != std::string::npos);
}

TEST_CASE("plugin limit state") {
  const fs::path dir = scratch("plugin");
  io::write_file((dir / "model.json").string(),
                 R"([{"name": "a", "distribution": "uniform", "mean": 0.0, "sd": 0.5773502691896258},
                     {"name": "b", "distribution": "uniform", "mean": 0.0, "sd": 0.5773502691896258}])");
  const std::string text = std::string(R"({"plugin": ")") + SASHPCFE_TEST_PLUGIN +
                           R"(", "model": "model.json", "methods": ["mcs", "spce"], "mcs": {"n": 40000},
                           "spce": {"n_train": 30, "n_mcs": 40000, "p_max": 2}})";
  io::write_file((dir / "study.json").string(), text);
  StudyConfig c = load_study_config((dir / "study.json").string());
  c.output_dir = (dir / "out").string();
  std::ostringstream log;
  const auto rows = run_study(c, log);
  // P(a^2 + b^2 > 1.2) over [-1, 1]^2: 1 - (pi r^2 - corner overlap) / 4 with r^2 = 1.2.
  const double r = std::sqrt(1.2), h = std::sqrt(1.2 - 1.0);
  const double inside = M_PI * 1.2 - 4.0 * (1.2 * std::acos(1.0 / r) - h);
  const double pf = 1.0 - inside / 4.0;
  CHECK(std::abs(rows[0].result.pf - pf) <= 3.0 * std::sqrt(pf * (1 - pf) / 40000.0));
  CHECK(std::abs(rows[1].result.pf - rows[0].result.pf) <= 2.0 / 40000.0);

  io::write_file((dir / "bad.json").string(), std::string(R"({"plugin": ")") + SASHPCFE_TEST_PLUGIN +
                                                   R"(", "methods": ["mcs"]})");
  CHECK_THROWS_AS(load_study_config((dir / "bad.json").string()), ConfigError);
}
