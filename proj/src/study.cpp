#include "sashpcfe/study.hpp"

#include <dlfcn.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sashpcfe/error.hpp"
#include "sashpcfe/io.hpp"

namespace sashpcfe {

namespace fs = std::filesystem;
using io::Json;

// ---- JSON line map ----------------------------------------------------------

namespace {

class LineScanner {
 public:
  LineScanner(const std::string& text, std::map<std::string, int>& lines) : s_(text), lines_(lines) {}

  void run() { value(""); }

 private:
  void ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
      if (s_[i_] == '\n') ++line_;
      ++i_;
    }
  }

  std::string string() {
    std::string out;
    ++i_;  // opening quote
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
        out += s_[i_ + 1];
        i_ += 2;
      } else {
        out += s_[i_++];
      }
    }
    ++i_;
    return out;
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

  void value(const std::string& path) {
    ws();
    lines_[path] = line_;
    if (i_ >= s_.size()) return;
    if (s_[i_] == '{') {
      ++i_;
      for (;;) {
        ws();
        if (i_ >= s_.size() || s_[i_] == '}') break;
        if (s_[i_] == ',') {
          ++i_;
          continue;
        }
        const int key_line = line_;
        const std::string key = string();
        ws();
        ++i_;  // colon
        const std::string child = path + "/" + escape(key);
        value(child);
        lines_[child] = key_line;
      }
      ++i_;
    } else if (s_[i_] == '[') {
      ++i_;
      std::size_t k = 0;
      for (;;) {
        ws();
        if (i_ >= s_.size() || s_[i_] == ']') break;
        if (s_[i_] == ',') {
          ++i_;
          continue;
        }
        value(path + "/" + std::to_string(k++));
      }
      ++i_;
    } else if (s_[i_] == '"') {
      string();
    } else {
      while (i_ < s_.size() && !std::strchr(",]} \t\r\n", s_[i_])) ++i_;
    }
  }

  const std::string& s_;
  std::map<std::string, int>& lines_;
  std::size_t i_ = 0;
  int line_ = 1;
};

}  // namespace

JsonLineMap::JsonLineMap(const std::string& text) { LineScanner(text, lines_).run(); }

int JsonLineMap::line(const std::string& pointer) const {
  std::string p = pointer;
  for (;;) {
    const auto it = lines_.find(p);
    if (it != lines_.end()) return it->second;
    if (p.empty()) return 1;
    p = p.substr(0, p.rfind('/'));
  }
}

// ---- config parsing ---------------------------------------------------------

namespace {

const std::vector<std::string> kMethods = {"mcs", "spce", "sas-hpcfe"};

class ConfigReader {
 public:
  ConfigReader(const std::string& source, const JsonLineMap& lines) : source_(source), lines_(lines) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    throw ConfigError(source_ + ":" + std::to_string(lines_.line(pointer)) + ": " + message);
  }

  static std::string name(const std::string& pointer) {
    std::string out = pointer.substr(1);
    std::replace(out.begin(), out.end(), '/', '.');
    return out;
  }

  void allow(const Json& obj, const std::string& pointer, const std::set<std::string>& keys) const {
    if (!obj.is_object()) fail(pointer, (pointer.empty() ? "config" : name(pointer)) + " must be an object");
    for (const auto& [k, v] : obj.items()) {
      if (!keys.count(k)) fail(pointer + "/" + k, "unknown key '" + k + "'");
    }
  }

  std::string str(const Json& v, const std::string& pointer) const {
    if (!v.is_string()) fail(pointer, name(pointer) + " must be a string");
    return v.get<std::string>();
  }

  bool boolean(const Json& v, const std::string& pointer) const {
    if (!v.is_boolean()) fail(pointer, name(pointer) + " must be true or false");
    return v.get<bool>();
  }

  std::uint64_t uint(const Json& v, const std::string& pointer, std::uint64_t lo, std::uint64_t hi) const {
    if (!v.is_number_unsigned()) fail(pointer, name(pointer) + " must be a non-negative integer");
    const auto x = v.get<std::uint64_t>();
    if (x < lo || x > hi) {
      fail(pointer, name(pointer) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return x;
  }

  double real(const Json& v, const std::string& pointer) const {
    if (!v.is_number()) fail(pointer, name(pointer) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(pointer, name(pointer) + " must be finite");
    return x;
  }

  std::string path(const Json& v, const std::string& pointer, const std::string& base_dir) const {
    const std::string raw = str(v, pointer);
    fs::path p(raw);
    if (p.is_relative()) p = fs::path(base_dir) / p;
    if (!fs::is_regular_file(p)) fail(pointer, name(pointer) + " '" + raw + "' does not exist");
    return p.string();
  }

 private:
  std::string source_;
  const JsonLineMap& lines_;
};

constexpr std::uint64_t kMaxTrain = 1000000;
constexpr std::uint64_t kMaxSamples = 1000000000;

struct MethodKeys {
  std::optional<std::size_t> n_train;
  std::optional<std::size_t> n_mcs;
};

MethodKeys read_pipeline(const ConfigReader& rd, const Json& obj, const std::string& ptr, bool sas,
                         PipelineConfig& cfg) {
  std::set<std::string> keys = {"n_train", "p_max", "max_interaction", "n_mcs"};
  if (sas) keys.insert({"mu", "n_grad", "scatter_points", "hpcfe"});
  rd.allow(obj, ptr, keys);
  MethodKeys got;
  if (obj.contains("n_train")) got.n_train = rd.uint(obj["n_train"], ptr + "/n_train", 4, kMaxTrain);
  if (obj.contains("n_mcs")) got.n_mcs = rd.uint(obj["n_mcs"], ptr + "/n_mcs", 1, kMaxSamples);
  if (obj.contains("p_max")) cfg.lar.p_max = static_cast<unsigned>(rd.uint(obj["p_max"], ptr + "/p_max", 1, 10));
  if (obj.contains("max_interaction")) {
    cfg.lar.max_interaction = rd.uint(obj["max_interaction"], ptr + "/max_interaction", 0, 10);
  }
  if (!sas) return got;
  if (obj.contains("mu")) {
    cfg.mu = rd.real(obj["mu"], ptr + "/mu");
    if (!(cfg.mu > 0.0 && cfg.mu < 1.0)) rd.fail(ptr + "/mu", "sas_hpcfe.mu must lie in (0, 1)");
  }
  if (obj.contains("n_grad")) cfg.n_grad = rd.uint(obj["n_grad"], ptr + "/n_grad", 0, 10000000);
  if (obj.contains("scatter_points")) {
    cfg.scatter_points = rd.uint(obj["scatter_points"], ptr + "/scatter_points", 0, 10000000);
  }
  if (obj.contains("hpcfe")) {
    const std::string hp = ptr + "/hpcfe";
    const Json& h = obj["hpcfe"];
    rd.allow(h, hp, {"max_order", "basis_degree", "nugget", "theta_bounds", "restarts", "max_evaluations"});
    HpcfeConfig& c = cfg.hpcfe;
    if (h.contains("max_order")) c.max_order = rd.uint(h["max_order"], hp + "/max_order", 1, 5);
    if (h.contains("basis_degree")) c.basis_degree = static_cast<unsigned>(rd.uint(h["basis_degree"], hp + "/basis_degree", 1, 10));
    if (h.contains("nugget")) {
      c.nugget = rd.real(h["nugget"], hp + "/nugget");
      if (!(c.nugget > 0.0 && c.nugget < 1.0)) rd.fail(hp + "/nugget", "sas_hpcfe.hpcfe.nugget must lie in (0, 1)");
    }
    if (h.contains("theta_bounds")) {
      const Json& tb = h["theta_bounds"];
      if (!tb.is_array() || tb.size() != 2) rd.fail(hp + "/theta_bounds", "sas_hpcfe.hpcfe.theta_bounds must be [lo, hi]");
      c.theta_lo = rd.real(tb[0], hp + "/theta_bounds/0");
      c.theta_hi = rd.real(tb[1], hp + "/theta_bounds/1");
      if (!(c.theta_lo > 0.0 && c.theta_lo < c.theta_hi)) {
        rd.fail(hp + "/theta_bounds", "sas_hpcfe.hpcfe.theta_bounds must be positive and ordered");
      }
    }
    if (h.contains("restarts")) c.restarts = rd.uint(h["restarts"], hp + "/restarts", 1, 1000);
    if (h.contains("max_evaluations")) {
      c.max_evaluations = rd.uint(h["max_evaluations"], hp + "/max_evaluations", 1, 100000);
    }
  }
  return got;
}

}  // namespace

StudyConfig parse_study_config(const std::string& text, const std::string& source, const std::string& base_dir) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset -> line
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto ? upto - 1 : 0), '\n');
    throw ConfigError(source + ":" + std::to_string(line) + ": invalid JSON");
  }
  const JsonLineMap lines(text);
  const ConfigReader rd(source, lines);
  rd.allow(root, "", {"benchmark", "plugin", "model", "geometry", "methods", "seed", "truncation", "output", "mcs",
                      "spce", "sas_hpcfe"});

  StudyConfig cfg;
  cfg.source = source;
  if (root.contains("benchmark")) cfg.benchmark = rd.str(root["benchmark"], "/benchmark");
  if (root.contains("plugin")) cfg.plugin = rd.path(root["plugin"], "/plugin", base_dir);
  if (root.contains("model")) cfg.model_file = rd.path(root["model"], "/model", base_dir);
  if (root.contains("geometry")) cfg.geometry_file = rd.path(root["geometry"], "/geometry", base_dir);
  if (cfg.benchmark.empty() == cfg.plugin.empty()) rd.fail("", "exactly one of 'benchmark' or 'plugin' is required");
  if (!cfg.plugin.empty() && cfg.model_file.empty()) rd.fail("/plugin", "a plugin limit state requires 'model'");
  std::optional<Benchmark> bench;
  if (!cfg.benchmark.empty()) {
    const auto names = benchmark_names();
    if (std::find(names.begin(), names.end(), cfg.benchmark) == names.end()) {
      std::string known;
      for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
      rd.fail("/benchmark", "unknown benchmark '" + cfg.benchmark + "' (known: " + known + ")");
    }
    bench = make_benchmark(cfg.benchmark, false);
  }
  if (!cfg.geometry_file.empty() && cfg.benchmark != "truss-25") {
    rd.fail("/geometry", "'geometry' applies only to the truss-25 benchmark");
  }

  if (!root.contains("methods")) rd.fail("", "'methods' is required");
  const Json& methods = root["methods"];
  if (!methods.is_array() || methods.empty()) rd.fail("/methods", "methods must be a non-empty array");
  std::set<std::string> chosen;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const std::string ptr = "/methods/" + std::to_string(i);
    const std::string m = rd.str(methods[i], ptr);
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
      rd.fail(ptr, "unknown method '" + m + "' (known: mcs, spce, sas-hpcfe)");
    }
    if (!chosen.insert(m).second) rd.fail(ptr, "method '" + m + "' listed twice");
  }
  for (const auto& m : kMethods) {
    if (chosen.count(m)) cfg.methods.push_back(m);
  }

  if (root.contains("seed")) cfg.seed = rd.uint(root["seed"], "/seed", 0, UINT64_MAX);
  if (root.contains("truncation")) cfg.truncation = rd.boolean(root["truncation"], "/truncation");
  if (root.contains("output")) cfg.output_dir = rd.str(root["output"], "/output");

  const std::size_t default_mcs = bench ? bench->mcs_samples : 100000;
  cfg.mcs_samples = default_mcs;
  if (root.contains("mcs")) {
    rd.allow(root["mcs"], "/mcs", {"n"});
    if (root["mcs"].contains("n")) cfg.mcs_samples = rd.uint(root["mcs"]["n"], "/mcs/n", 1, kMaxSamples);
  }
  const Json empty = Json::object();
  const MethodKeys sk = read_pipeline(rd, root.contains("spce") ? root["spce"] : empty, "/spce", false, cfg.spce);
  const MethodKeys hk =
      read_pipeline(rd, root.contains("sas_hpcfe") ? root["sas_hpcfe"] : empty, "/sas_hpcfe", true, cfg.sas);
  cfg.spce.n_train = sk.n_train.value_or(bench ? bench->spce_train : 1300);
  cfg.spce.n_mcs = sk.n_mcs.value_or(default_mcs);
  cfg.sas.n_train = hk.n_train.value_or(bench ? bench->sas_train : 800);
  cfg.sas.n_mcs = hk.n_mcs.value_or(default_mcs);
  return cfg;
}

StudyConfig load_study_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const ConfigError&) {
    throw ConfigError(path + ":0: cannot open config file");
  }
  const fs::path parent = fs::path(path).parent_path();
  return parse_study_config(text, path, parent.empty() ? "." : parent.string());
}

// ---- problem resolution -----------------------------------------------------

namespace {

using PluginFn = double (*)(const double*, std::size_t);

LimitState plugin_limit_state(const std::string& path, std::size_t dimension) {
  void* raw = dlopen(fs::absolute(path).c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!raw) throw ConfigError("cannot load plugin " + path + ": " + dlerror());
  std::shared_ptr<void> handle(raw, [](void* h) { dlclose(h); });
  auto fn = reinterpret_cast<PluginFn>(dlsym(raw, "sashpcfe_limit_state"));
  if (!fn) throw ConfigError("plugin " + path + " does not export sashpcfe_limit_state");
  LimitState ls;
  ls.name = fs::path(path).stem().string();
  ls.dimension = dimension;
  ls.cost_class = "external";
  ls.evaluate = [handle, fn](std::span<const double> x) { return fn(x.data(), x.size()); };
  return ls;
}

}  // namespace

StudyProblem resolve_problem(const StudyConfig& config) {
  std::optional<ProbabilisticModel> file_model;
  if (!config.model_file.empty()) file_model = io::model_from_json(Json::parse(io::read_file(config.model_file)));

  if (!config.plugin.empty()) {
    ProbabilisticModel model = config.truncation ? *file_model : file_model->without_truncation();
    LimitState ls = plugin_limit_state(config.plugin, model.dimension());
    return {ls.name, std::move(model), std::move(ls)};
  }
  Benchmark b = make_benchmark(config.benchmark, config.truncation);
  if (!config.geometry_file.empty()) b.limit_state = truss_limit_state_fn(load_truss_geometry(config.geometry_file));
  if (file_model) b.model = config.truncation ? *file_model : file_model->without_truncation();
  if (b.model.dimension() != b.limit_state.dimension) {
    throw ConfigError("model has " + std::to_string(b.model.dimension()) + " variables but the limit state expects " +
                      std::to_string(b.limit_state.dimension));
  }
  return {b.name, std::move(b.model), std::move(b.limit_state)};
}

// ---- run --------------------------------------------------------------------

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_json(const fs::path& dir, const std::string& name, const Json& j) {
  io::write_file((dir / name).string(), j.dump(2) + "\n");
}

void write_eigenvalues(const fs::path& dir, const ActiveSubspace& sub) {
  std::ostringstream out;
  out << "index,eigenvalue,cumulative_ratio\n";
  const double total = sub.eigenvalues.cwiseMax(0.0).sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < sub.eigenvalues.size(); ++i) {
    acc += std::max(sub.eigenvalues[i], 0.0);
    out << i + 1 << ',' << num(sub.eigenvalues[i]) << ',' << num(total > 0.0 ? acc / total : 0.0) << '\n';
  }
  io::write_file((dir / "eigenvalues.csv").string(), out.str());
}

void write_scatter(const fs::path& dir, const PipelineArtifacts& art) {
  std::ostringstream out;
  const Eigen::Index k = std::min<Eigen::Index>(art.scatter_z.cols(), 2);
  for (Eigen::Index c = 0; c < k; ++c) out << 'z' << c + 1 << ',';
  out << "label\n";
  for (Eigen::Index i = 0; i < art.scatter_z.rows(); ++i) {
    for (Eigen::Index c = 0; c < k; ++c) out << num(art.scatter_z(i, c)) << ',';
    out << (art.scatter_label[static_cast<std::size_t>(i)] ? "fail" : "safe") << '\n';
  }
  io::write_file((dir / "reduced_scatter.csv").string(), out.str());
}

void fill_errors(std::vector<StudyRow>& rows) {
  const auto ref = std::find_if(rows.begin(), rows.end(), [](const StudyRow& r) { return r.result.method == "mcs"; });
  for (StudyRow& row : rows) {
    row.error_pct.reset();
    if (ref == rows.end() || row.result.method == "mcs") continue;
    const double be = ref->result.beta;
    if (!std::isfinite(be) || be == 0.0 || !std::isfinite(row.result.beta)) continue;
    row.error_pct = std::abs(be - row.result.beta) / std::abs(be) * 100.0;
  }
}

}  // namespace

std::string results_csv(const std::vector<StudyRow>& rows) {
  std::ostringstream out;
  out << "method,pf,beta,n_model_evals,cov,r,seed,error_pct\n";
  for (const StudyRow& row : rows) {
    const ReliabilityResult& r = row.result;
    out << r.method << ',' << num(r.pf) << ',' << num(r.beta) << ',' << r.n_model_evals << ','
        << (r.cov ? num(*r.cov) : "") << ',' << (r.rank ? std::to_string(r.rank) : "") << ',' << r.seed << ','
        << (row.error_pct ? num(*row.error_pct) : "") << '\n';
  }
  return out.str();
}

std::vector<StudyRow> run_study(const StudyConfig& config, std::ostream& log) {
  const StudyProblem problem = resolve_problem(config);
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());

  write_json(dir, "model.json", io::to_json(problem.model));
  Json summary;
  summary["benchmark"] = problem.name;
  summary["dimension"] = problem.model.dimension();
  summary["seed"] = config.seed;
  summary["truncation"] = config.truncation;
  summary["methods"] = config.methods;
  Json warnings = Json::object();

  std::vector<StudyRow> rows;
  auto flush = [&] {
    fill_errors(rows);
    io::write_file((dir / "results.csv").string(), results_csv(rows));
    summary["warnings"] = warnings;
    write_json(dir, "summary.json", summary);
  };
  flush();

  for (const std::string& method : config.methods) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (method == "mcs") {
        rows.push_back({mcs_probability(problem.limit_state, problem.model, config.mcs_samples, config.seed), {}});
      } else if (method == "spce") {
        PipelineConfig pc = config.spce;
        pc.seed = config.seed;
        PipelineOutput out = spce_only_pipeline(problem.limit_state, problem.model, pc);
        write_json(dir, "spce.json", io::to_json(*out.artifacts.spce));
        warnings[method] = out.artifacts.warnings;
        rows.push_back({out.result, {}});
      } else {
        PipelineConfig pc = config.sas;
        pc.seed = config.seed;
        PipelineOutput out = sas_hpcfe_pipeline(problem.limit_state, problem.model, pc);
        const PipelineArtifacts& art = out.artifacts;
        write_json(dir, "sas_spce.json", io::to_json(*art.spce));
        write_json(dir, "subspace.json", io::to_json(*art.subspace));
        write_json(dir, "hpcfe.json", io::to_json(*art.hpcfe));
        write_eigenvalues(dir, *art.subspace);
        write_scatter(dir, art);
        summary["fd_cost"] = art.fd_cost;
        summary["n_grad_samples"] = art.subspace->n_grad_samples;
        warnings[method] = art.warnings;
        rows.push_back({out.result, {}});
      }
    } catch (const NumericalError&) {
      flush();
      throw;
    }
    flush();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const ReliabilityResult& r = rows.back().result;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s pf=%.6g beta=%.4f n_model_evals=%llu (%.1f s)", method.c_str(), r.pf, r.beta,
                  static_cast<unsigned long long>(r.n_model_evals), secs);
    log << buf << '\n';
    if (warnings.contains(method)) {
      for (const auto& w : warnings[method]) log << "  warning: " << w.get<std::string>() << '\n';
    }
  }
  return rows;
}

// ---- report -----------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

int report_study(const std::string& dir, std::ostream& out, std::ostream& err) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) {
    err << "error: " << dir << " is not a directory\n";
    return 2;
  }
  const fs::path results = root / "results.csv";
  if (!fs::exists(results)) {
    out << "no results\n";
    return 0;
  }
  std::ifstream in(results);
  std::string line;
  std::getline(in, line);
  const std::vector<std::string> header = split(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) {
      err << "error: malformed row in " << results.string() << ": " << line << '\n';
      continue;
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) {
    out << "no results\n";
    return 0;
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });

  auto col = [&](const std::vector<std::string>& row, const std::string& name) -> std::string {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? "" : row[static_cast<std::size_t>(it - header.begin())];
  };
  auto fixed = [](const std::string& s, const char* fmt) -> std::string {
    if (s.empty()) return "-";
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) return s;
    char buf[32];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
  };
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-10s %12s %10s %14s %4s %10s\n", "method", "pf", "beta", "n_model_evals", "r",
                "eps(%)");
  out << buf;
  bool has_sas = false;
  for (const auto& row : rows) {
    has_sas = has_sas || row[0] == "sas-hpcfe";
    const std::string r = col(row, "r");
    std::snprintf(buf, sizeof buf, "%-10s %12s %10s %14s %4s %10s\n", row[0].c_str(),
                  fixed(col(row, "pf"), "%.6g").c_str(), fixed(col(row, "beta"), "%.4f").c_str(),
                  col(row, "n_model_evals").c_str(), r.empty() ? "-" : r.c_str(),
                  fixed(col(row, "error_pct"), "%.4f").c_str());
    out << buf;
  }

  const fs::path summary = root / "summary.json";
  if (fs::exists(summary)) {
    try {
      const Json s = Json::parse(io::read_file(summary.string()));
      if (s.contains("benchmark")) out << "benchmark: " << s["benchmark"].get<std::string>() << '\n';
      if (s.contains("fd_cost")) out << "fd_cost: " << s["fd_cost"].get<std::uint64_t>() << '\n';
    } catch (const std::exception& e) {
      err << "error: cannot read " << summary.string() << ": " << e.what() << '\n';
    }
  } else {
    err << "missing: summary.json\n";
  }
  if (has_sas) {
    for (const char* f : {"eigenvalues.csv", "reduced_scatter.csv", "subspace.json", "hpcfe.json"}) {
      if (!fs::exists(root / f)) err << "missing: " << f << '\n';
    }
  }
  return 0;
}

}  // namespace sashpcfe
