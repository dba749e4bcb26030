#pragma once

#include <string>

#include <json.hpp>

#include "sashpcfe/activesub.hpp"
#include "sashpcfe/benchmarks.hpp"
#include "sashpcfe/hpcfe.hpp"
#include "sashpcfe/probspace.hpp"
#include "sashpcfe/reliability.hpp"
#include "sashpcfe/spce.hpp"

namespace sashpcfe::io {

using Json = nlohmann::ordered_json;

Json to_json(const Marginal& m);
Marginal marginal_from_json(const Json& j);
Json to_json(const ProbabilisticModel& model);
/// [{name, distribution, mean, sd, truncation?: [lo, hi]}, ...]
ProbabilisticModel model_from_json(const Json& j);

/// {p_max, dimension, intercept, indices: [[dense exponents]...], coefficients, loo_error}
Json to_json(const SparsePceModel& model);
SparsePceModel spce_from_json(const Json& j);

/// {eigenvalues, W1 (row-major N x r), r, mu, n_grad_samples}
Json to_json(const ActiveSubspace& subspace);
ActiveSubspace subspace_from_json(const Json& j);

Json to_json(const HpcfeModel& model);
HpcfeModel hpcfe_from_json(const Json& j);

Json to_json(const TrussGeometry& geometry);

Json to_json(const ReliabilityResult& result);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace sashpcfe::io
