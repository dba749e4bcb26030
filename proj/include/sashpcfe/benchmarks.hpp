#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sashpcfe/probspace.hpp"
#include "sashpcfe/reliability.hpp"

namespace sashpcfe {

// ---- Sobol g-function -------------------------------------------------------

/// g = prod_i (|4 x_i - 2| + a_i) / (1 + a_i) - b, x in [0, 1]^m.
double sobol_g(std::span<const double> x, std::span<const double> a, double b);

/// a = (1, 1, 500, ..., 500) of length m.
std::vector<double> sobol_coefficients(std::size_t m);
ProbabilisticModel sobol_model(std::size_t m);
LimitState sobol_limit_state(std::size_t m, double b = 0.35);

// ---- Composite beam ---------------------------------------------------------

/// Input order: A, B, C, D, L1..L6, L, P1..P6, Ea, Ew, S (20 variables).
/// Lengths in mm, loads in kN, moduli in GPa, S in MPa.
struct BeamStress {
  double k = 0.0;        // neutral-axis depth from the top face (mm)
  double moment = 0.0;   // bending moment at L3 (kN mm)
  double inertia = 0.0;  // transformed second moment of area (mm^4)
  double sigma = 0.0;    // MPa
};
BeamStress beam_stress(std::span<const double> x);
double beam_limit_state(std::span<const double> x);
ProbabilisticModel beam_model(bool truncation = true);
LimitState beam_limit_state_fn();

// ---- 25-element space truss -------------------------------------------------

struct TrussLoad {
  std::size_t node = 0;
  int axis = 0;        // 0 x, 1 y, 2 z
  double sign = 1.0;   // direction of the positive load magnitude
};

enum class HorizontalMeasure { Component, Planar };

struct TrussGeometry {
  std::vector<std::array<double, 3>> nodes;
  std::vector<std::array<std::size_t, 2>> elements;
  std::vector<std::size_t> supports;  // fixed global DOFs (3 node + axis)
  std::vector<TrussLoad> loads;       // P1, P2, ... in input order
  HorizontalMeasure horizontal = HorizontalMeasure::Component;

  /// Throws ConfigError if connectivity, supports or loads are invalid.
  void validate() const;
  /// Input layout [P_1..P_k, E, A_1..A_e].
  std::size_t input_dimension() const { return loads.size() + 1 + elements.size(); }
};

/// Parses {nodes, elements, supports, loads:{P1:[node, "x"|"-z"...]}, horizontal?}.
TrussGeometry truss_geometry_from_json(const std::string& text);
TrussGeometry load_truss_geometry(const std::string& path);
/// Built-in 25-bar transmission tower (inches, pounds, psi).
const TrussGeometry& truss25_geometry();

struct TrussResponse {
  Eigen::VectorXd displacements;  // 3 x nodes, zero at fixed DOFs
  double u_horizontal = 0.0;
  double u_vertical = 0.0;
  double residual = 0.0;  // ||K u - F|| / ||F|| on free DOFs (0 if F = 0)
};

TrussResponse truss_solve(std::span<const double> x, const TrussGeometry& geometry);
double truss_limit_state(std::span<const double> x, const TrussGeometry& geometry, double u0 = 0.4);
ProbabilisticModel truss_model();
LimitState truss_limit_state_fn(const TrussGeometry& geometry, double u0 = 0.4);

// ---- Registry ---------------------------------------------------------------

struct Benchmark {
  std::string name;
  ProbabilisticModel model;
  LimitState limit_state;
  std::size_t sas_train = 0;   // N_s for SAS-HPCFE
  std::size_t spce_train = 0;  // N_s for the S-PCE baseline
  std::size_t mcs_samples = 0;
};

std::vector<std::string> benchmark_names();
/// Throws ConfigError for unknown names.
Benchmark make_benchmark(const std::string& name, bool truncation = true);

}  // namespace sashpcfe
