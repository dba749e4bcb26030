#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sashpcfe {

enum class MarginalKind { Uniform, Normal, Lognormal, Gumbel };

struct Interval {
  double lo;
  double hi;
};

/// Internal parameters of a marginal after moment matching.
///   Uniform:   (lo, hi)
///   Normal:    (mean, sd)
///   Lognormal: (mu, sigma) of the underlying normal
///   Gumbel:    (location, scale), max-type
struct DistributionParams {
  double first;
  double second;

  friend bool operator==(const DistributionParams&, const DistributionParams&) = default;
};

/// Converts a (mean, sd) description into internal distribution parameters.
/// For Uniform the bounds are mean -/+ sqrt(3) sd.
DistributionParams moment_match(MarginalKind kind, double mean, double sd);

/// One-dimensional distribution with optional hard truncation. The truncated
/// CDF is the base CDF renormalized to the truncation interval.
class Marginal {
 public:
  static Marginal uniform(double lo, double hi);
  static Marginal normal(double mean, double sd);
  static Marginal lognormal(double mean, double sd);
  static Marginal gumbel(double mean, double sd);

  /// Copy of this marginal restricted to `bounds`. The interval must carry
  /// positive probability under the untruncated distribution.
  Marginal truncated(Interval bounds) const;
  Marginal untruncated() const;

  MarginalKind kind() const { return kind_; }
  const DistributionParams& params() const { return params_; }
  /// Moments of the untruncated distribution as specified by the user.
  double mean() const { return mean_; }
  double sd() const { return sd_; }
  const std::optional<Interval>& truncation() const { return truncation_; }
  Interval support() const;

  double cdf(double x) const;
  double ppf(double u) const;
  double pdf(double x) const;

  /// Probability mass of the truncation interval under the base distribution
  /// (1 when untruncated).
  double mass() const { return mass_; }

 private:
  Marginal(MarginalKind kind, double mean, double sd, DistributionParams params);

  double base_cdf(double x) const;
  double base_ccdf(double x) const;
  double base_ppf(double p) const;
  double base_ppf_upper(double q) const;
  double base_pdf(double x) const;

  MarginalKind kind_;
  double mean_;
  double sd_;
  DistributionParams params_;
  std::optional<Interval> truncation_;
  double cdf_lo_ = 0.0;   // base CDF at the lower truncation bound
  double ccdf_hi_ = 0.0;  // base survival function at the upper bound
  double mass_ = 1.0;
};

std::string to_string(MarginalKind kind);
MarginalKind marginal_kind_from_string(const std::string& name);

struct Variable {
  std::string name;
  Marginal marginal;
};

/// Ordered list of independent input variables.
class ProbabilisticModel {
 public:
  explicit ProbabilisticModel(std::vector<Variable> variables);

  std::size_t dimension() const { return variables_.size(); }
  const Variable& operator[](std::size_t i) const { return variables_[i]; }
  const std::vector<Variable>& variables() const { return variables_; }

  ProbabilisticModel without_truncation() const;

 private:
  std::vector<Variable> variables_;
};

enum class Space { Physical, StdUniform, StdLegendre };

std::string to_string(Space space);

/// Rows are samples, columns are variables.
struct SampleMatrix {
  Space space;
  Eigen::MatrixXd values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// Per-dimension isoprobabilistic map between spaces:
///   Physical -> StdUniform:    u = F_i(x)
///   StdUniform -> StdLegendre: xi = 2u - 1
/// and the inverses. Throws DomainError for values outside the source support.
SampleMatrix transform(const SampleMatrix& x, Space to, const ProbabilisticModel& model);

/// Row-level variants used on hot paths.
void physical_to_legendre(const ProbabilisticModel& model, std::span<const double> x,
                          std::span<double> xi);
void legendre_to_physical(const ProbabilisticModel& model, std::span<const double> xi,
                          std::span<double> x);

/// Sobol low-discrepancy sequence (Joe-Kuo direction numbers, 32-bit
/// resolution). The all-zero point at index 0 is never produced.
///
/// With a scramble seed the generator matrices get a random linear matrix
/// scramble plus a digital shift, and points are centred in their 2^-32 cell.
class SobolSequence {
 public:
  static constexpr std::size_t kMaxDimension = 1000;

  explicit SobolSequence(std::size_t dimension, std::optional<std::uint64_t> scramble_seed = std::nullopt);

  std::size_t dimension() const { return dimension_; }
  /// Index of the next point to be produced (starts at 1).
  std::uint64_t index() const { return index_; }
  void skip(std::uint64_t count);
  void next(std::span<double> point);

 private:
  void seek(std::uint64_t index);

  std::size_t dimension_;
  std::vector<std::uint32_t> directions_;  // dimension x 32
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
  double offset_ = 0.0;
  std::uint64_t index_ = 0;
};

/// First n points (after skipping `skip` points) of the d-dimensional Sobol
/// sequence, starting at index 1.
SampleMatrix sobol_points(std::size_t n, std::size_t d, std::uint64_t skip = 0);

/// As sobol_points, from the sequence scrambled with `seed`.
SampleMatrix scrambled_sobol_points(std::size_t n, std::size_t d, std::uint64_t seed, std::uint64_t skip = 0);

/// Seeded stream of i.i.d. uniforms organised in fixed-size chunks. Each chunk
/// is generated from its own substream, so chunk contents do not depend on
/// evaluation order.
class UniformStream {
 public:
  static constexpr std::size_t kChunkRows = 4096;

  UniformStream(std::uint64_t seed, std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  /// Fills `out` (rows x dimension, rows <= kChunkRows) with the first
  /// `out.rows()` rows of chunk `chunk`. Values lie in (0, 1).
  void fill_chunk(std::uint64_t chunk, Eigen::MatrixXd& out) const;

 private:
  std::uint64_t seed_;
  std::size_t dimension_;
};

/// n i.i.d. uniforms in (0,1)^d.
SampleMatrix mc_uniform(std::size_t n, std::size_t d, std::uint64_t seed);

/// n i.i.d. draws from the model via inverse-CDF sampling.
SampleMatrix mc_sample(const ProbabilisticModel& model, std::size_t n, std::uint64_t seed);

}  // namespace sashpcfe
