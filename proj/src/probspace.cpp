#include "sashpcfe/probspace.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "sashpcfe/error.hpp"
#include "sashpcfe/sobol_directions.hpp"

namespace sashpcfe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double std_normal_ccdf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }
double std_normal_ppf(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}
double std_normal_ppf_upper(double q) {
  if (q <= 0.0) return kInf;
  if (q >= 1.0) return -kInf;
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
}

void require_sd(double sd) {
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    std::ostringstream msg;
    msg << "standard deviation must be positive and finite, got " << sd;
    throw ParameterDomainError(msg.str());
  }
}

}  // namespace

DistributionParams moment_match(MarginalKind kind, double mean, double sd) {
  require_sd(sd);
  if (!std::isfinite(mean)) throw ParameterDomainError("mean must be finite");
  switch (kind) {
    case MarginalKind::Uniform: {
      const double half = std::sqrt(3.0) * sd;
      return {mean - half, mean + half};
    }
    case MarginalKind::Normal:
      return {mean, sd};
    case MarginalKind::Lognormal: {
      if (!(mean > 0.0)) {
        throw ParameterDomainError("lognormal mean must be positive");
      }
      const double ratio = sd / mean;
      const double sigma2 = std::log1p(ratio * ratio);
      return {std::log(mean) - 0.5 * sigma2, std::sqrt(sigma2)};
    }
    case MarginalKind::Gumbel: {
      const double scale = sd * std::sqrt(6.0) / std::numbers::pi;
      return {mean - std::numbers::egamma * scale, scale};
    }
  }
  throw ParameterDomainError("unknown marginal kind");
}

Marginal::Marginal(MarginalKind kind, double mean, double sd, DistributionParams params)
    : kind_(kind), mean_(mean), sd_(sd), params_(params) {}

Marginal Marginal::uniform(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ParameterDomainError("uniform bounds must be finite with lo < hi");
  }
  return Marginal(MarginalKind::Uniform, 0.5 * (lo + hi), (hi - lo) / std::sqrt(12.0), {lo, hi});
}

Marginal Marginal::normal(double mean, double sd) {
  return Marginal(MarginalKind::Normal, mean, sd, moment_match(MarginalKind::Normal, mean, sd));
}

Marginal Marginal::lognormal(double mean, double sd) {
  return Marginal(MarginalKind::Lognormal, mean, sd,
                  moment_match(MarginalKind::Lognormal, mean, sd));
}

Marginal Marginal::gumbel(double mean, double sd) {
  return Marginal(MarginalKind::Gumbel, mean, sd, moment_match(MarginalKind::Gumbel, mean, sd));
}

Marginal Marginal::truncated(Interval bounds) const {
  if (!(bounds.lo < bounds.hi)) {
    throw ParameterDomainError("truncation interval must satisfy a < b");
  }
  Marginal out = untruncated();
  const Interval base = out.support();
  const double lo = std::max(bounds.lo, base.lo);
  const double hi = std::min(bounds.hi, base.hi);
  if (!(lo < hi)) throw ParameterDomainError("truncation interval misses the support");
  out.cdf_lo_ = std::isfinite(lo) ? out.base_cdf(lo) : 0.0;
  out.ccdf_hi_ = std::isfinite(hi) ? out.base_ccdf(hi) : 0.0;
  const double cdf_hi = std::isfinite(hi) ? out.base_cdf(hi) : 1.0;
  const double ccdf_lo = std::isfinite(lo) ? out.base_ccdf(lo) : 1.0;
  out.mass_ = out.cdf_lo_ < 0.5 ? cdf_hi - out.cdf_lo_ : ccdf_lo - out.ccdf_hi_;
  if (!(out.mass_ > 0.0)) {
    throw ParameterDomainError("truncation interval carries no probability mass");
  }
  out.truncation_ = Interval{lo, hi};
  return out;
}

Marginal Marginal::untruncated() const {
  Marginal out = *this;
  out.truncation_.reset();
  out.cdf_lo_ = 0.0;
  out.ccdf_hi_ = 0.0;
  out.mass_ = 1.0;
  return out;
}

Interval Marginal::support() const {
  if (truncation_) return *truncation_;
  switch (kind_) {
    case MarginalKind::Uniform:
      return {params_.first, params_.second};
    case MarginalKind::Lognormal:
      return {0.0, kInf};
    default:
      return {-kInf, kInf};
  }
}

double Marginal::base_cdf(double x) const {
  const auto [a, b] = params_;
  switch (kind_) {
    case MarginalKind::Uniform:
      return std::clamp((x - a) / (b - a), 0.0, 1.0);
    case MarginalKind::Normal:
      return std_normal_cdf((x - a) / b);
    case MarginalKind::Lognormal:
      return x <= 0.0 ? 0.0 : std_normal_cdf((std::log(x) - a) / b);
    case MarginalKind::Gumbel:
      return std::exp(-std::exp(-(x - a) / b));
  }
  return 0.0;
}

double Marginal::base_ccdf(double x) const {
  const auto [a, b] = params_;
  switch (kind_) {
    case MarginalKind::Uniform:
      return std::clamp((b - x) / (b - a), 0.0, 1.0);
    case MarginalKind::Normal:
      return std_normal_ccdf((x - a) / b);
    case MarginalKind::Lognormal:
      return x <= 0.0 ? 1.0 : std_normal_ccdf((std::log(x) - a) / b);
    case MarginalKind::Gumbel:
      return -std::expm1(-std::exp(-(x - a) / b));
  }
  return 0.0;
}

double Marginal::base_ppf(double p) const {
  const auto [a, b] = params_;
  switch (kind_) {
    case MarginalKind::Uniform:
      return a + p * (b - a);
    case MarginalKind::Normal:
      return a + b * std_normal_ppf(p);
    case MarginalKind::Lognormal:
      return std::exp(a + b * std_normal_ppf(p));
    case MarginalKind::Gumbel:
      return a - b * std::log(-std::log(p));
  }
  return 0.0;
}

double Marginal::base_ppf_upper(double q) const {
  const auto [a, b] = params_;
  switch (kind_) {
    case MarginalKind::Uniform:
      return b - q * (b - a);
    case MarginalKind::Normal:
      return a + b * std_normal_ppf_upper(q);
    case MarginalKind::Lognormal:
      return std::exp(a + b * std_normal_ppf_upper(q));
    case MarginalKind::Gumbel:
      return a - b * std::log(-std::log1p(-q));
  }
  return 0.0;
}

double Marginal::base_pdf(double x) const {
  const auto [a, b] = params_;
  switch (kind_) {
    case MarginalKind::Uniform:
      return (x < a || x > b) ? 0.0 : 1.0 / (b - a);
    case MarginalKind::Normal: {
      const double z = (x - a) / b;
      return std::exp(-0.5 * z * z) / (b * std::sqrt(2.0 * std::numbers::pi));
    }
    case MarginalKind::Lognormal: {
      if (x <= 0.0) return 0.0;
      const double z = (std::log(x) - a) / b;
      return std::exp(-0.5 * z * z) / (x * b * std::sqrt(2.0 * std::numbers::pi));
    }
    case MarginalKind::Gumbel: {
      const double z = (x - a) / b;
      return std::exp(-z - std::exp(-z)) / b;
    }
  }
  return 0.0;
}

double Marginal::cdf(double x) const {
  const Interval s = support();
  if (x <= s.lo) return 0.0;
  if (x >= s.hi) return 1.0;
  if (!truncation_) return base_cdf(x);
  const double f = base_cdf(x);
  if (f <= 0.5) return std::clamp((f - cdf_lo_) / mass_, 0.0, 1.0);
  return std::clamp(1.0 - (base_ccdf(x) - ccdf_hi_) / mass_, 0.0, 1.0);
}

double Marginal::ppf(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("ppf argument outside [0,1]");
  const Interval s = support();
  if (u == 0.0) return s.lo;
  if (u == 1.0) return s.hi;
  const double p = cdf_lo_ + u * mass_;
  const double x = p <= 0.5 ? base_ppf(p) : base_ppf_upper(ccdf_hi_ + (1.0 - u) * mass_);
  return std::clamp(x, s.lo, s.hi);
}

double Marginal::pdf(double x) const {
  const Interval s = support();
  if (x < s.lo || x > s.hi) return 0.0;
  return base_pdf(x) / mass_;
}

std::string to_string(MarginalKind kind) {
  switch (kind) {
    case MarginalKind::Uniform:
      return "uniform";
    case MarginalKind::Normal:
      return "normal";
    case MarginalKind::Lognormal:
      return "lognormal";
    case MarginalKind::Gumbel:
      return "gumbel";
  }
  return "unknown";
}

MarginalKind marginal_kind_from_string(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "uniform") return MarginalKind::Uniform;
  if (lower == "normal" || lower == "gaussian") return MarginalKind::Normal;
  if (lower == "lognormal") return MarginalKind::Lognormal;
  if (lower == "gumbel") return MarginalKind::Gumbel;
  throw ParameterDomainError("unknown marginal kind '" + name + "'");
}

ProbabilisticModel::ProbabilisticModel(std::vector<Variable> variables)
    : variables_(std::move(variables)) {
  if (variables_.empty()) throw ParameterDomainError("a model needs at least one variable");
}

ProbabilisticModel ProbabilisticModel::without_truncation() const {
  std::vector<Variable> vars = variables_;
  for (auto& v : vars) v.marginal = v.marginal.untruncated();
  return ProbabilisticModel(std::move(vars));
}

std::string to_string(Space space) {
  switch (space) {
    case Space::Physical:
      return "physical";
    case Space::StdUniform:
      return "std-uniform";
    case Space::StdLegendre:
      return "std-legendre";
  }
  return "unknown";
}

namespace {

void check_dims(const ProbabilisticModel& model, std::size_t n) {
  if (model.dimension() != n) {
    std::ostringstream msg;
    msg << "sample dimension " << n << " does not match model dimension " << model.dimension();
    throw DimensionMismatch(msg.str());
  }
}

double to_uniform(const Marginal& m, double x, std::size_t dim) {
  const Interval s = m.support();
  if (!(x >= s.lo && x <= s.hi)) {
    std::ostringstream msg;
    msg << "value " << x << " outside the support [" << s.lo << ", " << s.hi
        << "] of variable " << dim;
    throw DomainError(msg.str());
  }
  return m.cdf(x);
}

double check_unit(double u, std::size_t dim) {
  if (!(u >= 0.0 && u <= 1.0)) {
    std::ostringstream msg;
    msg << "standard-uniform value " << u << " outside [0,1] in variable " << dim;
    throw DomainError(msg.str());
  }
  return u;
}

double check_legendre(double xi, std::size_t dim) {
  if (!(xi >= -1.0 && xi <= 1.0)) {
    std::ostringstream msg;
    msg << "standardized value " << xi << " outside [-1,1] in variable " << dim;
    throw DomainError(msg.str());
  }
  return xi;
}

}  // namespace

void physical_to_legendre(const ProbabilisticModel& model, std::span<const double> x,
                          std::span<double> xi) {
  check_dims(model, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xi[i] = 2.0 * to_uniform(model[i].marginal, x[i], i) - 1.0;
  }
}

void legendre_to_physical(const ProbabilisticModel& model, std::span<const double> xi,
                          std::span<double> x) {
  check_dims(model, xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    x[i] = model[i].marginal.ppf(0.5 * (check_legendre(xi[i], i) + 1.0));
  }
}

SampleMatrix transform(const SampleMatrix& x, Space to, const ProbabilisticModel& model) {
  check_dims(model, static_cast<std::size_t>(x.cols()));
  if (x.space == to) return x;
  SampleMatrix out{to, Eigen::MatrixXd(x.rows(), x.cols())};
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto dim = static_cast<std::size_t>(j);
    const Marginal& m = model[dim].marginal;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double v = x.values(i, j);
      // Route everything through the uniform space.
      double u = 0.0;
      switch (x.space) {
        case Space::Physical:
          u = to_uniform(m, v, dim);
          break;
        case Space::StdUniform:
          u = check_unit(v, dim);
          break;
        case Space::StdLegendre:
          u = 0.5 * (check_legendre(v, dim) + 1.0);
          break;
      }
      switch (to) {
        case Space::Physical:
          out.values(i, j) = m.ppf(u);
          break;
        case Space::StdUniform:
          out.values(i, j) = u;
          break;
        case Space::StdLegendre:
          out.values(i, j) = 2.0 * u - 1.0;
          break;
      }
    }
  }
  return out;
}

SobolSequence::SobolSequence(std::size_t dimension, std::optional<std::uint64_t> scramble_seed)
    : dimension_(dimension) {
  if (dimension == 0 || dimension > kMaxDimension) {
    std::ostringstream msg;
    msg << "Sobol dimension " << dimension << " not supported (1.." << kMaxDimension << ")";
    throw UnsupportedDimension(msg.str());
  }
  directions_.assign(dimension * 32, 0);
  for (std::size_t d = 0; d < dimension; ++d) {
    std::uint32_t* v = &directions_[d * 32];
    const auto& entry = detail::kSobolDirections[d];
    const int degree = std::bit_width(entry.poly) - 1;
    std::array<std::uint64_t, 33> m{};  // m[1..32]
    if (degree == 0) {
      for (int i = 1; i <= 32; ++i) m[i] = 1;
    } else {
      for (int i = 1; i <= degree; ++i) m[i] = entry.m[i - 1];
      for (int i = degree + 1; i <= 32; ++i) {
        std::uint64_t value = m[i - degree] ^ (m[i - degree] << degree);
        for (int k = 1; k < degree; ++k) {
          if ((entry.poly >> (degree - k)) & 1u) value ^= m[i - k] << k;
        }
        m[i] = value;
      }
    }
    for (int i = 1; i <= 32; ++i) v[i - 1] = static_cast<std::uint32_t>(m[i] << (32 - i));
  }
  shift_.assign(dimension, 0);
  if (scramble_seed) {
    const std::uint64_t seed = *scramble_seed;
    for (std::size_t d = 0; d < dimension; ++d) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(d), 0x5c4a3b1du};
      std::mt19937_64 rng(seq);
      // Row r of the lower-triangular scramble acts on digit r (bit 31 - r):
      // unit diagonal, random entries on the more significant digits.
      std::array<std::uint32_t, 32> rows{};
      for (int r = 0; r < 32; ++r) {
        const std::uint32_t diag = 1u << (31 - r);
        const std::uint32_t above = r == 0 ? 0u : ~((diag << 1) - 1u);
        rows[r] = diag | (static_cast<std::uint32_t>(rng()) & above);
      }
      std::uint32_t* v = &directions_[d * 32];
      for (int col = 0; col < 32; ++col) {
        std::uint32_t out = 0;
        for (int r = 0; r < 32; ++r) {
          if (std::popcount(rows[r] & v[col]) & 1) out |= 1u << (31 - r);
        }
        v[col] = out;
      }
      shift_[d] = static_cast<std::uint32_t>(rng());
    }
    offset_ = 0.5;
  }
  state_.assign(dimension, 0);
  seek(1);
}

void SobolSequence::seek(std::uint64_t index) {
  if (index >= (std::uint64_t{1} << 32)) throw DomainError("Sobol index exceeds 2^32 - 1");
  const std::uint64_t gray = index ^ (index >> 1);
  for (std::size_t d = 0; d < dimension_; ++d) {
    std::uint32_t x = 0;
    for (int bit = 0; bit < 32; ++bit) {
      if ((gray >> bit) & 1u) x ^= directions_[d * 32 + bit];
    }
    state_[d] = x;
  }
  index_ = index;
}

void SobolSequence::skip(std::uint64_t count) { seek(index_ + count); }

void SobolSequence::next(std::span<double> point) {
  if (point.size() != dimension_) throw DimensionMismatch("Sobol point buffer size mismatch");
  constexpr double kScale = 1.0 / 4294967296.0;
  for (std::size_t d = 0; d < dimension_; ++d) point[d] = ((state_[d] ^ shift_[d]) + offset_) * kScale;
  const std::uint64_t next_index = index_ + 1;
  if (next_index >= (std::uint64_t{1} << 32)) {
    index_ = next_index;
    return;
  }
  const int bit = std::countr_zero(next_index);
  for (std::size_t d = 0; d < dimension_; ++d) state_[d] ^= directions_[d * 32 + bit];
  index_ = next_index;
}

namespace {

SampleMatrix draw_sobol(SobolSequence& seq, std::size_t n, std::uint64_t skip) {
  const std::size_t d = seq.dimension();
  if (n == 0) throw ParameterDomainError("sobol_points needs n >= 1");
  if (skip > 0) seq.skip(skip);
  // Fill column-major storage row by row through a scratch buffer.
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<double> point(d);
  for (std::size_t i = 0; i < n; ++i) {
    seq.next(point);
    for (std::size_t j = 0; j < d; ++j) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = point[j];
    }
  }
  return {Space::StdUniform, std::move(values)};
}

}  // namespace

SampleMatrix sobol_points(std::size_t n, std::size_t d, std::uint64_t skip) {
  SobolSequence seq(d);
  return draw_sobol(seq, n, skip);
}

SampleMatrix scrambled_sobol_points(std::size_t n, std::size_t d, std::uint64_t seed, std::uint64_t skip) {
  SobolSequence seq(d, seed);
  return draw_sobol(seq, n, skip);
}

UniformStream::UniformStream(std::uint64_t seed, std::size_t dimension)
    : seed_(seed), dimension_(dimension) {
  if (dimension == 0) throw ParameterDomainError("uniform stream needs dimension >= 1");
}

void UniformStream::fill_chunk(std::uint64_t chunk, Eigen::MatrixXd& out) const {
  if (out.rows() > static_cast<Eigen::Index>(kChunkRows) ||
      out.cols() != static_cast<Eigen::Index>(dimension_)) {
    throw DimensionMismatch("uniform chunk buffer has the wrong shape");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  std::mt19937_64 rng(seq);
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = (static_cast<double>(rng() >> 11) + 0.5) * kScale;
    }
  }
}

SampleMatrix mc_uniform(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0) throw ParameterDomainError("sample size must be >= 1");
  UniformStream stream(seed, d);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::MatrixXd chunk;
  for (std::size_t start = 0, c = 0; start < n; start += UniformStream::kChunkRows, ++c) {
    const std::size_t rows = std::min(UniformStream::kChunkRows, n - start);
    chunk.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    stream.fill_chunk(c, chunk);
    values.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(rows)) = chunk;
  }
  return {Space::StdUniform, std::move(values)};
}

SampleMatrix mc_sample(const ProbabilisticModel& model, std::size_t n, std::uint64_t seed) {
  return transform(mc_uniform(n, model.dimension(), seed), Space::Physical, model);
}

}  // namespace sashpcfe
