#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace sashpcfe::detail {

inline constexpr std::size_t kSobolMaxDim = 1000;
inline constexpr std::size_t kSobolMaxDegree = 13;

// Primitive polynomial (leading and trailing bits included) and the initial
// direction integers m_1..m_s for one Sobol dimension.
struct SobolDirection {
  std::uint32_t poly;
  std::array<std::uint32_t, kSobolMaxDegree> m;
};

extern const std::array<SobolDirection, kSobolMaxDim> kSobolDirections;

}  // namespace sashpcfe::detail
