#include "lpsketch/projections.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lpsketch/error.hpp"

namespace lpsketch {

ProjectionFamily ProjectionFamily::three_point(double s) {
  if (!(s >= 1.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::InvalidParameter,
                "three-point family needs s >= 1, got " + std::to_string(s));
  }
  return ProjectionFamily(FamilyKind::ThreePoint, s);
}

double moment_s(const ProjectionFamily& family) noexcept { return family.s(); }

const char* family_name(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::Normal:
      return "normal";
    case FamilyKind::Uniform:
      return "uniform";
    case FamilyKind::ThreePoint:
      return "threepoint";
  }
  return "unknown";
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  constexpr std::uint64_t kM0 = 0xD2511F53u;
  constexpr std::uint64_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kM0 * ctr[0];
    const std::uint64_t p1 = kM1 * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

constexpr double kTwoPow53 = 9007199254740992.0;

// Strictly inside (0, 1).
double unit_uniform(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return (static_cast<double>(bits) + 0.5) / kTwoPow53;
}

}  // namespace

double entry(const MatrixKey& key, std::uint64_t i, std::uint32_t j, const ProjectionFamily& family) noexcept {
  const auto w = philox4x32(
      {j, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32), key.matrix_index},
      {static_cast<std::uint32_t>(key.master_seed), static_cast<std::uint32_t>(key.master_seed >> 32)});
  const double u1 = unit_uniform(w[0], w[1]);
  switch (family.kind()) {
    case FamilyKind::Normal: {
      const double u2 = unit_uniform(w[2], w[3]);
      return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    case FamilyKind::Uniform:
      return std::numbers::sqrt3 * (2.0 * u1 - 1.0);
    case FamilyKind::ThreePoint: {
      const double s = family.s();
      const double mass = 1.0 / s;
      if (u1 < 0.5 * mass) return std::sqrt(s);
      if (u1 < mass) return -std::sqrt(s);
      return 0.0;
    }
  }
  return 0.0;
}

MaterializedProjection::MaterializedProjection(const CounterProjection& source, std::uint32_t first,
                                               std::uint32_t count, std::uint64_t rows, std::uint32_t cols)
    : first_(first), rows_(rows), cols_(cols), entries_(static_cast<std::size_t>(count) * rows * cols) {
  std::size_t pos = 0;
  for (std::uint32_t m = 0; m < count; ++m) {
    for (std::uint64_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) entries_[pos++] = source(first + m, i, j);
    }
  }
}

}  // namespace lpsketch
