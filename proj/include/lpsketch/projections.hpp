#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lpsketch/error.hpp"

namespace lpsketch {

enum class FamilyKind : std::uint32_t { Normal = 0, Uniform = 1, ThreePoint = 2 };

/// Distribution of the projection entries r_ij. Every family has mean 0 and
/// unit variance; they differ in the fourth moment E(r^4) = s.
class ProjectionFamily {
 public:
  static ProjectionFamily normal() { return ProjectionFamily(FamilyKind::Normal, 3.0); }
  static ProjectionFamily uniform() { return ProjectionFamily(FamilyKind::Uniform, 9.0 / 5.0); }
  /// +sqrt(s) w.p. 1/(2s), 0 w.p. 1 - 1/s, -sqrt(s) w.p. 1/(2s). Requires s >= 1.
  static ProjectionFamily three_point(double s);

  FamilyKind kind() const noexcept { return kind_; }
  double s() const noexcept { return s_; }

  friend bool operator==(const ProjectionFamily&, const ProjectionFamily&) = default;

 private:
  ProjectionFamily(FamilyKind kind, double s) : kind_(kind), s_(s) {}

  FamilyKind kind_;
  double s_;
};

/// Analytic fourth moment of the family: 3, 9/5 or s.
double moment_s(const ProjectionFamily& family) noexcept;

const char* family_name(FamilyKind kind) noexcept;

/// Identifies one projection matrix: the basic strategy uses index 0, the
/// alternative strategy uses 1..p-1.
struct MatrixKey {
  std::uint64_t master_seed = 0;
  std::uint32_t matrix_index = 0;
};

/// Philox4x32-10 block function (Salmon et al., counter-based RNG).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer; used to derive child seeds.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Entry r_ij of the matrix named by `key`. Pure in all arguments.
///
/// Layout: Philox key = (seed low, seed high), counter = (j, i low, i high,
/// matrix index). The four output words give two 53-bit uniforms
/// u1 = ((w0 << 21) ^ (w1 >> 11) + 0.5) / 2^53 and u2 likewise from (w2, w3).
///   Normal:     Box-Muller, sqrt(-2 ln u1) cos(2 pi u2)
///   Uniform:    sqrt(3) (2 u1 - 1)
///   ThreePoint: +sqrt(s) if u1 < 1/(2s), -sqrt(s) if u1 < 1/s, else 0
double entry(const MatrixKey& key, std::uint64_t i, std::uint32_t j, const ProjectionFamily& family) noexcept;

/// Projection source over the counter-based generator; never materializes R.
class CounterProjection {
 public:
  CounterProjection(std::uint64_t master_seed, ProjectionFamily family)
      : seed_(master_seed), family_(family) {}

  double operator()(std::uint32_t matrix, std::uint64_t i, std::uint32_t j) const noexcept {
    return entry(MatrixKey{seed_, matrix}, i, j, family_);
  }

 private:
  std::uint64_t seed_;
  ProjectionFamily family_;
};

/// Dense copy of matrices [first, first + count) for a D x k shape. Used when
/// the same matrices are applied to several rows in a tight loop (Monte Carlo
/// trials); values are identical to CounterProjection's.
class MaterializedProjection {
 public:
  MaterializedProjection(const CounterProjection& source, std::uint32_t first, std::uint32_t count,
                         std::uint64_t rows, std::uint32_t cols);

  double operator()(std::uint32_t matrix, std::uint64_t i, std::uint32_t j) const noexcept {
    return entries_[((matrix - first_) * rows_ + i) * cols_ + j];
  }

 private:
  std::uint32_t first_;
  std::uint64_t rows_;
  std::uint64_t cols_;
  std::vector<double> entries_;
};

}  // namespace lpsketch
