#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lpsketch/error.hpp"

namespace lpsketch {

/// Dense n x D matrix of finite reals, stored row-major.
class DataMatrix {
 public:
  DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t i) const;
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

/// An even distance order p with 2 <= p <= kMaxOrder.
class EvenOrder {
 public:
  // Binomial coefficients C(16, t) still fit comfortably in 64 bits; larger
  // orders are refused.
  static constexpr int kMaxOrder = 16;

  explicit EvenOrder(int p);

  int value() const noexcept { return p_; }
  /// Highest marginal / joint moment order any variance term needs.
  int moment_order() const noexcept { return 2 * p_ - 2; }

  friend bool operator==(EvenOrder, EvenOrder) = default;

 private:
  int p_;
};

/// c_t = (-1)^t C(p, t), t = 0..p. c_0 and c_p weight the marginal norms and
/// c_1..c_{p-1} weight the inner products sum x^{p-t} y^t.
struct DecompositionCoefficients {
  EvenOrder p;
  std::vector<std::int64_t> coeffs;

  std::int64_t operator[](int t) const { return coeffs[static_cast<std::size_t>(t)]; }
};

DecompositionCoefficients decomposition_coefficients(EvenOrder p);

/// M[s][t] = sum_i x_i^s y_i^t for 0 <= s, t <= max_order.
class JointMomentTable {
 public:
  JointMomentTable(int max_order, std::vector<double> moments);

  int max_order() const noexcept { return max_order_; }

  double operator()(int s, int t) const {
    return moments_[static_cast<std::size_t>(s) * stride() + static_cast<std::size_t>(t)];
  }

 private:
  std::size_t stride() const noexcept { return static_cast<std::size_t>(max_order_) + 1; }

  int max_order_;
  std::vector<double> moments_;
};

JointMomentTable joint_moments(std::span<const double> x, std::span<const double> y, int max_order);

double exact_lp_distance(std::span<const double> x, std::span<const double> y, EvenOrder p);

/// Marginal norms plus weighted inner products, evaluated exactly.
double decomposed_lp_distance(std::span<const double> x, std::span<const double> y, EvenOrder p);

/// Sums with a plain loop for short inputs and pairwise (tree) summation above
/// kPairwiseThreshold elements.
double accurate_sum(std::span<const double> values);

inline constexpr std::size_t kPairwiseThreshold = 4096;

void require_same_length(std::span<const double> x, std::span<const double> y);
void require_finite(std::span<const double> x);

}  // namespace lpsketch
