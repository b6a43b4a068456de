#include "lpsketch/model.hpp"

#include <cmath>
#include <string>

namespace lpsketch {

int exit_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Usage:
    case ErrorCode::InvalidParameter:
    case ErrorCode::OrderUnsupported:
      return 2;
    case ErrorCode::Dimension:
    case ErrorCode::Data:
    case ErrorCode::Io:
      return 3;
    case ErrorCode::Incompatible:
    case ErrorCode::Unsupported:
      return 4;
  }
  return 1;
}

void require_same_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::Dimension, "vector length mismatch: " + std::to_string(x.size()) +
                                          " vs " + std::to_string(y.size()));
  }
}

void require_finite(std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw Error(ErrorCode::Data, "non-finite value at coordinate " + std::to_string(i));
    }
  }
}

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0) {
    throw Error(ErrorCode::Data, "data matrix must have at least one row and one column");
  }
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorCode::Dimension, "data matrix holds " + std::to_string(values_.size()) +
                                          " values, expected " + std::to_string(rows_ * cols_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::Data, "non-finite value at row " + std::to_string(i / cols_) +
                                       ", column " + std::to_string(i % cols_));
    }
  }
}

std::span<const double> DataMatrix::row(std::size_t i) const {
  if (i >= rows_) {
    throw Error(ErrorCode::Usage, "row index " + std::to_string(i) + " out of range");
  }
  return std::span<const double>(values_).subspan(i * cols_, cols_);
}

EvenOrder::EvenOrder(int p) : p_(p) {
  if (p < 2 || p % 2 != 0 || p > kMaxOrder) {
    throw Error(ErrorCode::OrderUnsupported,
                "order p=" + std::to_string(p) + " unsupported: need an even p in [2, " +
                    std::to_string(kMaxOrder) + "]");
  }
}

DecompositionCoefficients decomposition_coefficients(EvenOrder p) {
  const int order = p.value();
  std::vector<std::int64_t> coeffs(static_cast<std::size_t>(order) + 1);
  std::int64_t binom = 1;
  for (int t = 0; t <= order; ++t) {
    coeffs[static_cast<std::size_t>(t)] = (t % 2 == 0) ? binom : -binom;
    // C(p, t+1) = C(p, t) (p - t) / (t + 1), exact in integers.
    binom = binom * (order - t) / (t + 1);
  }
  return {p, std::move(coeffs)};
}

namespace {

double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kBlock = 128;
  if (v.size() <= kBlock) {
    double acc = 0.0;
    for (double e : v) acc += e;
    return acc;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

// powers[t * n + i] = v_i^t for t = 0..max_order, by iterated multiplication.
std::vector<double> power_table(std::span<const double> v, int max_order) {
  const std::size_t n = v.size();
  std::vector<double> powers((static_cast<std::size_t>(max_order) + 1) * n);
  for (std::size_t i = 0; i < n; ++i) powers[i] = 1.0;
  for (int t = 1; t <= max_order; ++t) {
    const std::size_t row = static_cast<std::size_t>(t) * n;
    for (std::size_t i = 0; i < n; ++i) powers[row + i] = powers[row - n + i] * v[i];
  }
  return powers;
}

}  // namespace

double accurate_sum(std::span<const double> values) {
  if (values.size() > kPairwiseThreshold) return pairwise_sum(values);
  double acc = 0.0;
  for (double e : values) acc += e;
  return acc;
}

JointMomentTable::JointMomentTable(int max_order, std::vector<double> moments)
    : max_order_(max_order), moments_(std::move(moments)) {
  if (moments_.size() != stride() * stride()) {
    throw Error(ErrorCode::Dimension, "moment table size does not match its order");
  }
}

JointMomentTable joint_moments(std::span<const double> x, std::span<const double> y, int max_order) {
  require_same_length(x, y);
  if (max_order < 0) throw Error(ErrorCode::InvalidParameter, "negative moment order");
  const std::size_t n = x.size();
  const auto px = power_table(x, max_order);
  const auto py = power_table(y, max_order);
  const std::size_t stride = static_cast<std::size_t>(max_order) + 1;
  std::vector<double> moments(stride * stride);
  std::vector<double> products(n);
  for (std::size_t s = 0; s < stride; ++s) {
    for (std::size_t t = 0; t < stride; ++t) {
      for (std::size_t i = 0; i < n; ++i) products[i] = px[s * n + i] * py[t * n + i];
      moments[s * stride + t] = accurate_sum(products);
    }
  }
  return JointMomentTable(max_order, std::move(moments));
}

double exact_lp_distance(std::span<const double> x, std::span<const double> y, EvenOrder p) {
  require_same_length(x, y);
  std::vector<double> terms(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    double power = 1.0;
    for (int t = 0; t < p.value(); ++t) power *= diff;
    terms[i] = power;
  }
  return accurate_sum(terms);
}

double decomposed_lp_distance(std::span<const double> x, std::span<const double> y, EvenOrder p) {
  const auto coeffs = decomposition_coefficients(p);
  const auto moments = joint_moments(x, y, p.value());
  double value = 0.0;
  for (int t = 0; t <= p.value(); ++t) {
    value += static_cast<double>(coeffs[t]) * moments(p.value() - t, t);
  }
  return value;
}

}  // namespace lpsketch
