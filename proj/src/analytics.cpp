#include "lpsketch/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lpsketch/projections.hpp"

namespace lpsketch {

namespace {

void require_k(double k) {
  if (!(k >= 1.0)) throw Error(ErrorCode::InvalidParameter, "sketch width k must be >= 1");
}

void require_order(const JointMomentTable& m, int order) {
  if (m.max_order() < order) {
    throw Error(ErrorCode::InvalidParameter, "moment table order " + std::to_string(m.max_order()) +
                                                 " below required " + std::to_string(order));
  }
}

double sq(double v) { return v * v; }

// (PQ - a^2)^2 / (PQ + a^2); zero when the denominator vanishes.
double mle_term(double pq, double a) {
  const double denom = pq + a * a;
  if (denom == 0.0) return 0.0;
  return sq(pq - a * a) / denom;
}

}  // namespace

double variance_alternative_p4(const JointMomentTable& m, double k) {
  require_k(k);
  require_order(m, 6);
  return (36.0 * (m(4, 0) * m(0, 4) + sq(m(2, 2))) + 16.0 * (m(6, 0) * m(0, 2) + sq(m(3, 1))) +
          16.0 * (m(2, 0) * m(0, 6) + sq(m(1, 3)))) /
         k;
}

double delta4(const JointMomentTable& m, double k) {
  require_k(k);
  require_order(m, 6);
  return (-48.0 * (m(5, 0) * m(0, 3) + m(2, 1) * m(3, 2)) -
          48.0 * (m(3, 0) * m(0, 5) + m(1, 2) * m(2, 3)) +
          32.0 * (m(4, 0) * m(0, 4) + m(1, 1) * m(3, 3))) /
         k;
}

double variance_basic_p4(const JointMomentTable& m, double k) {
  return variance_alternative_p4(m, k) + delta4(m, k);
}

double variance_mle_p4(const JointMomentTable& m, double k) {
  require_k(k);
  require_order(m, 6);
  return (36.0 * mle_term(m(4, 0) * m(0, 4), m(2, 2)) + 16.0 * mle_term(m(6, 0) * m(0, 2), m(3, 1)) +
          16.0 * mle_term(m(2, 0) * m(0, 6), m(1, 3))) /
         k;
}

double variance_alternative_p6(const JointMomentTable& m, double k) {
  require_k(k);
  require_order(m, 10);
  return (400.0 * (m(6, 0) * m(0, 6) + sq(m(3, 3))) + 225.0 * (m(4, 0) * m(0, 8) + sq(m(2, 4))) +
          225.0 * (m(8, 0) * m(0, 4) + sq(m(4, 2))) + 36.0 * (m(2, 0) * m(0, 10) + sq(m(1, 5))) +
          36.0 * (m(10, 0) * m(0, 2) + sq(m(5, 1)))) /
         k;
}

double delta6(const JointMomentTable& m, double k) {
  require_k(k);
  require_order(m, 10);
  const double sum = -600.0 * (m(5, 0) * m(0, 7) + m(3, 4) * m(2, 3)) -
                     600.0 * (m(7, 0) * m(0, 5) + m(3, 2) * m(4, 3)) +
                     240.0 * (m(4, 0) * m(0, 8) + m(3, 5) * m(1, 3)) +
                     240.0 * (m(8, 0) * m(0, 4) + m(3, 1) * m(5, 3)) +
                     450.0 * (m(6, 0) * m(0, 6) + m(2, 2) * m(4, 4)) -
                     180.0 * (m(3, 0) * m(0, 9) + m(2, 5) * m(1, 4)) -
                     180.0 * (m(7, 0) * m(0, 5) + m(2, 1) * m(5, 4)) -
                     180.0 * (m(5, 0) * m(0, 7) + m(4, 5) * m(1, 2)) -
                     180.0 * (m(9, 0) * m(0, 3) + m(4, 1) * m(5, 2)) +
                     72.0 * (m(6, 0) * m(0, 6) + m(1, 1) * m(5, 5));
  return sum / k;
}

double variance_basic_p6(const JointMomentTable& m, double k) {
  return variance_alternative_p6(m, k) + delta6(m, k);
}

double variance_alternative_subgaussian_p4(const JointMomentTable& m, double k, double s) {
  require_k(k);
  require_order(m, 6);
  const double excess = s - 3.0;
  return variance_alternative_p4(m, k) +
         excess * (36.0 * m(4, 4) + 16.0 * m(6, 2) + 16.0 * m(2, 6)) / k;
}

double variance_subgaussian_p4(const JointMomentTable& m, double k, double s) {
  require_k(k);
  require_order(m, 6);
  const double excess = s - 3.0;
  const double cross = excess * (-48.0 * m(5, 3) - 48.0 * m(3, 5) + 32.0 * m(4, 4)) / k;
  return variance_alternative_subgaussian_p4(m, k, s) + delta4(m, k) + cross;
}

// Vector forms: one moment table per call.
double variance_basic_p4(std::span<const double> x, std::span<const double> y, double k) {
  return variance_basic_p4(joint_moments(x, y, 6), k);
}
double variance_alternative_p4(std::span<const double> x, std::span<const double> y, double k) {
  return variance_alternative_p4(joint_moments(x, y, 6), k);
}
double delta4(std::span<const double> x, std::span<const double> y, double k) {
  return delta4(joint_moments(x, y, 6), k);
}
double variance_mle_p4(std::span<const double> x, std::span<const double> y, double k) {
  return variance_mle_p4(joint_moments(x, y, 6), k);
}
double variance_basic_p6(std::span<const double> x, std::span<const double> y, double k) {
  return variance_basic_p6(joint_moments(x, y, 10), k);
}
double variance_alternative_p6(std::span<const double> x, std::span<const double> y, double k) {
  return variance_alternative_p6(joint_moments(x, y, 10), k);
}
double delta6(std::span<const double> x, std::span<const double> y, double k) {
  return delta6(joint_moments(x, y, 10), k);
}
double variance_subgaussian_p4(std::span<const double> x, std::span<const double> y, double k, double s) {
  return variance_subgaussian_p4(joint_moments(x, y, 6), k, s);
}

EstimatorKind default_estimator(StrategyKind strategy) noexcept {
  return strategy == StrategyKind::Basic ? EstimatorKind::Basic : EstimatorKind::Alternative;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial) noexcept {
  return mix64(master_seed ^ mix64(trial));
}

VarianceReport analytic_report(std::span<const double> x, std::span<const double> y,
                               const SketchConfig& config, EstimatorKind estimator) {
  require_same_length(x, y);
  require_finite(x);
  require_finite(y);
  validate(config);
  check_estimator_supported(config, estimator);
  const int p = config.p.value();
  if (p != 4 && p != 6) {
    throw Error(ErrorCode::Unsupported,
                "variance formulas exist for p = 4 and 6 only, got p=" + std::to_string(p));
  }
  const auto m = joint_moments(x, y, 2 * p - 2);
  const double k = config.k;
  const double s = moment_s(config.family);
  const bool normal = config.family.kind() == FamilyKind::Normal;

  VarianceReport r;
  r.config = config;
  r.estimator = estimator;
  r.exact = exact_lp_distance(x, y, config.p);
  r.subgaussian_s = s;
  if (p == 4) {
    r.basic = variance_basic_p4(m, k);
    r.alternative = variance_alternative_p4(m, k);
    r.delta = delta4(m, k);
    r.mle_asymptotic = variance_mle_p4(m, k);
    r.subgaussian_variance = variance_subgaussian_p4(m, k, s);
  } else {
    r.basic = variance_basic_p6(m, k);
    r.alternative = variance_alternative_p6(m, k);
    r.delta = delta6(m, k);
  }
  const double scale = std::max({std::fabs(r.basic), std::fabs(r.alternative) + std::fabs(r.delta),
                                 std::numeric_limits<double>::min()});
  r.identity_residual = std::fabs(r.basic - (r.alternative + r.delta)) / scale;

  switch (estimator) {
    case EstimatorKind::Basic:
      if (p == 4) {
        r.analytic = normal ? r.basic : *r.subgaussian_variance;
      } else if (normal) {
        r.analytic = r.basic;
      }
      break;
    case EstimatorKind::Alternative:
      if (p == 4) {
        r.analytic = normal ? r.alternative : variance_alternative_subgaussian_p4(m, k, s);
      } else if (normal) {
        r.analytic = r.alternative;
      }
      break;
    case EstimatorKind::MarginMLE:
      // Only the independent-matrix, normal-entry case has an asymptotic formula.
      if (normal && config.strategy == StrategyKind::Alternative) r.analytic = r.mle_asymptotic;
      break;
  }
  return r;
}

namespace {

// Welford accumulator with Chan's merge.
struct RunningMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }

  void merge(const RunningMoments& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double n1 = static_cast<double>(count);
    const double n2 = static_cast<double>(other.count);
    const double d = other.mean - mean;
    const double n = n1 + n2;
    mean += d * n2 / n;
    m2 += other.m2 + d * d * n1 * n2 / n;
    count += other.count;
  }

  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

constexpr std::size_t kTrialChunk = 1024;

}  // namespace

VarianceReport monte_carlo_validate(std::span<const double> x, std::span<const double> y,
                                    const SketchConfig& config, std::size_t trials,
                                    EstimatorKind estimator) {
  if (trials < kMinValidationTrials) {
    throw Error(ErrorCode::InvalidParameter, "need at least " + std::to_string(kMinValidationTrials) +
                                                 " trials, got " + std::to_string(trials));
  }
  auto report = analytic_report(x, y, config, estimator);
  const auto range = matrix_range(config);

  RunningMoments total;
  for (std::size_t start = 0; start < trials; start += kTrialChunk) {
    RunningMoments chunk;
    const std::size_t stop = std::min(trials, start + kTrialChunk);
    for (std::size_t t = start; t < stop; ++t) {
      SketchConfig trial_config = config;
      trial_config.master_seed = trial_seed(config.master_seed, t);
      const MaterializedProjection projection(
          CounterProjection(trial_config.master_seed, trial_config.family), range.first, range.count,
          x.size(), trial_config.k);
      const auto sa = sketch_row_with(x, trial_config, projection, 0);
      const auto sb = sketch_row_with(y, trial_config, projection, 1);
      chunk.add(estimate(sa, sb, estimator).value);
    }
    total.merge(chunk);
  }

  const double variance = total.variance();
  report.trials = trials;
  report.empirical_mean = total.mean;
  report.empirical_variance = variance;
  report.empirical_mse = variance * static_cast<double>(trials - 1) / static_cast<double>(trials) +
                         sq(total.mean - report.exact);
  const double se = std::sqrt(variance / static_cast<double>(trials));
  const double bias = total.mean - report.exact;
  if (se > 0.0) {
    report.mean_z_score = bias / se;
  } else {
    report.mean_z_score = bias == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), bias);
  }
  if (report.analytic && *report.analytic > 0.0) report.variance_ratio = variance / *report.analytic;
  return report;
}

}  // namespace lpsketch
