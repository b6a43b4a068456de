#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "lpsketch/estimators.hpp"
#include "lpsketch/model.hpp"
#include "lpsketch/sketcher.hpp"

namespace lpsketch {

// Closed-form variances of the sketch estimators for a fixed pair (x, y) and
// sketch width k. Each has a moment-table form (table order >= 2p - 2) and a
// vector form that builds the table first. k < 1 throws InvalidParameter.

/// Basic strategy, normal entries, p = 4: the three squared-term groups plus
/// delta4.
double variance_basic_p4(const JointMomentTable& m, double k);
double variance_basic_p4(std::span<const double> x, std::span<const double> y, double k);

/// Alternative strategy, normal entries, p = 4 (no cross-term covariance).
double variance_alternative_p4(const JointMomentTable& m, double k);
double variance_alternative_p4(std::span<const double> x, std::span<const double> y, double k);

/// Basic minus alternative variance at p = 4. Non-positive for non-negative
/// data, non-negative when x <= 0 <= y.
double delta4(const JointMomentTable& m, double k);
double delta4(std::span<const double> x, std::span<const double> y, double k);

/// Asymptotic (large k) variance of the margin MLE estimator, p = 4,
/// alternative strategy. Each term is (PQ - a^2)^2 / (PQ + a^2) / k.
double variance_mle_p4(const JointMomentTable& m, double k);
double variance_mle_p4(std::span<const double> x, std::span<const double> y, double k);

/// Basic strategy, normal entries, p = 6, including delta6.
double variance_basic_p6(const JointMomentTable& m, double k);
double variance_basic_p6(std::span<const double> x, std::span<const double> y, double k);

/// The five squared-term groups of the p = 6 variance; the variance under
/// independent per-term matrices.
double variance_alternative_p6(const JointMomentTable& m, double k);
double variance_alternative_p6(std::span<const double> x, std::span<const double> y, double k);

double delta6(const JointMomentTable& m, double k);
double delta6(std::span<const double> x, std::span<const double> y, double k);

/// Basic strategy, p = 4, i.i.d. entries with E r^2 = 1 and E r^4 = s.
/// Reduces to variance_basic_p4 at s = 3.
double variance_subgaussian_p4(const JointMomentTable& m, double k, double s);
double variance_subgaussian_p4(std::span<const double> x, std::span<const double> y, double k, double s);

/// Alternative strategy with E r^4 = s: the squared-term groups of
/// variance_subgaussian_p4 without cross terms.
double variance_alternative_subgaussian_p4(const JointMomentTable& m, double k, double s);

/// Analytic and (optionally) empirical variances of one estimator on a pair.
struct VarianceReport {
  SketchConfig config;
  EstimatorKind estimator = EstimatorKind::Basic;
  double exact = 0.0;  // d_(p)
  double basic = 0.0;
  double alternative = 0.0;
  double delta = 0.0;
  /// |basic - (alternative + delta)| relative to the magnitudes involved.
  double identity_residual = 0.0;
  std::optional<double> mle_asymptotic;        // p = 4
  double subgaussian_s = 3.0;                  // fourth moment of the family
  std::optional<double> subgaussian_variance;  // p = 4, basic strategy at s
  /// The formula that describes the estimator/strategy/family combination
  /// being run, when one exists.
  std::optional<double> analytic;

  std::optional<std::size_t> trials;
  std::optional<double> empirical_mean;
  std::optional<double> empirical_variance;
  std::optional<double> empirical_mse;
  std::optional<double> mean_z_score;    // (mean - exact) / standard error
  std::optional<double> variance_ratio;  // empirical / analytic
};

inline constexpr std::size_t kMinValidationTrials = 100;

/// Analytic fields only. p must be 4 or 6.
VarianceReport analytic_report(std::span<const double> x, std::span<const double> y,
                               const SketchConfig& config, EstimatorKind estimator);

/// Runs `trials` independent sketch + estimate cycles. Trial t uses master
/// seed mix64(config.master_seed ^ mix64(t)); statistics are merged chunk by
/// chunk in a fixed order so the report is reproducible.
VarianceReport monte_carlo_validate(std::span<const double> x, std::span<const double> y,
                                    const SketchConfig& config, std::size_t trials,
                                    EstimatorKind estimator);

/// Default estimator for a strategy: Basic -> basic, Alternative -> alternative.
EstimatorKind default_estimator(StrategyKind strategy) noexcept;

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial) noexcept;

}  // namespace lpsketch
