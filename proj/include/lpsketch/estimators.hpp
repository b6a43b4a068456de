#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lpsketch/sketcher.hpp"

namespace lpsketch {

enum class EstimatorKind { Basic, Alternative, MarginMLE };

const char* estimator_name(EstimatorKind kind) noexcept;
std::optional<EstimatorKind> parse_estimator(std::string_view name) noexcept;

/// A real root of one margin cubic.
struct CubicSolution {
  double a_hat = 0.0;
  /// |g(z)| for the cubic rescaled by a = sqrt(mx my) z, so that the
  /// Cauchy-Schwarz interval maps to [-1, 1] and the residual is scale free.
  double residual = 0.0;
  int root_count = 0;
  bool boundary_clamped = false;
};

/// Accepted residual for a margin cubic root.
inline constexpr double kCubicResidualTolerance = 1e-9;

struct EstimateFlags {
  bool mle_on_basic_strategy = false;  // MLE variance analysis assumes independent matrices
  int mle_fallbacks = 0;               // cubic terms replaced by the plain u^T v / k
};

struct DistanceEstimate {
  std::size_t row_a = 0;
  std::size_t row_b = 0;
  EvenOrder p{4};
  double value = 0.0;
  EstimatorKind estimator = EstimatorKind::Basic;
  bool clamped = false;
  EstimateFlags flags;
  std::vector<CubicSolution> cubics;  // MarginMLE only, terms (3,1), (2,2), (1,3)
};

struct EstimateOptions {
  bool clamp_negative = false;
};

/// m_p(a) + m_p(b) + (1/k) sum_t c_t u_{p-t}^T v_t, all vectors under the one
/// shared matrix. Symmetric in (a, b) bit for bit.
DistanceEstimate estimate_basic(const RowSketch& a, const RowSketch& b, EstimateOptions options = {});

/// Same combination, but term t pairs a's power p-t with b's power t under
/// matrix t. Not symmetric: `a` plays the x role.
DistanceEstimate estimate_alternative(const RowSketch& a, const RowSketch& b, EstimateOptions options = {});

/// Root of a^3 - (a^2/k) ip + a (-mx my + (mx nv + my nu)/k) - mx my ip / k = 0
/// inside [-sqrt(mx my), sqrt(mx my)] closest to ip / k.
CubicSolution solve_margin_cubic(double ip, double nu, double nv, double mx, double my, std::size_t k);

/// p = 4 only. Each inner product is replaced by its margin-constrained root.
DistanceEstimate estimate_margin_mle(const RowSketch& a, const RowSketch& b, EstimateOptions options = {});

DistanceEstimate estimate(const RowSketch& a, const RowSketch& b, EstimatorKind kind, EstimateOptions options = {});

/// Throws if `kind` cannot run on sketches built with `config`.
void check_estimator_supported(const SketchConfig& config, EstimatorKind kind);

/// Every pair i < j of the collection, in (i, j) order; the lower index plays
/// the x role.
std::vector<DistanceEstimate> all_pairs(std::span<const RowSketch> sketches, EstimatorKind kind,
                                        EstimateOptions options = {});

/// Selected pairs by collection index; each pair is put in canonical
/// (lower, higher) order, and the output is sorted and deduplicated.
std::vector<DistanceEstimate> selected_pairs(std::span<const RowSketch> sketches,
                                             std::vector<std::pair<std::size_t, std::size_t>> pairs,
                                             EstimatorKind kind, EstimateOptions options = {});

}  // namespace lpsketch
