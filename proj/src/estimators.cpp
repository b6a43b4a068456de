#include "lpsketch/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace lpsketch {

const char* estimator_name(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::Basic:
      return "basic";
    case EstimatorKind::Alternative:
      return "alternative";
    case EstimatorKind::MarginMLE:
      return "mle";
  }
  return "unknown";
}

std::optional<EstimatorKind> parse_estimator(std::string_view name) noexcept {
  if (name == "basic") return EstimatorKind::Basic;
  if (name == "alternative") return EstimatorKind::Alternative;
  if (name == "mle") return EstimatorKind::MarginMLE;
  return std::nullopt;
}

namespace {

double dot(std::span<const double> u, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) acc += u[j] * v[j];
  return acc;
}

void require_compatible(const RowSketch& a, const RowSketch& b) {
  const auto& ca = a.config;
  const auto& cb = b.config;
  if (ca.p != cb.p || ca.k != cb.k || ca.master_seed != cb.master_seed || !(ca.family == cb.family)) {
    throw Error(ErrorCode::Incompatible, "rows " + std::to_string(a.row_id) + " and " +
                                             std::to_string(b.row_id) +
                                             " were sketched with different configurations");
  }
  if (ca.strategy != cb.strategy) {
    throw Error(ErrorCode::Incompatible, "rows " + std::to_string(a.row_id) + " and " +
                                             std::to_string(b.row_id) +
                                             " were sketched with different strategies");
  }
}

void require_strategy(const RowSketch& a, StrategyKind expected, EstimatorKind kind) {
  if (a.config.strategy != expected) {
    throw Error(ErrorCode::Incompatible, std::string(estimator_name(kind)) +
                                             " estimator needs " + strategy_name(expected) +
                                             "-strategy sketches, got " +
                                             strategy_name(a.config.strategy));
  }
}

// Vectors whose inner product estimates sum x^{p-t} y^t.
std::pair<std::span<const double>, std::span<const double>> term_vectors(const RowSketch& a,
                                                                         const RowSketch& b, int t) {
  const int p = a.config.p.value();
  const std::uint32_t matrix =
      a.config.strategy == StrategyKind::Basic ? 0u : static_cast<std::uint32_t>(t);
  return {a.vector(matrix, p - t), b.vector(matrix, t)};
}

DistanceEstimate finish(const RowSketch& a, const RowSketch& b, EstimatorKind kind, double value,
                        EstimateOptions options) {
  DistanceEstimate out;
  out.row_a = a.row_id;
  out.row_b = b.row_id;
  out.p = a.config.p;
  out.estimator = kind;
  out.value = value;
  if (options.clamp_negative && value < 0.0) {
    out.value = 0.0;
    out.clamped = true;
  }
  return out;
}

// Real roots of z^3 + b2 z^2 + b1 z + b0.
int solve_monic_cubic(std::array<double, 3>& roots, double b2, double b1, double b0) {
  const double a2 = b2 * b2;
  double q = (a2 - 3.0 * b1) / 9.0;
  const double r = (b2 * (2.0 * a2 - 9.0 * b1) + 27.0 * b0) / 54.0;
  const double r2 = r * r;
  const double q3 = q * q * q;
  const double shift = b2 / 3.0;
  if (r2 < q3) {
    const double t = std::acos(std::clamp(r / std::sqrt(q3), -1.0, 1.0)) / 3.0;
    q = -2.0 * std::sqrt(q);
    roots[0] = q * std::cos(t) - shift;
    roots[1] = q * std::cos(t + 2.0 * std::numbers::pi / 3.0) - shift;
    roots[2] = q * std::cos(t - 2.0 * std::numbers::pi / 3.0) - shift;
    return 3;
  }
  const double u = (r < 0.0 ? 1.0 : -1.0) * std::cbrt(std::fabs(r) + std::sqrt(r2 - q3));
  const double v = u == 0.0 ? 0.0 : q / u;
  roots[0] = (u + v) - shift;
  if (u == v || 1e10 * std::fabs(u - v) < std::fabs(u + v)) {
    roots[1] = -0.5 * (u + v) - shift;
    return 2;
  }
  return 1;
}

}  // namespace

DistanceEstimate estimate_basic(const RowSketch& a, const RowSketch& b, EstimateOptions options) {
  require_compatible(a, b);
  require_strategy(a, StrategyKind::Basic, EstimatorKind::Basic);
  const int p = a.config.p.value();
  const auto coeffs = decomposition_coefficients(a.config.p);
  // Terms t and p - t share a coefficient; adding their dot products first
  // makes the sum invariant under swapping a and b.
  double inner = 0.0;
  for (int t = 1; t < p - t; ++t) {
    const auto [u1, v1] = term_vectors(a, b, t);
    const auto [u2, v2] = term_vectors(a, b, p - t);
    inner += static_cast<double>(coeffs[t]) * (dot(u1, v1) + dot(u2, v2));
  }
  const auto [um, vm] = term_vectors(a, b, p / 2);
  inner += static_cast<double>(coeffs[p / 2]) * dot(um, vm);
  const double value = (a.marginal(p) + b.marginal(p)) + inner / static_cast<double>(a.config.k);
  return finish(a, b, EstimatorKind::Basic, value, options);
}

DistanceEstimate estimate_alternative(const RowSketch& a, const RowSketch& b, EstimateOptions options) {
  require_compatible(a, b);
  require_strategy(a, StrategyKind::Alternative, EstimatorKind::Alternative);
  const int p = a.config.p.value();
  const auto coeffs = decomposition_coefficients(a.config.p);
  double inner = 0.0;
  for (int t = 1; t < p; ++t) {
    const auto [u, v] = term_vectors(a, b, t);
    inner += static_cast<double>(coeffs[t]) * dot(u, v);
  }
  const double value = (a.marginal(p) + b.marginal(p)) + inner / static_cast<double>(a.config.k);
  return finish(a, b, EstimatorKind::Alternative, value, options);
}

CubicSolution solve_margin_cubic(double ip, double nu, double nv, double mx, double my, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidParameter, "sketch width k must be >= 1");
  if (mx < 0.0 || my < 0.0) throw Error(ErrorCode::InvalidParameter, "margins must be non-negative");
  CubicSolution out;
  const double bound = std::sqrt(mx * my);
  if (mx * my == 0.0 || bound == 0.0) {
    out.root_count = 1;
    return out;
  }
  const double kd = static_cast<double>(k);
  // With a = bound z the cubic becomes z^3 + c z^2 + lin z + c = 0.
  const double c = -ip / (kd * bound);
  const double lin = -1.0 + (nv / my + nu / mx) / kd;
  const auto g = [&](double z) { return ((z + c) * z + lin) * z + c; };
  const auto dg = [&](double z) { return (3.0 * z + 2.0 * c) * z + lin; };

  std::array<double, 3> roots{};
  const int count = solve_monic_cubic(roots, c, lin, c);
  out.root_count = count;
  for (int r = 0; r < count; ++r) {
    const double slope = dg(roots[r]);
    if (slope != 0.0) {
      const double polished = roots[r] - g(roots[r]) / slope;
      if (std::isfinite(polished)) roots[r] = polished;
    }
  }

  const double target = ip / (kd * bound);
  constexpr double kSlack = 1e-12;
  std::optional<double> best;
  for (int r = 0; r < count; ++r) {
    if (roots[r] < -1.0 - kSlack || roots[r] > 1.0 + kSlack) continue;
    if (!best || std::fabs(roots[r] - target) < std::fabs(*best - target)) best = roots[r];
  }
  double z;
  if (best) {
    z = std::clamp(*best, -1.0, 1.0);
  } else {
    double closest = roots[0];
    for (int r = 1; r < count; ++r) {
      if (std::fabs(roots[r] - target) < std::fabs(closest - target)) closest = roots[r];
    }
    z = std::clamp(closest, -1.0, 1.0);
    out.boundary_clamped = true;
  }
  // Near a double root one Newton step may not be enough.
  for (int iter = 0; iter < 8 && std::fabs(g(z)) > 1e-14; ++iter) {
    const double slope = dg(z);
    if (slope == 0.0) break;
    const double next = z - g(z) / slope;
    if (!std::isfinite(next) || next < -1.0 || next > 1.0) break;
    z = next;
  }
  out.a_hat = bound * z;
  out.residual = std::fabs(g(z));
  return out;
}

DistanceEstimate estimate_margin_mle(const RowSketch& a, const RowSketch& b, EstimateOptions options) {
  require_compatible(a, b);
  check_estimator_supported(a.config, EstimatorKind::MarginMLE);
  constexpr int p = 4;
  const auto coeffs = decomposition_coefficients(EvenOrder(p));
  const std::size_t k = a.config.k;
  double combined = a.marginal(p) + b.marginal(p);
  std::vector<CubicSolution> cubics;
  EstimateFlags flags;
  flags.mle_on_basic_strategy = a.config.strategy == StrategyKind::Basic;
  for (int t = 1; t < p; ++t) {
    const auto [u, v] = term_vectors(a, b, t);
    const double ip = dot(u, v);
    auto solution = solve_margin_cubic(ip, dot(u, u), dot(v, v), a.marginal(2 * (p - t)),
                                       b.marginal(2 * t), k);
    double term = solution.a_hat;
    if (!(solution.residual <= kCubicResidualTolerance) || !std::isfinite(term)) {
      term = ip / static_cast<double>(k);
      ++flags.mle_fallbacks;
    }
    combined += static_cast<double>(coeffs[t]) * term;
    cubics.push_back(solution);
  }
  auto out = finish(a, b, EstimatorKind::MarginMLE, combined, options);
  out.flags = flags;
  out.cubics = std::move(cubics);
  return out;
}

void check_estimator_supported(const SketchConfig& config, EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Basic:
      if (config.strategy != StrategyKind::Basic) {
        throw Error(ErrorCode::Incompatible, "basic estimator needs basic-strategy sketches");
      }
      return;
    case EstimatorKind::Alternative:
      if (config.strategy != StrategyKind::Alternative) {
        throw Error(ErrorCode::Incompatible,
                    "alternative estimator needs alternative-strategy sketches");
      }
      return;
    case EstimatorKind::MarginMLE:
      if (config.p.value() != 4) {
        throw Error(ErrorCode::Unsupported, "margin MLE estimator supports p=4 only, got p=" +
                                                std::to_string(config.p.value()));
      }
      return;
  }
}

DistanceEstimate estimate(const RowSketch& a, const RowSketch& b, EstimatorKind kind, EstimateOptions options) {
  switch (kind) {
    case EstimatorKind::Basic:
      return estimate_basic(a, b, options);
    case EstimatorKind::Alternative:
      return estimate_alternative(a, b, options);
    case EstimatorKind::MarginMLE:
      return estimate_margin_mle(a, b, options);
  }
  throw Error(ErrorCode::Usage, "unknown estimator");
}

namespace {

void require_homogeneous(std::span<const RowSketch> sketches, EstimatorKind kind) {
  if (sketches.empty()) return;
  const auto& first = sketches.front().config;
  for (std::size_t i = 1; i < sketches.size(); ++i) {
    if (!(sketches[i].config == first)) {
      throw Error(ErrorCode::Incompatible, "sketch collection is heterogeneous: row " +
                                               std::to_string(sketches[i].row_id) +
                                               " differs from row " +
                                               std::to_string(sketches.front().row_id));
    }
  }
  check_estimator_supported(first, kind);
}

}  // namespace

std::vector<DistanceEstimate> all_pairs(std::span<const RowSketch> sketches, EstimatorKind kind,
                                        EstimateOptions options) {
  require_homogeneous(sketches, kind);
  std::vector<DistanceEstimate> out;
  const std::size_t n = sketches.size();
  if (n > 1) out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out.push_back(estimate(sketches[i], sketches[j], kind, options));
    }
  }
  return out;
}

std::vector<DistanceEstimate> selected_pairs(std::span<const RowSketch> sketches,
                                             std::vector<std::pair<std::size_t, std::size_t>> pairs,
                                             EstimatorKind kind, EstimateOptions options) {
  require_homogeneous(sketches, kind);
  for (auto& [i, j] : pairs) {
    if (i >= sketches.size() || j >= sketches.size()) {
      throw Error(ErrorCode::Usage, "pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                        ") out of range for " + std::to_string(sketches.size()) +
                                        " rows");
    }
    if (j < i) std::swap(i, j);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<DistanceEstimate> out;
  out.reserve(pairs.size());
  for (const auto& [i, j] : pairs) out.push_back(estimate(sketches[i], sketches[j], kind, options));
  return out;
}

}  // namespace lpsketch
