#include "lpsketch/sketcher.hpp"

#include <algorithm>

namespace lpsketch {

const char* strategy_name(StrategyKind kind) noexcept {
  return kind == StrategyKind::Basic ? "basic" : "alternative";
}

void validate(const SketchConfig& config) {
  if (config.k == 0) throw Error(ErrorCode::InvalidParameter, "sketch width k must be >= 1");
  const int p = config.p.value();
  if (config.strategy == StrategyKind::Alternative && p != 4 && p != 6) {
    throw Error(ErrorCode::Unsupported,
                "alternative strategy supports p = 4 or 6, got p=" + std::to_string(p));
  }
}

std::vector<VectorSlot> vector_layout(const SketchConfig& config) {
  const int p = config.p.value();
  std::vector<VectorSlot> layout;
  if (config.strategy == StrategyKind::Basic) {
    for (int t = 1; t < p; ++t) layout.push_back({0, t});
    return layout;
  }
  for (int m = 1; m < p; ++m) {
    const auto matrix = static_cast<std::uint32_t>(m);
    const int lo = std::min(m, p - m);
    const int hi = std::max(m, p - m);
    layout.push_back({matrix, lo});
    if (hi != lo) layout.push_back({matrix, hi});
  }
  return layout;
}

MatrixRange matrix_range(const SketchConfig& config) {
  if (config.strategy == StrategyKind::Basic) return {0, 1};
  return {1, static_cast<std::uint32_t>(config.p.value() - 1)};
}

std::optional<std::size_t> slot_index(const SketchConfig& config, std::uint32_t matrix, int power) {
  const int p = config.p.value();
  if (power < 1 || power >= p) return std::nullopt;
  if (config.strategy == StrategyKind::Basic) {
    if (matrix != 0) return std::nullopt;
    return static_cast<std::size_t>(power - 1);
  }
  const int m = static_cast<int>(matrix);
  if (m < 1 || m >= p || (power != m && power != p - m)) return std::nullopt;
  std::size_t index = 0;
  for (int prev = 1; prev < m; ++prev) index += (prev == p - prev) ? 1 : 2;
  return index + (power == std::min(m, p - m) ? 0 : 1);
}

std::span<const double> RowSketch::vector(std::uint32_t matrix, int power) const {
  const auto slot = slot_index(config, matrix, power);
  if (!slot) {
    throw Error(ErrorCode::Unsupported, "sketch holds no power " + std::to_string(power) +
                                            " vector under matrix " + std::to_string(matrix));
  }
  return std::span<const double>(vectors).subspan(*slot * config.k, config.k);
}

namespace detail {

RowPowers row_powers(std::span<const double> x, int max_power, std::size_t row_id) {
  RowPowers out;
  out.length = x.size();
  out.max_power = max_power;
  const std::size_t n = x.size();
  out.powers.resize((static_cast<std::size_t>(max_power) + 1) * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) {
      throw Error(ErrorCode::Data, "row " + std::to_string(row_id) + ", coordinate " +
                                       std::to_string(i) + ": non-finite value");
    }
    out.powers[i] = 1.0;
  }
  for (int t = 1; t <= max_power; ++t) {
    const std::size_t base = static_cast<std::size_t>(t) * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = out.powers[base - n + i] * x[i];
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::Data, "row " + std::to_string(row_id) + ", coordinate " +
                                         std::to_string(i) + ": x^" + std::to_string(t) +
                                         " overflows");
      }
      out.powers[base + i] = v;
    }
  }
  out.marginals.resize(static_cast<std::size_t>(max_power));
  for (int t = 1; t <= max_power; ++t) {
    const double m = accurate_sum(std::span<const double>(out.powers).subspan(static_cast<std::size_t>(t) * n, n));
    if (!std::isfinite(m)) {
      throw Error(ErrorCode::Data, "row " + std::to_string(row_id) + ": marginal of order " +
                                       std::to_string(t) + " overflows");
    }
    out.marginals[static_cast<std::size_t>(t - 1)] = m;
  }
  return out;
}

}  // namespace detail

RowSketch sketch_row(std::span<const double> x, const SketchConfig& config, std::size_t row_id) {
  return sketch_row_with(x, config, CounterProjection(config.master_seed, config.family), row_id);
}

std::vector<RowSketch> sketch_matrix(const DataMatrix& data, const SketchConfig& config) {
  validate(config);
  std::vector<RowSketch> out;
  out.reserve(data.rows());
  const CounterProjection source(config.master_seed, config.family);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    out.push_back(sketch_row_with(data.row(i), config, source, i));
  }
  return out;
}

}  // namespace lpsketch
