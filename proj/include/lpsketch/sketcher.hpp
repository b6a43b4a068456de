#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpsketch/error.hpp"
#include "lpsketch/model.hpp"
#include "lpsketch/projections.hpp"

namespace lpsketch {

enum class StrategyKind : std::uint32_t { Basic = 0, Alternative = 1 };

const char* strategy_name(StrategyKind kind) noexcept;

struct SketchConfig {
  EvenOrder p{4};
  std::uint32_t k = 1;
  StrategyKind strategy = StrategyKind::Basic;
  ProjectionFamily family = ProjectionFamily::normal();
  std::uint64_t master_seed = 0;

  friend bool operator==(const SketchConfig&, const SketchConfig&) = default;
};

/// Throws on k == 0 or an alternative-strategy order outside {4, 6}.
void validate(const SketchConfig& config);

/// One projected power vector: power t of the row under matrix `matrix`.
struct VectorSlot {
  std::uint32_t matrix;
  int power;

  friend bool operator==(const VectorSlot&, const VectorSlot&) = default;
};

/// Fixed order of the stored vectors.
///   Basic:       (0, 1), (0, 2), ..., (0, p-1)
///   Alternative: for m = 1..p-1, the powers {m, p-m} ascending, deduplicated.
/// Under the alternative strategy the inner product sum x^{p-t} y^t is
/// estimated from matrix t, so a row keeps power t (y role) and power p-t
/// (x role) under each matrix t; 2p-3 vectors in total.
std::vector<VectorSlot> vector_layout(const SketchConfig& config);

/// Position of (matrix, power) in vector_layout(), if present.
std::optional<std::size_t> slot_index(const SketchConfig& config, std::uint32_t matrix, int power);

/// Range of matrix indices a strategy draws from: {0} or {1..p-1}.
struct MatrixRange {
  std::uint32_t first;
  std::uint32_t count;
};
MatrixRange matrix_range(const SketchConfig& config);

/// Compressed representation of one row: exact marginals m_1..m_{2p-2} plus
/// the projected power vectors in vector_layout() order.
struct RowSketch {
  std::size_t row_id = 0;
  SketchConfig config;
  std::vector<double> marginals;  // marginals[t - 1] = sum_i x_i^t
  std::vector<double> vectors;    // slot-major, k entries per slot

  double marginal(int t) const { return marginals.at(static_cast<std::size_t>(t - 1)); }

  /// Power `power` projected under `matrix`; throws Unsupported if the
  /// layout does not hold that combination.
  std::span<const double> vector(std::uint32_t matrix, int power) const;
};

namespace detail {

struct RowPowers {
  std::size_t length = 0;
  int max_power = 0;
  std::vector<double> powers;  // powers[t * length + i] = x_i^t, t = 0..max_power
  std::vector<double> marginals;

  double at(int t, std::size_t i) const { return powers[static_cast<std::size_t>(t) * length + i]; }
};

// Iterated-multiplication powers up to 2p-2 and exact marginals; throws Data
// naming the row and coordinate on overflow.
RowPowers row_powers(std::span<const double> x, int max_power, std::size_t row_id);

}  // namespace detail

/// Sketch one row against an explicit entry source
/// `double source(uint32_t matrix, uint64_t i, uint32_t j)`.
template <class Source>
RowSketch sketch_row_with(std::span<const double> x, const SketchConfig& config, const Source& source,
                          std::size_t row_id = 0) {
  validate(config);
  const int p = config.p.value();
  const auto powers = detail::row_powers(x, 2 * p - 2, row_id);
  const auto layout = vector_layout(config);
  const std::size_t k = config.k;

  RowSketch sketch;
  sketch.row_id = row_id;
  sketch.config = config;
  sketch.marginals = powers.marginals;
  sketch.vectors.assign(layout.size() * k, 0.0);

  const auto range = matrix_range(config);
  std::vector<std::size_t> slots;
  for (std::uint32_t m = range.first; m < range.first + range.count; ++m) {
    slots.clear();
    for (std::size_t s = 0; s < layout.size(); ++s) {
      if (layout[s].matrix == m) slots.push_back(s);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::uint32_t j = 0; j < config.k; ++j) {
        const double r = source(m, i, j);
        for (std::size_t s : slots) {
          sketch.vectors[s * k + j] += powers.at(layout[s].power, i) * r;
        }
      }
    }
  }
  for (double v : sketch.vectors) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::Data, "row " + std::to_string(row_id) + ": projection overflowed");
    }
  }
  return sketch;
}

/// Sketch one row with the counter-based projection named by the config.
RowSketch sketch_row(std::span<const double> x, const SketchConfig& config, std::size_t row_id = 0);

/// One RowSketch per row, row ids preserved.
std::vector<RowSketch> sketch_matrix(const DataMatrix& data, const SketchConfig& config);

}  // namespace lpsketch
