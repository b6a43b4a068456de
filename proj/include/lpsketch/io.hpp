#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lpsketch/analytics.hpp"
#include "lpsketch/estimators.hpp"
#include "lpsketch/model.hpp"
#include "lpsketch/sketcher.hpp"

namespace lpsketch::io {

struct CsvOptions {
  bool skip_header = false;
};

/// Dense numeric CSV, one row per line. Blank lines are ignored; every row
/// must have the same number of cells; NaN and Inf are rejected.
DataMatrix parse_csv(std::string_view text, CsvOptions options = {});
DataMatrix read_csv(const std::filesystem::path& path, CsvOptions options = {});

/// Index pairs, one "i,j" (or "i j") per line.
std::vector<std::pair<std::size_t, std::size_t>> parse_pairs(std::string_view text);
std::vector<std::pair<std::size_t, std::size_t>> read_pairs(const std::filesystem::path& path);

// Sketch file, all fields little-endian:
//
//   offset size  field
//        0    4  magic "LPSK"
//        4    4  u32 version (1)
//        8    8  u64 n (rows)
//       16    8  u64 D (columns of the source matrix)
//       24    4  u32 p
//       28    4  u32 k
//       32    4  u32 strategy (0 basic, 1 alternative)
//       36    4  u32 family (0 normal, 1 uniform, 2 three-point)
//       40    8  f64 s (fourth moment; 3 for normal, 1.8 for uniform)
//       48    8  u64 master seed
//       56       rows 0..n-1, each: f64 m_1..m_{2p-2}, then the vectors of
//                vector_layout() in order, k f64 each
inline constexpr std::uint32_t kSketchFileVersion = 1;
inline constexpr std::size_t kSketchHeaderSize = 56;

struct SketchFile {
  std::uint64_t columns = 0;
  SketchConfig config;
  std::vector<RowSketch> rows;
};

std::string encode_sketch_file(const SketchFile& file);
SketchFile decode_sketch_file(std::string_view bytes);

/// Writes to a sibling temporary file and renames it into place.
void write_sketch_file(const std::filesystem::path& path, const SketchFile& file);
SketchFile read_sketch_file(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const DistanceEstimate& estimate);
nlohmann::ordered_json to_json(std::span<const DistanceEstimate> estimates);
nlohmann::ordered_json to_json(const VarianceReport& report);

/// Writes `text` to `path` atomically, or to stdout when path is empty or "-".
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lpsketch::io
