#include "lpsketch/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <system_error>

namespace lpsketch::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const auto line = text.substr(0, eol);
    fn(trim(line), line_no++);
    if (eol == std::string_view::npos) break;
    text.remove_prefix(eol + 1);
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_atomically(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot move output into place at " + path.string());
  }
}

}  // namespace

DataMatrix parse_csv(std::string_view text, CsvOptions options) {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool header_pending = options.skip_header;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return;
    if (header_pending) {
      header_pending = false;
      return;
    }
    std::size_t col = 0;
    while (true) {
      const auto comma = line.find(',');
      auto cell = trim(line.substr(0, comma));
      if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::Data, "line " + std::to_string(line_no + 1) + ", column " +
                                         std::to_string(col + 1) + ": not a finite number: '" +
                                         std::string(cell) + "'");
      }
      values.push_back(v);
      ++col;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = col;
    } else if (col != cols) {
      throw Error(ErrorCode::Data, "line " + std::to_string(line_no + 1) + " has " +
                                       std::to_string(col) + " columns, expected " +
                                       std::to_string(cols));
    }
    ++rows;
  });
  if (rows == 0) throw Error(ErrorCode::Data, "input holds no data rows");
  return DataMatrix(rows, cols, std::move(values));
}

DataMatrix read_csv(const std::filesystem::path& path, CsvOptions options) {
  return parse_csv(slurp(path), options);
}

std::vector<std::pair<std::size_t, std::size_t>> parse_pairs(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    line = line.substr(0, line.find('#'));
    if (line.find_first_not_of(" \t") == std::string_view::npos) return;
    std::size_t idx[2] = {0, 0};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int n = 0; n < 2; ++n) {
      while (p < end && (*p == ' ' || *p == ',' || *p == '\t')) ++p;
      const auto [ptr, ec] = std::from_chars(p, end, idx[n]);
      if (ec != std::errc()) {
        throw Error(ErrorCode::Data, "pairs line " + std::to_string(line_no + 1) + ": expected two row indices");
      }
      p = ptr;
    }
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p != end) {
      throw Error(ErrorCode::Data, "pairs line " + std::to_string(line_no + 1) + ": trailing characters");
    }
    pairs.emplace_back(idx[0], idx[1]);
  });
  return pairs;
}

std::vector<std::pair<std::size_t, std::size_t>> read_pairs(const std::filesystem::path& path) {
  return parse_pairs(slurp(path));
}

namespace {

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out_.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
  }
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out_.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { out_.append(s); }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int b = 0; b < width; ++b) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(b)]))
           << (8 * b);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::Data, "sketch file truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

ProjectionFamily decode_family(std::uint32_t code, double s) {
  switch (code) {
    case static_cast<std::uint32_t>(FamilyKind::Normal):
      if (s != 3.0) throw Error(ErrorCode::Data, "sketch file: normal family must record s = 3");
      return ProjectionFamily::normal();
    case static_cast<std::uint32_t>(FamilyKind::Uniform):
      if (s != 9.0 / 5.0) throw Error(ErrorCode::Data, "sketch file: uniform family must record s = 1.8");
      return ProjectionFamily::uniform();
    case static_cast<std::uint32_t>(FamilyKind::ThreePoint):
      if (!(s >= 1.0)) throw Error(ErrorCode::Data, "sketch file: three-point family needs s >= 1");
      return ProjectionFamily::three_point(s);
    default:
      throw Error(ErrorCode::Data, "sketch file: unknown family code " + std::to_string(code));
  }
}

}  // namespace

std::string encode_sketch_file(const SketchFile& file) {
  const auto& config = file.config;
  validate(config);
  const int p = config.p.value();
  const std::size_t n_marginals = static_cast<std::size_t>(2 * p - 2);
  const std::size_t n_vector_values = vector_layout(config).size() * config.k;

  ByteWriter w;
  w.raw("LPSK");
  w.u32(kSketchFileVersion);
  w.u64(file.rows.size());
  w.u64(file.columns);
  w.u32(static_cast<std::uint32_t>(p));
  w.u32(config.k);
  w.u32(static_cast<std::uint32_t>(config.strategy));
  w.u32(static_cast<std::uint32_t>(config.family.kind()));
  w.f64(moment_s(config.family));
  w.u64(config.master_seed);
  for (const auto& row : file.rows) {
    if (!(row.config == config) || row.marginals.size() != n_marginals ||
        row.vectors.size() != n_vector_values) {
      throw Error(ErrorCode::Incompatible,
                  "row " + std::to_string(row.row_id) + " does not match the file configuration");
    }
    for (double m : row.marginals) w.f64(m);
    for (double v : row.vectors) w.f64(v);
  }
  return w.take();
}

SketchFile decode_sketch_file(std::string_view bytes) {
  ByteReader r(bytes);
  if (bytes.size() < kSketchHeaderSize || r.raw(4) != "LPSK") {
    throw Error(ErrorCode::Data, "not a sketch file (bad magic)");
  }
  const auto version = r.u32();
  if (version != kSketchFileVersion) {
    throw Error(ErrorCode::Data, "unsupported sketch file version " + std::to_string(version));
  }
  const auto n = r.u64();
  SketchFile file;
  file.columns = r.u64();
  const auto p = r.u32();
  const auto k = r.u32();
  const auto strategy = r.u32();
  const auto family = r.u32();
  const double s = r.f64();
  const auto seed = r.u64();
  if (p > static_cast<std::uint32_t>(EvenOrder::kMaxOrder)) {
    throw Error(ErrorCode::Data, "sketch file: order p=" + std::to_string(p) + " out of range");
  }
  if (strategy > 1) throw Error(ErrorCode::Data, "sketch file: unknown strategy code " + std::to_string(strategy));
  try {
    file.config.p = EvenOrder(static_cast<int>(p));
    file.config.k = k;
    file.config.strategy = static_cast<StrategyKind>(strategy);
    file.config.family = decode_family(family, s);
    file.config.master_seed = seed;
    validate(file.config);
  } catch (const Error& e) {
    throw Error(ErrorCode::Data, std::string("sketch file header: ") + e.what());
  }

  const std::size_t n_marginals = 2 * p - 2;
  const std::size_t n_vector_values = vector_layout(file.config).size() * k;
  const std::size_t row_bytes = (n_marginals + n_vector_values) * 8;
  if (n != 0 && r.remaining() / row_bytes < n) throw Error(ErrorCode::Data, "sketch file truncated");
  if (r.remaining() != n * row_bytes) {
    throw Error(ErrorCode::Data, "sketch file size does not match its header");
  }
  file.rows.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    RowSketch row;
    row.row_id = i;
    row.config = file.config;
    row.marginals.resize(n_marginals);
    row.vectors.resize(n_vector_values);
    for (auto& m : row.marginals) m = r.f64();
    for (auto& v : row.vectors) v = r.f64();
    file.rows.push_back(std::move(row));
  }
  return file;
}

void write_sketch_file(const std::filesystem::path& path, const SketchFile& file) {
  write_atomically(path, encode_sketch_file(file));
}

SketchFile read_sketch_file(const std::filesystem::path& path) { return decode_sketch_file(slurp(path)); }

nlohmann::ordered_json to_json(const DistanceEstimate& e) {
  nlohmann::ordered_json flags = nlohmann::ordered_json::array();
  if (e.flags.mle_on_basic_strategy) flags.push_back("mle_on_basic_strategy");
  if (e.flags.mle_fallbacks > 0) flags.push_back("mle_fallback");
  nlohmann::ordered_json j;
  j["i"] = e.row_a;
  j["j"] = e.row_b;
  j["p"] = e.p.value();
  j["estimator"] = estimator_name(e.estimator);
  j["value"] = e.value;
  j["clamped"] = e.clamped;
  j["flags"] = std::move(flags);
  return j;
}

nlohmann::ordered_json to_json(std::span<const DistanceEstimate> estimates) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : estimates) arr.push_back(to_json(e));
  return arr;
}

nlohmann::ordered_json to_json(const VarianceReport& r) {
  const auto opt = [](const auto& v) -> nlohmann::ordered_json {
    if (v) return *v;
    return nullptr;
  };
  nlohmann::ordered_json j;
  j["p"] = r.config.p.value();
  j["k"] = r.config.k;
  j["strategy"] = strategy_name(r.config.strategy);
  j["family"] = family_name(r.config.family.kind());
  j["seed"] = r.config.master_seed;
  j["estimator"] = estimator_name(r.estimator);
  j["exact"] = r.exact;
  j["basic"] = r.basic;
  j["alternative"] = r.alternative;
  j["delta"] = r.delta;
  j["identity_residual"] = r.identity_residual;
  j["identity_holds"] = r.identity_residual <= 1e-9;
  j["mle_asymptotic"] = opt(r.mle_asymptotic);
  j["subgaussian_s"] = r.subgaussian_s;
  j["subgaussian_variance"] = opt(r.subgaussian_variance);
  j["analytic"] = opt(r.analytic);
  j["trials"] = opt(r.trials);
  j["empirical_mean"] = opt(r.empirical_mean);
  j["empirical_variance"] = opt(r.empirical_variance);
  j["empirical_mse"] = opt(r.empirical_mse);
  j["mean_z_score"] = opt(r.mean_z_score);
  j["variance_ratio"] = opt(r.variance_ratio);
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  write_atomically(path, text);
}

}  // namespace lpsketch::io
