#include "lpsketch/cli.hpp"

#include <CLI11.hpp>

#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "lpsketch/analytics.hpp"
#include "lpsketch/estimators.hpp"
#include "lpsketch/io.hpp"
#include "lpsketch/sketcher.hpp"

namespace lpsketch {

namespace {

struct SketchFlags {
  int p = 4;
  std::uint32_t k = 64;
  std::string strategy = "basic";
  std::string family = "normal";
  std::optional<double> s;
  std::uint64_t seed = 0;

  void attach(CLI::App& cmd) {
    cmd.add_option("--p", p, "Even distance order")->capture_default_str();
    cmd.add_option("--k", k, "Sketch width (projection columns)")->capture_default_str();
    cmd.add_option("--strategy", strategy, "basic | alternative")
        ->check(CLI::IsMember({"basic", "alternative"}))
        ->capture_default_str();
    cmd.add_option("--family", family, "normal | uniform | threepoint")
        ->check(CLI::IsMember({"normal", "uniform", "threepoint"}))
        ->capture_default_str();
    cmd.add_option("--s", s, "Fourth moment of the three-point family (s >= 1)");
    cmd.add_option("--seed", seed, "Master seed")->capture_default_str();
  }

  SketchConfig config() const {
    SketchConfig c;
    try {
      c.p = EvenOrder(p);
    } catch (const Error& e) {
      throw Error(ErrorCode::Usage, e.what());
    }
    c.k = k;
    c.strategy = strategy == "basic" ? StrategyKind::Basic : StrategyKind::Alternative;
    if (family == "threepoint") {
      if (!s) throw Error(ErrorCode::Usage, "--family threepoint needs --s");
      c.family = ProjectionFamily::three_point(*s);
    } else {
      c.family = family == "normal" ? ProjectionFamily::normal() : ProjectionFamily::uniform();
      if (s && *s != moment_s(c.family)) {
        throw Error(ErrorCode::Usage, "--s is fixed at " + std::to_string(moment_s(c.family)) +
                                          " for the " + family + " family");
      }
    }
    c.master_seed = seed;
    validate(c);
    return c;
  }
};

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_text(path, text);
  }
}

EstimatorKind parse_estimator_flag(const std::string& name) {
  const auto kind = parse_estimator(name);
  if (!kind) throw Error(ErrorCode::Usage, "unknown estimator '" + name + "'");
  return *kind;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sketch-based estimation of even-order l_p distances"};
  app.require_subcommand(1);

  auto* sketch_cmd = app.add_subcommand("sketch", "Sketch every row of a CSV matrix");
  std::string sketch_input;
  std::string sketch_output;
  bool skip_header = false;
  SketchFlags sketch_flags;
  sketch_cmd->add_option("--input", sketch_input, "CSV matrix, one row per line")->required();
  sketch_cmd->add_option("--output", sketch_output, "Sketch file to write")->required();
  sketch_cmd->add_flag("--skip-header", skip_header, "Ignore the first non-empty line");
  sketch_flags.attach(*sketch_cmd);

  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate pairwise distances from a sketch file");
  std::string estimate_sketches;
  std::string estimate_estimator;
  std::string estimate_pairs = "all";
  std::string estimate_output;
  bool clamp = false;
  estimate_cmd->add_option("--sketches", estimate_sketches, "Sketch file")->required();
  estimate_cmd->add_option("--estimator", estimate_estimator, "basic | alternative | mle")
      ->check(CLI::IsMember({"basic", "alternative", "mle"}));
  estimate_cmd->add_option("--pairs", estimate_pairs, "'all' or a file of 'i,j' lines")->capture_default_str();
  estimate_cmd->add_flag("--clamp", clamp, "Clamp negative estimates to zero");
  estimate_cmd->add_option("--output", estimate_output, "JSON output (stdout if omitted)");

  auto* validate_cmd = app.add_subcommand("validate", "Monte Carlo check of the variance formulas on two rows");
  std::string validate_input;
  std::string validate_output;
  std::string validate_estimator;
  std::size_t trials = 10000;
  bool validate_skip_header = false;
  SketchFlags validate_flags;
  validate_cmd->add_option("--input", validate_input, "CSV with exactly two rows")->required();
  validate_cmd->add_option("--trials", trials, "Number of sketch + estimate cycles")->capture_default_str();
  validate_cmd->add_option("--estimator", validate_estimator, "basic | alternative | mle")
      ->check(CLI::IsMember({"basic", "alternative", "mle"}));
  validate_cmd->add_option("--output", validate_output, "JSON output (stdout if omitted)");
  validate_cmd->add_flag("--skip-header", validate_skip_header, "Ignore the first non-empty line");
  validate_flags.attach(*validate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sketch_cmd) {
      const auto config = sketch_flags.config();
      const auto data = io::read_csv(sketch_input, {skip_header});
      io::SketchFile file;
      file.columns = data.cols();
      file.config = config;
      file.rows = sketch_matrix(data, config);
      io::write_sketch_file(sketch_output, file);
      const double reduced = static_cast<double>(config.k) * (config.p.value() - 1);
      out << "rows " << data.rows() << ", columns " << data.cols() << ", p " << config.p.value()
          << ", k " << config.k << ", strategy " << strategy_name(config.strategy) << "\n"
          << "compression " << data.cols() << " -> " << reduced << " (ratio "
          << static_cast<double>(data.cols()) / reduced << ")\n";
      return 0;
    }
    if (*estimate_cmd) {
      const auto file = io::read_sketch_file(estimate_sketches);
      const auto kind = estimate_estimator.empty() ? default_estimator(file.config.strategy)
                                                   : parse_estimator_flag(estimate_estimator);
      EstimateOptions options;
      options.clamp_negative = clamp;
      std::vector<DistanceEstimate> estimates;
      if (estimate_pairs == "all") {
        estimates = all_pairs(file.rows, kind, options);
      } else {
        estimates = selected_pairs(file.rows, io::read_pairs(estimate_pairs), kind, options);
      }
      emit(estimate_output, io::to_json(estimates).dump(2) + "\n", out);
      return 0;
    }
    if (*validate_cmd) {
      const auto config = validate_flags.config();
      const auto data = io::read_csv(validate_input, {validate_skip_header});
      if (data.rows() != 2) {
        throw Error(ErrorCode::Usage, "validate needs exactly 2 rows, got " + std::to_string(data.rows()));
      }
      const auto kind = validate_estimator.empty() ? default_estimator(config.strategy)
                                                   : parse_estimator_flag(validate_estimator);
      const auto report = monte_carlo_validate(data.row(0), data.row(1), config, trials, kind);
      emit(validate_output, io::to_json(report).dump(2) + "\n", out);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_status(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace lpsketch
