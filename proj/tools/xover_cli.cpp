// Command-line front end: optimize, verify, sweep, oracle and
// efficiency runs driven by a JSON config file.
//
// Exit codes: 0 success (and, for verify, optimal); 2 invalid input;
// 3 numerical failure; 4 not optimal or not converged.

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xover/xover.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNotOptimal = 4;

struct CommonArgs {
  std::string config_path;
  std::string criterion;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "Path to a JSON run config")
      ->required();
  cmd->add_option("--criterion", args->criterion,
                  "Criterion override: theta or tau")
      ->check(CLI::IsMember({"theta", "tau"}));
  cmd->add_option("--out", args->out, "Write the machine-readable result here");
}

xover::RunConfig load(const CommonArgs& args) {
  xover::RunConfig config = xover::load_run_config(args.config_path);
  if (!args.criterion.empty()) {
    config.criterion = xover::criterion_from_string(args.criterion);
  }
  if (!args.out.empty()) {
    config.out = args.out;
  }
  return config;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) {
    throw xover::ValidationError("cannot write output file '" + path + "'");
  }
  out << j.dump(2) << '\n';
}

// A design argument is either the literal "uniform", an inline
// comma-separated proportion list, or a path to a JSON file carrying a
// "proportions" array (e.g. the file written by `optimize --out`).
std::vector<double> parse_design_arg(const std::string& arg,
                                     std::size_t sequence_count) {
  std::vector<double> props;
  if (arg == "uniform") {
    props.assign(sequence_count, 1.0 / static_cast<double>(sequence_count));
    return props;
  }
  if (arg.find(',') != std::string::npos) {
    std::size_t pos = 0;
    while (pos <= arg.size()) {
      const std::size_t next = std::min(arg.find(',', pos), arg.size());
      try {
        props.push_back(std::stod(arg.substr(pos, next - pos)));
      } catch (const std::exception&) {
        throw xover::ValidationError("cannot parse proportion list '" + arg +
                                     "'");
      }
      pos = next + 1;
    }
  } else {
    std::ifstream in(arg);
    if (!in) {
      throw xover::ValidationError("cannot open design file '" + arg + "'");
    }
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw xover::ValidationError("design file '" + arg +
                                   "' is not valid JSON: " + e.what());
    }
    const nlohmann::json* array = &j;
    if (j.is_object()) {
      if (!j.contains("proportions")) {
        throw xover::ValidationError("design file '" + arg +
                                     "' has no 'proportions' array");
      }
      array = &j["proportions"];
    }
    props = xover::detail::get_double_array(*array, "design proportions");
  }
  if (props.size() != sequence_count) {
    throw xover::ValidationError(
        "design has " + std::to_string(props.size()) +
        " proportions but the config lists " +
        std::to_string(sequence_count) + " sequences");
  }
  double sum = 0.0;
  for (double w : props) {
    if (!(w >= 0.0)) {
      throw xover::ValidationError("design proportions must be nonnegative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw xover::ValidationError("design proportions must sum to 1 (got " +
                                 std::to_string(sum) + ")");
  }
  for (double& w : props) w /= sum;
  return props;
}

int cmd_optimize(const CommonArgs& args, double tolerance) {
  const xover::RunConfig config = load(args);
  xover::OptimizerOptions options = config.optimizer;
  const xover::OptimizationResult result =
      xover::optimize(config.sequences, config.model, config.criterion,
                      options);
  const xover::VerificationReport report = xover::verify_optimality(
      result.design, config.model, config.criterion, tolerance,
      options.zero_threshold);

  xover::render_optimization_result(std::cout, result);
  std::cout << "\nverification at tolerance " << xover::format_number(tolerance)
            << ": " << (report.optimal ? "optimal" : "not optimal") << '\n';

  if (config.out) {
    nlohmann::json j = xover::optimization_result_to_json(result,
                                                          config.criterion);
    j["verified_optimal"] = report.optimal;
    j["verification_tolerance"] = tolerance;
    write_json_file(*config.out, j);
  }
  if (!result.converged) {
    std::cerr << "optimizer did not converge within "
              << options.max_iterations << " iterations (violation "
              << xover::format_number(result.max_violation) << ")\n";
    return kExitNotOptimal;
  }
  return report.optimal ? kExitOk : kExitNotOptimal;
}

int cmd_verify(const CommonArgs& args, const std::string& design_arg,
               double tolerance) {
  const xover::RunConfig config = load(args);
  std::vector<double> props;
  if (!design_arg.empty()) {
    props = parse_design_arg(design_arg, config.sequences.size());
  } else if (config.proportions) {
    props = *config.proportions;
  } else {
    throw xover::ValidationError(
        "no candidate design: pass --design or put 'proportions' in the "
        "config");
  }
  const xover::CrossoverDesign design(config.sequences, props);
  const xover::VerificationReport report = xover::verify_optimality(
      design, config.model, config.criterion, tolerance,
      config.optimizer.zero_threshold);
  xover::render_verification_report(std::cout, report);
  if (config.out) {
    write_json_file(*config.out, xover::verification_report_to_json(report));
  }
  return report.optimal ? kExitOk : kExitNotOptimal;
}

int cmd_sweep(const CommonArgs& args, int index, int grid) {
  const xover::RunConfig config = load(args);
  if (index < 1 || index > static_cast<int>(config.sequences.size())) {
    throw xover::ValidationError("--index must be between 1 and " +
                                 std::to_string(config.sequences.size()));
  }
  const std::vector<xover::SweepRow> rows =
      xover::compute_sweep(config.sequences, config.model, config.criterion,
                           index - 1, grid, config.proportions);
  if (config.out) {
    std::ofstream out(*config.out);
    if (!out) {
      throw xover::ValidationError("cannot write output file '" + *config.out +
                                   "'");
    }
    xover::write_sweep_csv(out, rows);
    std::cout << "wrote " << rows.size() << " rows to " << *config.out << '\n';
  } else {
    xover::write_sweep_csv(std::cout, rows);
  }
  return kExitOk;
}

int cmd_oracle(const CommonArgs& args, double resolution) {
  const xover::RunConfig config = load(args);
  if (!(resolution > 0.0 && resolution <= 1.0)) {
    throw xover::ValidationError("--resolution must be in (0, 1]");
  }
  const xover::OracleResult result = xover::grid_oracle(
      config.sequences, config.model, config.criterion, resolution);

  std::cout << "grid:       1/" << result.grid << '\n'
            << "points:     " << result.points_evaluated << " evaluated, "
            << result.points_skipped << " singular\n"
            << "objective:  " << xover::format_number(result.objective)
            << "\n\nsequence  proportion\n";
  for (int i = 0; i < result.design.size(); ++i) {
    std::cout << result.design.sequence(i).str() << "        "
              << xover::format_number(result.design.proportion(i)) << '\n';
  }
  if (config.out) {
    nlohmann::json j;
    j["criterion"] = xover::to_string(config.criterion);
    j["grid"] = result.grid;
    j["objective"] = result.objective;
    j["points_evaluated"] = result.points_evaluated;
    j["points_skipped"] = result.points_skipped;
    j["sequences"] = nlohmann::json::array();
    j["proportions"] = nlohmann::json::array();
    for (int i = 0; i < result.design.size(); ++i) {
      j["sequences"].push_back(result.design.sequence(i).str());
      j["proportions"].push_back(result.design.proportion(i));
    }
    write_json_file(*config.out, j);
  }
  return kExitOk;
}

int cmd_efficiency(const CommonArgs& args, const std::string& design_a,
                   const std::string& design_b) {
  const xover::RunConfig config = load(args);
  const xover::CrossoverDesign a(
      config.sequences, parse_design_arg(design_a, config.sequences.size()));
  const xover::CrossoverDesign b(
      config.sequences, parse_design_arg(design_b, config.sequences.size()));
  const double ab =
      xover::relative_d_efficiency(a, b, config.model, config.criterion);
  const double ba =
      xover::relative_d_efficiency(b, a, config.model, config.criterion);
  std::cout << "efficiency of design A relative to B: "
            << xover::format_number(ab) << '\n'
            << "efficiency of design B relative to A: "
            << xover::format_number(ba) << '\n';
  if (config.out) {
    nlohmann::json j;
    j["criterion"] = xover::to_string(config.criterion);
    j["a_vs_b"] = ab;
    j["b_vs_a"] = ba;
    write_json_file(*config.out, j);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally D-optimal crossover designs for GLMs via GEE"};
  app.require_subcommand(1);

  CommonArgs optimize_args;
  double optimize_tolerance = 1e-4;
  CLI::App* optimize = app.add_subcommand(
      "optimize", "Find the optimal proportions for the configured model");
  add_common(optimize, &optimize_args);
  optimize->add_option("--tolerance", optimize_tolerance,
                       "Verification tolerance on the sensitivity scale");

  CommonArgs verify_args;
  std::string verify_design;
  double verify_tolerance = 1e-4;
  CLI::App* verify = app.add_subcommand(
      "verify", "Check a candidate design against the equivalence theorem");
  add_common(verify, &verify_args);
  verify->add_option("--design", verify_design,
                     "Candidate design: 'uniform', inline 'p1,p2,...', or a "
                     "JSON file with a proportions array");
  verify->add_option("--tolerance", verify_tolerance,
                     "Verification tolerance on the sensitivity scale");

  CommonArgs sweep_args;
  int sweep_index = 1;
  int sweep_grid = 1001;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Profile objective and directional derivative along a slice");
  add_common(sweep, &sweep_args);
  sweep->add_option("--index", sweep_index,
                    "1-based sequence index whose proportion is swept");
  sweep->add_option("--grid", sweep_grid, "Number of grid points");

  CommonArgs oracle_args;
  double oracle_resolution = 0.01;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "Exhaustive lattice search, a slow independent cross-check");
  add_common(oracle, &oracle_args);
  oracle->add_option("--resolution", oracle_resolution,
                     "Lattice spacing, e.g. 0.01");

  CommonArgs efficiency_args;
  std::string design_a;
  std::string design_b;
  CLI::App* efficiency = app.add_subcommand(
      "efficiency", "Relative D-efficiency of two designs, both directions");
  add_common(efficiency, &efficiency_args);
  efficiency->add_option("--design-a", design_a, "First design (see verify --design)")
      ->required();
  efficiency->add_option("--design-b", design_b, "Second design (see verify --design)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (app.got_subcommand(optimize)) {
      return cmd_optimize(optimize_args, optimize_tolerance);
    }
    if (app.got_subcommand(verify)) {
      return cmd_verify(verify_args, verify_design, verify_tolerance);
    }
    if (app.got_subcommand(sweep)) {
      return cmd_sweep(sweep_args, sweep_index, sweep_grid);
    }
    if (app.got_subcommand(oracle)) {
      return cmd_oracle(oracle_args, oracle_resolution);
    }
    if (app.got_subcommand(efficiency)) {
      return cmd_efficiency(efficiency_args, design_a, design_b);
    }
  } catch (const xover::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const xover::SingularMatrixError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const xover::NumericError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}
