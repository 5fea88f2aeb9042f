// revdoe: command-line front end for the revenue model, factorial analysis and
// elasticity estimation pipelines.
//
//   revdoe <doe|fit|maximize|surface|generate|prf|report> [options]
//
// Exit status: 0 success, 2 invalid input or flags, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "revdoe/report.hpp"

namespace {

namespace rpt = revdoe::report;

struct Flags {
  std::string data, config, regime, method, mode, out, format, section;
  std::uint64_t seed = 0;
  double alpha = 0, beta = 0, scale = 0, budget = 0, price = 0;
  double confidence = 0, significance = 0, train_fraction = 0, crs_tolerance = 0;
  std::size_t samples = 0;
  std::vector<double> unit_costs, costs, alpha_grid, beta_grid;
  bool log = false, zero_intercept = false;
};

rpt::GridSpec grid_from(const std::vector<double>& v, const char* flag) {
  if (v.size() != 3) throw revdoe::ValidationError(std::string(flag) + " takes MIN,MAX,STEP");
  return {v[0], v[1], v[2]};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw revdoe::ValidationError("cannot write " + path.string());
  os << text;
}

int emit(const rpt::Report& report, const rpt::RunConfig& config, const std::string& section) {
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  if (!config.out.empty()) {
    const std::filesystem::path dir(config.out);
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", rpt::serialize(report));
    for (const auto& [name, pointer] : rpt::plot_sections(report.document))
      write_file(dir / name, rpt::emit_plot_data(report.document, pointer));
    return 0;
  }
  if (config.format == rpt::OutputFormat::json) {
    std::cout << rpt::serialize(report);
    return 0;
  }
  std::string pointer = section;
  if (pointer.empty()) {
    const auto sections = rpt::plot_sections(report.document);
    if (sections.size() != 1) {
      throw revdoe::ValidationError("report has " + std::to_string(sections.size()) +
                                    " plottable sections; pick one with --section or use --out DIR");
    }
    pointer = sections.front().second;
  }
  std::cout << rpt::emit_plot_data(report.document, pointer);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cobb-Douglas revenue modelling and 2^2 factorial analysis of data-center costs", "revdoe"};
  app.set_version_flag("--version", std::string(rpt::kToolVersion));
  app.require_subcommand(1);

  Flags f;
  auto* o_data = app.add_option("--data", f.data, "Input CSV (cost dataset or 2^2 design)");
  auto* o_config = app.add_option("--config", f.config, "JSON configuration file");
  auto* o_seed = app.add_option("--seed", f.seed, "Generator seed (REVDOE_SEED overrides)");
  auto* o_alpha = app.add_option("--alpha", f.alpha, "Server elasticity");
  auto* o_beta = app.add_option("--beta", f.beta, "Power-and-cooling elasticity");
  auto* o_scale = app.add_option("--scale", f.scale, "Scale constant A of the model");
  auto* o_regime = app.add_option("--regime", f.regime, "Declared returns to scale: irs, crs or drs");
  auto* o_method = app.add_option("--method", f.method, "Fit method: ols, qp or mlr");
  auto* o_log = app.add_flag("--log", f.log, "Fit in log space");
  auto* o_zero = app.add_flag("--zero-intercept", f.zero_intercept, "Fit without an intercept column");
  auto* o_train = app.add_option("--train-fraction", f.train_fraction, "Leading fraction of rows used to train MLR");
  auto* o_conf = app.add_option("--confidence", f.confidence, "Confidence level for effect intervals");
  auto* o_sig = app.add_option("--significance", f.significance, "Significance level for goodness of fit");
  auto* o_samples = app.add_option("--samples", f.samples, "Rows to generate (default: input rows)");
  auto* o_mode = app.add_option("--mode", f.mode, "Maximize mode: production or profit");
  auto* o_unit = app.add_option("--unit-cost", f.unit_costs, "Unit costs W1,W2")->delimiter(',');
  auto* o_budget = app.add_option("--budget", f.budget, "Budget for production maximization");
  auto* o_price = app.add_option("--price", f.price, "Output price for profit maximization");
  auto* o_costs = app.add_option("--costs", f.costs, "Server and power costs for a surface: S,P")->delimiter(',');
  auto* o_agrid = app.add_option("--alpha-grid", f.alpha_grid, "Alpha grid MIN,MAX,STEP")->delimiter(',');
  auto* o_bgrid = app.add_option("--beta-grid", f.beta_grid, "Beta grid MIN,MAX,STEP")->delimiter(',');
  auto* o_tol = app.add_option("--crs-tolerance", f.crs_tolerance, "Band around 1 classified as CRS");
  auto* o_out = app.add_option("--out", f.out, "Write report.json and plot CSVs into this directory");
  auto* o_format = app.add_option("--format", f.format, "Stdout format: json or csv");
  app.add_option("--section", f.section, "Report section to print with --format csv (JSON pointer)");

  for (auto name : rpt::kSubcommandNames) {
    app.add_subcommand(std::string(name))->fallthrough();
  }
  app.get_subcommand("doe")->description("Effects, allocation of variation, interaction means, intervals");
  app.get_subcommand("fit")->description("Elasticity fit: ols, qp or mlr");
  app.get_subcommand("maximize")->description("Production or profit maximum of a Cobb-Douglas model");
  app.get_subcommand("surface")->description("Revenue over an (alpha, beta) grid");
  app.get_subcommand("generate")->description("Gaussian synthesis of costs, goodness of fit, revenue");
  app.get_subcommand("prf")->description("Principal-component variance split of the cost columns");
  app.get_subcommand("report")->description("All stages over the inputs of a configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto sub = rpt::parse_subcommand(app.get_subcommands().front()->get_name());
    rpt::RunConfig config = *o_config ? rpt::load_config(f.config) : rpt::RunConfig{};
    if (*o_data) config.data = f.data;
    if (*o_seed) config.seed = f.seed;
    if (*o_alpha) config.alpha = f.alpha;
    if (*o_beta) config.beta = f.beta;
    if (*o_scale) config.scale = f.scale;
    if (*o_regime) config.regime = revdoe::parse_regime(f.regime);
    if (*o_method) config.method = rpt::parse_method(f.method);
    if (*o_log) config.log = true;
    if (*o_zero) config.zero_intercept = true;
    if (*o_train) config.train_fraction = f.train_fraction;
    if (*o_conf) config.confidence = f.confidence;
    if (*o_sig) config.significance = f.significance;
    if (*o_samples) config.samples = f.samples;
    if (*o_mode) config.mode = rpt::parse_mode(f.mode);
    if (*o_unit) config.unit_costs = f.unit_costs;
    if (*o_budget) config.budget = f.budget;
    if (*o_price) config.price = f.price;
    if (*o_costs) config.costs = f.costs;
    if (*o_agrid) config.alpha_grid = grid_from(f.alpha_grid, "--alpha-grid");
    if (*o_bgrid) config.beta_grid = grid_from(f.beta_grid, "--beta-grid");
    if (*o_tol) config.crs_tolerance = f.crs_tolerance;
    if (*o_out) config.out = f.out;
    if (*o_format) config.format = rpt::parse_format(f.format);
    rpt::apply_environment(config);

    const auto outcome = rpt::run_pipeline(config, sub);
    if (!outcome.report) {
      std::cerr << "revdoe: error: " << outcome.error << '\n';
      return outcome.exit_code;
    }
    return emit(*outcome.report, config, f.section);
  } catch (const revdoe::ValidationError& e) {
    std::cerr << "revdoe: error: " << e.what() << '\n';
    return 2;
  } catch (const revdoe::NumericalError& e) {
    std::cerr << "revdoe: error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "revdoe: error: " << e.what() << '\n';
    return 2;
  }
}
