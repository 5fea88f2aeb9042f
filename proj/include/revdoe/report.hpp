#pragma once

/**
 * @file report.hpp
 * @brief Run configuration, pipeline orchestration and JSON reports for the
 * revdoe command-line tool.
 *
 * Every report carries `schema_version`, the tool version, the SHA-256 of each
 * input file and an echo of the effective configuration. Reports contain no
 * timestamps or host details, so identical inputs give byte-identical output.
 *
 * This is the only header that needs OpenSSL (libcrypto) and nlohmann/json.
 */

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "revdoe/dataset.hpp"
#include "revdoe/error.hpp"
#include "revdoe/estimation.hpp"
#include "revdoe/factorial.hpp"
#include "revdoe/io.hpp"
#include "revdoe/model.hpp"
#include "revdoe/stats.hpp"

namespace revdoe::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

enum class Subcommand { doe, fit, maximize, surface, generate, prf, report };
enum class FitMethod { ols, qp, mlr };
enum class MaximizeMode { production, profit };
enum class OutputFormat { json, csv };

inline constexpr std::array<std::string_view, 7> kSubcommandNames{"doe",      "fit",      "maximize", "surface",
                                                                   "generate", "prf",      "report"};

inline std::string_view to_string(Subcommand s) { return kSubcommandNames[static_cast<std::size_t>(s)]; }
inline std::string_view to_string(FitMethod m) {
  switch (m) {
    case FitMethod::ols: return "ols";
    case FitMethod::qp: return "qp";
    case FitMethod::mlr: return "mlr";
  }
  return "?";
}
inline std::string_view to_string(MaximizeMode m) { return m == MaximizeMode::production ? "production" : "profit"; }
inline std::string_view to_string(OutputFormat f) { return f == OutputFormat::json ? "json" : "csv"; }

inline Subcommand parse_subcommand(std::string_view s) {
  for (std::size_t i = 0; i < kSubcommandNames.size(); ++i)
    if (kSubcommandNames[i] == s) return static_cast<Subcommand>(i);
  throw ValidationError("unknown subcommand '" + std::string(s) +
                        "' (expected doe, fit, maximize, surface, generate, prf or report)");
}

inline FitMethod parse_method(std::string_view s) {
  if (s == "ols") return FitMethod::ols;
  if (s == "qp") return FitMethod::qp;
  if (s == "mlr") return FitMethod::mlr;
  throw ValidationError("unknown fit method '" + std::string(s) + "' (expected ols, qp or mlr)");
}

inline MaximizeMode parse_mode(std::string_view s) {
  if (s == "production") return MaximizeMode::production;
  if (s == "profit") return MaximizeMode::profit;
  throw ValidationError("unknown maximize mode '" + std::string(s) + "' (expected production or profit)");
}

inline OutputFormat parse_format(std::string_view s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  throw ValidationError("unknown output format '" + std::string(s) + "' (expected json or csv)");
}

struct GridSpec {
  double min = 0.1;
  double max = 0.9;
  double step = 0.1;

  void validate(std::string_view axis) const {
    const std::string name(axis);
    detail::require(std::isfinite(min) && std::isfinite(max), name + " grid bounds must be finite");
    detail::require(step > 0.0 && std::isfinite(step), name + " grid step must be positive");
    detail::require(max >= min, name + " grid max must not be below min");
  }
  [[nodiscard]] std::vector<double> values() const { return make_grid(min, max, step); }
};

struct NamedInput {
  std::string name;
  std::string path;
  std::optional<Regime> regime;
};

/// One replicated design: the real 2² cells plus a generated cost dataset
/// coded onto the same levels.
struct ReplicationInput {
  std::string name;
  std::string real;
  std::string generated;
};

struct RunConfig {
  std::string data;
  std::optional<Regime> regime;
  std::optional<double> alpha;
  std::optional<double> beta;
  double scale = 1.0;
  MaximizeMode mode = MaximizeMode::production;
  std::vector<double> unit_costs;
  std::optional<double> budget;
  std::optional<double> price;
  FitMethod method = FitMethod::ols;
  bool log = false;
  bool zero_intercept = false;
  double train_fraction = 0.9;
  double confidence = 0.90;
  double significance = 0.05;
  std::uint64_t seed = 1;
  std::optional<std::size_t> samples;
  std::vector<double> costs;  ///< (server, power and cooling) for surfaces
  GridSpec alpha_grid;
  GridSpec beta_grid;
  double crs_tolerance = default_crs_tolerance;
  std::string out;
  OutputFormat format = OutputFormat::json;
  // Inputs of the `report` subcommand.
  std::vector<NamedInput> designs;
  std::vector<NamedInput> datasets;
  std::vector<ReplicationInput> replications;
  // Relative paths resolve against this directory (the config file's); not echoed.
  std::filesystem::path base_dir;

  [[nodiscard]] bool has_elasticities() const noexcept { return alpha.has_value() && beta.has_value(); }

  void validate(Subcommand sub) const {
    detail::require(alpha.has_value() == beta.has_value(), "conflicting flags: --alpha and --beta must be given together");
    detail::require(scale > 0.0 && std::isfinite(scale), "scale must be positive");
    detail::require(confidence > 0.0 && confidence < 1.0, "confidence must lie strictly between 0 and 1");
    detail::require(significance > 0.0 && significance < 1.0, "significance must lie strictly between 0 and 1");
    detail::require(train_fraction > 0.0 && train_fraction <= 1.0, "train fraction must lie in (0, 1]");
    detail::require(crs_tolerance >= 0.0, "crs tolerance must be non-negative");
    detail::require(!samples || *samples >= 1, "sample count must be positive");
    alpha_grid.validate("alpha");
    beta_grid.validate("beta");
    auto need_data = [&] { detail::require(!data.empty(), std::string(to_string(sub)) + " needs --data PATH"); };
    switch (sub) {
      case Subcommand::doe:
      case Subcommand::prf:
      case Subcommand::generate: need_data(); break;
      case Subcommand::fit:
        need_data();
        detail::require(!(zero_intercept && method == FitMethod::qp),
                        "conflicting flags: --zero-intercept does not apply to --method qp");
        break;
      case Subcommand::maximize:
        detail::require(has_elasticities(), "maximize needs --alpha and --beta");
        detail::require(unit_costs.size() == 2, "maximize needs two unit costs (--unit-cost W1,W2)");
        if (mode == MaximizeMode::production) {
          detail::require(budget.has_value(), "maximize --mode production needs --budget");
          detail::require(!price.has_value(), "conflicting flags: --price applies to --mode profit only");
        } else {
          detail::require(price.has_value(), "maximize --mode profit needs --price");
          detail::require(!budget.has_value(), "conflicting flags: --budget applies to --mode production only");
        }
        break;
      case Subcommand::surface:
        detail::require(costs.size() == 2, "surface needs two costs (--costs SERVER,POWER)");
        break;
      case Subcommand::report:
        detail::require(!designs.empty() || !datasets.empty() || !replications.empty() || !data.empty(),
                        "report needs inputs: designs, datasets or replications in --config, or --data");
        break;
    }
  }
};

namespace detail {

inline Json to_json(const GridSpec& g) { return Json{{"min", g.min}, {"max", g.max}, {"step", g.step}}; }

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json regime_json(const std::optional<Regime>& r) {
  return r ? Json(std::string(to_string(*r))) : Json(nullptr);
}

inline std::optional<Regime> regime_from(const Json& v) {
  if (v.is_null()) return std::nullopt;
  return parse_regime(v.get<std::string>());
}

inline GridSpec grid_from(const Json& v, std::string_view key) {
  GridSpec g;
  if (v.is_array()) {
    revdoe::detail::require(v.size() == 3, "config '" + std::string(key) + "' must be [min, max, step]");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }
  for (const auto& [k, item] : v.items()) {
    if (k == "min") g.min = item.get<double>();
    else if (k == "max") g.max = item.get<double>();
    else if (k == "step") g.step = item.get<double>();
    else throw ValidationError("unknown key '" + k + "' in config '" + std::string(key) + "'");
  }
  return g;
}

}  // namespace detail

/// Echo of the effective configuration, embedded in every report.
inline Json to_json(const RunConfig& c) {
  Json j;
  j["data"] = c.data.empty() ? Json(nullptr) : Json(c.data);
  j["regime"] = detail::regime_json(c.regime);
  j["alpha"] = detail::optional_json(c.alpha);
  j["beta"] = detail::optional_json(c.beta);
  j["scale"] = c.scale;
  j["mode"] = to_string(c.mode);
  j["unit_costs"] = c.unit_costs;
  j["budget"] = detail::optional_json(c.budget);
  j["price"] = detail::optional_json(c.price);
  j["method"] = to_string(c.method);
  j["log"] = c.log;
  j["zero_intercept"] = c.zero_intercept;
  j["train_fraction"] = c.train_fraction;
  j["confidence"] = c.confidence;
  j["significance"] = c.significance;
  j["seed"] = c.seed;
  j["samples"] = detail::optional_json(c.samples);
  j["costs"] = c.costs;
  j["alpha_grid"] = detail::to_json(c.alpha_grid);
  j["beta_grid"] = detail::to_json(c.beta_grid);
  j["crs_tolerance"] = c.crs_tolerance;
  j["format"] = to_string(c.format);
  Json designs = Json::array();
  for (const auto& d : c.designs) designs.push_back({{"name", d.name}, {"path", d.path}});
  Json datasets = Json::array();
  for (const auto& d : c.datasets)
    datasets.push_back({{"name", d.name}, {"path", d.path}, {"regime", detail::regime_json(d.regime)}});
  Json reps = Json::array();
  for (const auto& r : c.replications)
    reps.push_back({{"name", r.name}, {"real", r.real}, {"generated", r.generated}});
  j["designs"] = std::move(designs);
  j["datasets"] = std::move(datasets);
  j["replications"] = std::move(reps);
  return j;
}

/// Reads a JSON configuration. Keys mirror the long flag names with
/// underscores; unknown keys are rejected. Relative paths inside it resolve
/// against the file's directory.
inline RunConfig config_from_json(const Json& j, std::filesystem::path base_dir = {}) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  RunConfig c;
  c.base_dir = std::move(base_dir);
  auto named = [](const Json& arr, const char* what) {
    std::vector<NamedInput> out;
    revdoe::detail::require(arr.is_array(), std::string("config '") + what + "' must be an array");
    for (const auto& item : arr) {
      NamedInput in;
      for (const auto& [k, v] : item.items()) {
        if (k == "name") in.name = v.get<std::string>();
        else if (k == "path") in.path = v.get<std::string>();
        else if (k == "regime") in.regime = detail::regime_from(v);
        else throw ValidationError("unknown key '" + k + "' in config '" + what + "'");
      }
      revdoe::detail::require(!in.name.empty() && !in.path.empty(),
                              std::string("config '") + what + "' entries need a name and a path");
      out.push_back(std::move(in));
    }
    return out;
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "data") c.data = v.get<std::string>();
      else if (key == "regime") c.regime = detail::regime_from(v);
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "beta") c.beta = v.get<double>();
      else if (key == "scale") c.scale = v.get<double>();
      else if (key == "mode") c.mode = parse_mode(v.get<std::string>());
      else if (key == "unit_costs") c.unit_costs = v.get<std::vector<double>>();
      else if (key == "budget") c.budget = v.get<double>();
      else if (key == "price") c.price = v.get<double>();
      else if (key == "method") c.method = parse_method(v.get<std::string>());
      else if (key == "log") c.log = v.get<bool>();
      else if (key == "zero_intercept") c.zero_intercept = v.get<bool>();
      else if (key == "train_fraction") c.train_fraction = v.get<double>();
      else if (key == "confidence") c.confidence = v.get<double>();
      else if (key == "significance") c.significance = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "samples") c.samples = v.get<std::size_t>();
      else if (key == "costs") c.costs = v.get<std::vector<double>>();
      else if (key == "alpha_grid") c.alpha_grid = detail::grid_from(v, key);
      else if (key == "beta_grid") c.beta_grid = detail::grid_from(v, key);
      else if (key == "crs_tolerance") c.crs_tolerance = v.get<double>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "format") c.format = parse_format(v.get<std::string>());
      else if (key == "designs") c.designs = named(v, "designs");
      else if (key == "datasets") c.datasets = named(v, "datasets");
      else if (key == "replications") {
        revdoe::detail::require(v.is_array(), "config 'replications' must be an array");
        for (const auto& item : v) {
          ReplicationInput r;
          for (const auto& [k, x] : item.items()) {
            if (k == "name") r.name = x.get<std::string>();
            else if (k == "real") r.real = x.get<std::string>();
            else if (k == "generated") r.generated = x.get<std::string>();
            else throw ValidationError("unknown key '" + k + "' in config 'replications'");
          }
          revdoe::detail::require(!r.name.empty() && !r.real.empty() && !r.generated.empty(),
                                  "config 'replications' entries need name, real and generated");
          c.replications.push_back(std::move(r));
        }
      } else {
        throw ValidationError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config has a value of the wrong type: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

/// REVDOE_SEED, when set, overrides the configured seed.
inline void apply_environment(RunConfig& config) {
  const char* env = std::getenv("REVDOE_SEED");
  if (env == nullptr) return;
  const std::string_view text(env);
  std::uint64_t seed = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("REVDOE_SEED must be a non-negative integer, got '" + std::string(text) + "'");
  }
  config.seed = seed;
}

// ---------------------------------------------------------------------------
// Report sections

namespace detail {

/// Reads input files once each, recording their content hashes.
class InputSet {
 public:
  explicit InputSet(std::filesystem::path base) : base_(std::move(base)) {}

  std::variant<CostDataset, Design22> load(const std::string& path) {
    std::filesystem::path full(path);
    if (full.is_relative() && !base_.empty()) full = base_ / full;
    if (!std::filesystem::exists(full)) throw ValidationError("input file not found: " + path);
    const std::string bytes = io::read_file(full);
    if (seen_.insert(path).second) entries_.push_back({{"path", path}, {"sha256", sha256_hex(bytes)}});
    return io::ingest_csv_text(bytes, full.filename().string());
  }

  CostDataset dataset(const std::string& path) {
    auto v = load(path);
    if (auto* d = std::get_if<CostDataset>(&v)) return std::move(*d);
    throw ValidationError(path + ": expected a cost dataset (server_cost, power_cooling_cost[, revenue])");
  }

  [[nodiscard]] Json json() const {
    Json arr = Json::array();
    for (const auto& e : entries_) arr.push_back(e);
    return arr;
  }

 private:
  std::filesystem::path base_;
  std::set<std::string> seen_;
  std::vector<Json> entries_;
};

inline Json effects_json(const EffectEstimates& e) {
  return {{"q0", e.q0}, {"qA", e.qA}, {"qB", e.qB}, {"qAB", e.qAB}};
}

inline Json allocation_json(const VariationAllocation& v) {
  return {{"ssa", v.ssa},
          {"ssb", v.ssb},
          {"ssab", v.ssab},
          {"sse", v.sse},
          {"sst", v.sst},
          {"percent",
           {{"factor1", 100.0 * v.fa}, {"factor2", 100.0 * v.fb}, {"interaction", 100.0 * v.fab}, {"error", 100.0 * v.fe}}},
          {"degenerate", v.degenerate}};
}

inline Json interaction_json(const InteractionSeries& s) {
  Json series = Json::array();
  for (const auto& line : s.series) {
    Json points = Json::array();
    for (const auto& p : line.points) points.push_back({{"factor1_level", p.factor1_level}, {"mean", p.mean}});
    series.push_back({{"factor2_level", line.factor2_level}, {"points", std::move(points)}});
  }
  return {{"series", std::move(series)}, {"deviation", s.deviation}};
}

inline Json doe_json(const Design22& design, const RunConfig& config) {
  Json j;
  j["factors"] = {{"factor1", "power_cooling"}, {"factor2", "server"}};
  j["replicates"] = design.replicates();
  const auto means = design.cell_means();
  j["cell_means"] = std::vector<double>(means.begin(), means.end());
  const auto effects = estimate_effects(design);
  j["effects"] = effects_json(effects);
  j["allocation"] = allocation_json(allocate_variation(effects, design));
  j["interaction"] = interaction_json(interaction_cell_means(design));
  if (design.replicates() >= 2) {
    const auto ci = effect_confidence_intervals(design, config.confidence);
    Json intervals = Json::array();
    for (const auto& i : ci.intervals)
      intervals.push_back({{"effect", i.name},
                           {"estimate", i.estimate},
                           {"lower", i.lower},
                           {"upper", i.upper},
                           {"includes_zero", i.includes_zero()}});
    j["confidence_intervals"] = {{"confidence", ci.confidence},
                                 {"degrees_of_freedom", ci.degrees_of_freedom},
                                 {"mse", ci.mse},
                                 {"std_error", ci.std_error},
                                 {"t_quantile", ci.t_quantile},
                                 {"intervals", std::move(intervals)}};
  }
  return j;
}

inline Json coded_json(const CodedDataset& coded) {
  Json skipped = Json::array();
  for (std::size_t row : coded.skipped_rows) skipped.push_back(row + 1);  // 1-based, as in CSV errors
  return {{"cell_counts", std::vector<std::size_t>(coded.counts.begin(), coded.counts.end())},
          {"skipped_rows", std::move(skipped)}};
}

inline Json fit_json(const FitResult& fit, std::string_view method, bool log_space, double crs_tolerance) {
  Json j;
  j["method"] = method;
  j["log_space"] = log_space;
  Json coefficients;
  for (std::size_t i = 0; i < fit.columns.size(); ++i) coefficients[fit.columns[i]] = fit.coefficients[i];
  j["coefficients"] = std::move(coefficients);
  j["intercept"] = fit.intercept;
  j["alpha"] = fit.alpha;
  j["beta"] = fit.beta;
  const auto regime = fit.regime(crs_tolerance);
  j["elasticity_sum"] = regime.elasticity_sum;
  j["fitted_regime"] = to_string(regime.regime);
  j["rss"] = fit.rss;
  const auto& d = fit.diagnostics;
  j["diagnostics"] = {{"ssy", d.ssy}, {"ss0", d.ss0},       {"sst", d.sst},
                      {"sse", d.sse}, {"ssr", d.ssr},       {"r_squared", d.r_squared},
                      {"r", d.r_multiple}, {"degenerate", d.degenerate}};
  if (fit.kkt) {
    j["active_set"] = fit.active_set;
    j["multipliers"] = fit.multipliers;
    j["kkt"] = {{"primal", fit.kkt->primal},
                {"stationarity", fit.kkt->stationarity},
                {"dual", fit.kkt->dual},
                {"complementarity", fit.kkt->complementarity}};
    j["iterations"] = fit.iterations;
  }
  return j;
}

inline void check_regime(const FitResult& fit, std::optional<Regime> declared, double crs_tolerance,
                         const std::string& where, std::vector<std::string>& warnings) {
  if (!declared) return;
  const auto fitted = fit.regime(crs_tolerance);
  if (fitted.regime == *declared) return;
  std::ostringstream os;
  os << where << ": declared regime " << to_string(*declared) << " but fitted elasticities sum to "
     << io::format_number(fitted.elasticity_sum) << " (" << to_string(fitted.regime) << " at tolerance "
     << io::format_number(crs_tolerance) << ")";
  warnings.push_back(os.str());
}

inline Json fit_section(const CostDataset& data, FitMethod method, const RunConfig& config,
                        std::optional<Regime> declared, const std::string& where,
                        std::vector<std::string>& warnings) {
  data.require_revenue();
  Json j;
  switch (method) {
    case FitMethod::ols: {
      const auto dm = config.log ? log_linearize(data, !config.zero_intercept)
                                 : linear_design(data, !config.zero_intercept);
      const auto fit = ols(dm);
      j = fit_json(fit, "ols", config.log, config.crs_tolerance);
      if (config.log) check_regime(fit, declared, config.crs_tolerance, where, warnings);
      break;
    }
    case FitMethod::qp: {
      const auto fit = constrained_fit(data);
      j = fit_json(fit, "qp", true, config.crs_tolerance);
      check_regime(fit, declared, config.crs_tolerance, where, warnings);
      break;
    }
    case FitMethod::mlr: {
      const auto res = mlr(data, {config.log, config.zero_intercept, config.train_fraction});
      j = fit_json(res.fit, "mlr", config.log, config.crs_tolerance);
      j["train_rows"] = res.train_rows;
      Json held = Json::array();
      for (const auto& p : res.held_out)
        held.push_back({{"row", p.row + 1}, {"actual", p.actual}, {"predicted", p.predicted}});
      j["held_out"] = std::move(held);
      if (config.log) check_regime(res.fit, declared, config.crs_tolerance, where, warnings);
      break;
    }
  }
  return j;
}

inline Json prf_json(const PrfReport& p) {
  Json components = Json::array();
  for (std::size_t k = 0; k < 2; ++k)
    components.push_back({{"percent", 100.0 * p.fractions[k]},
                          {"variance", p.variances[k]},
                          {"direction", {{"server", p.directions[k][0]}, {"power_cooling", p.directions[k][1]}}}});
  return {{"covariance",
           {{"server", p.covariance[0]}, {"server_power_cooling", p.covariance[1]}, {"power_cooling", p.covariance[2]}}},
          {"components", std::move(components)}};
}

inline Json gaussian_json(const GaussianSpec& g) { return {{"mean", g.mean}, {"std_dev", g.std_dev}}; }

inline Json gof_json(const GofReport& g) {
  return {{"statistic", g.statistic},
          {"degrees_of_freedom", g.degrees_of_freedom},
          {"significance", g.significance},
          {"critical_value", g.critical_value},
          {"h0_rejected", g.h0_rejected},
          {"bin_edges", g.bin_edges},
          {"counts", g.counts},
          {"expected_per_bin", g.expected_per_bin}};
}

/// Fits a Gaussian to each cost column, draws a seeded synthetic dataset of
/// the same shape, tests each draw against its source Gaussian, and prices
/// the rows with the supplied (or fitted) Cobb-Douglas model.
inline Json generate_section(const CostDataset& source, const RunConfig& config) {
  const std::size_t n = config.samples.value_or(source.size());
  const auto server_spec = fit_gaussian(source.server_costs());
  const auto power_spec = fit_gaussian(source.power_cooling_costs());
  const auto server = generate_gaussian(server_spec, n, config.seed);
  const auto power = generate_gaussian(power_spec, n, config.seed + 1);

  Json model_json;
  std::optional<CobbDouglasModel> model;
  if (config.has_elasticities()) {
    model.emplace(config.scale, std::vector<double>{*config.alpha, *config.beta});
    model_json["source"] = "flags";
  } else if (source.has_revenue()) {
    const auto fit = ols(log_linearize(source, true));
    model.emplace(std::exp(fit.intercept), std::vector<double>{fit.alpha, fit.beta});
    model_json["source"] = "ols_fit";
  } else {
    throw ValidationError("generate needs --alpha/--beta or a dataset with a revenue column to fit a model");
  }
  model_json["scale"] = model->scale();
  model_json["alpha"] = model->elasticities()[0];
  model_json["beta"] = model->elasticities()[1];

  CostDataset generated;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(server[i] > 0.0) || !(power[i] > 0.0)) {
      throw ValidationError("generated row " + std::to_string(i + 1) +
                            " has a non-positive cost; the fitted Gaussian puts mass below zero");
    }
    generated.push_back({server[i], power[i], evaluate(*model, FactorBundle{server[i], power[i]})});
  }
  Json rows = Json::array();
  for (const auto& r : generated.rows()) rows.push_back({r.server_cost, r.power_cooling_cost, *r.revenue});

  Json j;
  j["seed"] = config.seed;
  j["samples"] = n;
  j["server"] = {{"gaussian", gaussian_json(server_spec)},
                 {"gof", gof_json(chi_square_gof(server, server_spec, config.significance))}};
  j["power_cooling"] = {{"gaussian", gaussian_json(power_spec)},
                        {"gof", gof_json(chi_square_gof(power, power_spec, config.significance))}};
  j["model"] = std::move(model_json);
  j["dataset"] = {{"columns", {"server_cost", "power_cooling_cost", "revenue"}}, {"rows", std::move(rows)}};
  return j;
}

inline Json maximize_section(const RunConfig& config) {
  const CobbDouglasModel model(config.scale, {*config.alpha, *config.beta});
  const auto regime = returns_regime(model, config.crs_tolerance);
  Json j;
  j["mode"] = to_string(config.mode);
  j["model"] = {{"scale", model.scale()},
                {"elasticities", std::vector<double>(model.elasticities().begin(), model.elasticities().end())},
                {"regime", to_string(regime.regime)}};
  j["unit_costs"] = config.unit_costs;
  if (config.mode == MaximizeMode::production) {
    const BudgetSpec budget{config.unit_costs, *config.budget};
    const auto bundle = maximize_production(model, budget);
    double spend = 0.0;
    for (std::size_t i = 0; i < bundle.size(); ++i) spend += config.unit_costs[i] * bundle[i];
    j["budget"] = *config.budget;
    j["bundle"] = std::vector<double>(bundle.quantities().begin(), bundle.quantities().end());
    j["output"] = evaluate(model, bundle);
    j["spend"] = spend;
  } else {
    const auto opt = maximize_profit(model, *config.price, config.unit_costs);
    j["price"] = *config.price;
    j["bundle"] = std::vector<double>(opt.bundle.quantities().begin(), opt.bundle.quantities().end());
    j["output"] = opt.output;
    j["profit"] = opt.profit;
  }
  return j;
}

inline Json surface_section(const RunConfig& config) {
  const FactorBundle costs{config.costs[0], config.costs[1]};
  const auto alpha_grid = config.alpha_grid.values();
  const auto beta_grid = config.beta_grid.values();
  const auto surface = revenue_surface(costs, alpha_grid, beta_grid, config.regime, config.crs_tolerance);
  Json cells = Json::array();
  for (std::size_t i = 0; i < alpha_grid.size(); ++i)
    for (std::size_t k = 0; k < beta_grid.size(); ++k) {
      const double revenue = evaluate(CobbDouglasModel(1.0, {alpha_grid[i], beta_grid[k]}), costs);
      cells.push_back({{"alpha", alpha_grid[i]},
                       {"beta", beta_grid[k]},
                       {"revenue", revenue},
                       {"in_regime", surface.at(i, k).has_value()}});
    }
  Json j;
  j["costs"] = {{"server", config.costs[0]}, {"power_cooling", config.costs[1]}};
  j["regime_filter"] = regime_json(config.regime);
  j["alpha_grid"] = alpha_grid;
  j["beta_grid"] = beta_grid;
  j["present_cells"] = surface.present_cells();
  j["argmax"] = {{"alpha", surface.alpha_grid[surface.argmax_alpha]},
                 {"beta", surface.beta_grid[surface.argmax_beta]},
                 {"revenue", surface.max_revenue()}};
  j["cells"] = std::move(cells);
  return j;
}

inline Json design_or_coded(const std::variant<CostDataset, Design22>& input, const RunConfig& config) {
  if (const auto* design = std::get_if<Design22>(&input)) return doe_json(*design, config);
  const auto coded = code_dataset(std::get<CostDataset>(input));
  Json j = doe_json(coded.design, config);
  j["coding"] = coded_json(coded);
  return j;
}

inline void require_finite(const Json& j, const std::string& path) {
  if (j.is_number_float() && !std::isfinite(j.get<double>()))
    throw NumericalError("non-finite value in report at " + (path.empty() ? std::string("/") : path));
  if (j.is_object())
    for (const auto& [k, v] : j.items()) require_finite(v, path + "/" + k);
  if (j.is_array())
    for (std::size_t i = 0; i < j.size(); ++i) require_finite(j[i], path + "/" + std::to_string(i));
}

}  // namespace detail

struct Report {
  Json document;
  std::vector<std::string> warnings;
};

/// Runs one subcommand. Throws ValidationError or NumericalError on failure.
inline Report build_report(const RunConfig& config, Subcommand sub) {
  config.validate(sub);
  detail::InputSet inputs(config.base_dir);
  std::vector<std::string> warnings;
  Json results;

  switch (sub) {
    case Subcommand::doe:
      results = detail::design_or_coded(inputs.load(config.data), config);
      break;
    case Subcommand::fit: {
      const auto data = inputs.dataset(config.data);
      results = detail::fit_section(data, config.method, config, config.regime, config.data, warnings);
      break;
    }
    case Subcommand::maximize:
      results = detail::maximize_section(config);
      break;
    case Subcommand::surface:
      results = detail::surface_section(config);
      break;
    case Subcommand::generate:
      results = detail::generate_section(inputs.dataset(config.data), config);
      break;
    case Subcommand::prf:
      results = detail::prf_json(prf(inputs.dataset(config.data)));
      break;
    case Subcommand::report: {
      RunConfig fit_config = config;
      fit_config.log = true;
      results["designs"] = Json::object();
      for (const auto& d : config.designs) results["designs"][d.name] = detail::design_or_coded(inputs.load(d.path), config);
      results["replications"] = Json::object();
      for (const auto& r : config.replications) {
        auto real = inputs.load(r.real);
        const auto* first = std::get_if<Design22>(&real);
        if (first == nullptr) throw ValidationError(r.real + ": replication 'real' input must be a design CSV");
        const auto coded = code_dataset(inputs.dataset(r.generated));
        const std::array<Design22, 2> runs{*first, coded.design};
        Json j = detail::doe_json(stack_replicates(runs), config);
        j["coding"] = detail::coded_json(coded);
        results["replications"][r.name] = std::move(j);
      }
      std::vector<NamedInput> datasets = config.datasets;
      if (!config.data.empty()) datasets.push_back({"data", config.data, config.regime});
      results["datasets"] = Json::object();
      for (std::size_t idx = 0; idx < datasets.size(); ++idx) {
        const auto& d = datasets[idx];
        const auto data = inputs.dataset(d.path);
        Json j;
        j["regime"] = detail::regime_json(d.regime);
        j["rows"] = data.size();
        if (data.has_revenue()) {
          const std::string where = d.name;
          j["fits"]["ols"] = detail::fit_section(data, FitMethod::ols, fit_config, d.regime, where, warnings);
          j["fits"]["qp"] = detail::fit_section(data, FitMethod::qp, fit_config, d.regime, where, warnings);
          j["fits"]["mlr"] = detail::fit_section(data, FitMethod::mlr, fit_config, d.regime, where, warnings);
        }
        j["prf"] = detail::prf_json(prf(data));
        RunConfig gen_config = config;
        gen_config.seed = config.seed + 2 * idx;  // two streams per dataset
        j["generate"] = detail::generate_section(data, gen_config);
        results["datasets"][d.name] = std::move(j);
      }
      if (config.costs.size() == 2) results["surface"] = detail::surface_section(config);
      if (config.has_elasticities() && config.unit_costs.size() == 2 && (config.budget || config.price)) {
        results["maximize"] = detail::maximize_section(config);
      }
      break;
    }
  }

  Report report;
  report.document["schema_version"] = kSchemaVersion;
  report.document["tool"] = {{"name", "revdoe"}, {"version", kToolVersion}};
  report.document["command"] = to_string(sub);
  report.document["provenance"] = {{"inputs", inputs.json()}, {"config", to_json(config)}};
  report.document["warnings"] = warnings;
  report.document["results"] = std::move(results);
  detail::require_finite(report.document, "");
  report.warnings = std::move(warnings);
  return report;
}

struct RunOutcome {
  std::optional<Report> report;
  int exit_code = 0;
  std::string error;
};

/// Exit codes: 0 success, 2 validation failure, 3 numerical failure.
inline RunOutcome run_pipeline(const RunConfig& config, Subcommand sub) {
  try {
    return {build_report(config, sub), 0, {}};
  } catch (const ValidationError& e) {
    return {std::nullopt, 2, e.what()};
  } catch (const NumericalError& e) {
    return {std::nullopt, 3, e.what()};
  }
}

inline std::string serialize(const Report& report) { return report.document.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Plot data

namespace detail {

inline std::string csv_bool(bool b) { return b ? "true" : "false"; }

inline std::string surface_csv(const Json& section) {
  std::string out = "alpha,beta,revenue,in_regime\n";
  for (const auto& c : section.at("cells")) {
    out += io::format_number(c.at("alpha").get<double>()) + ',' + io::format_number(c.at("beta").get<double>()) + ',' +
           io::format_number(c.at("revenue").get<double>()) + ',' + csv_bool(c.at("in_regime").get<bool>()) + '\n';
  }
  return out;
}

inline std::string interaction_csv(const Json& section) {
  std::string out = "factor2_level,factor1_level,mean\n";
  for (const auto& s : section.at("series")) {
    const int b = s.at("factor2_level").get<int>();
    for (const auto& p : s.at("points"))
      out += std::to_string(b) + ',' + std::to_string(p.at("factor1_level").get<int>()) + ',' +
             io::format_number(p.at("mean").get<double>()) + '\n';
  }
  return out;
}

inline std::string dataset_csv(const Json& section) {
  std::string out = "server_cost,power_cooling_cost,revenue\n";
  for (const auto& r : section.at("rows"))
    out += io::format_number(r[0].get<double>()) + ',' + io::format_number(r[1].get<double>()) + ',' +
           io::format_number(r[2].get<double>()) + '\n';
  return out;
}

}  // namespace detail

/// CSV for one report section addressed by JSON pointer, e.g.
/// "/results/surface" or "/results/designs/irs/interaction". Surfaces become
/// long-format (alpha, beta, revenue, in_regime); interaction plots become two
/// series of (factor1_level, mean); generated datasets become cost CSVs.
inline std::string emit_plot_data(const Json& document, const std::string& pointer) {
  Json::json_pointer ptr;
  try {
    ptr = Json::json_pointer(pointer);
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("invalid report section path '" + pointer + "'");
  }
  if (!document.contains(ptr)) throw ValidationError("report section '" + pointer + "' is absent");
  const Json& section = document.at(ptr);
  if (section.is_object() && section.contains("cells")) return detail::surface_csv(section);
  if (section.is_object() && section.contains("series")) return detail::interaction_csv(section);
  if (section.is_object() && section.contains("rows") && section.contains("columns")) return detail::dataset_csv(section);
  throw ValidationError("report section '" + pointer + "' holds no grid or series data");
}

/// Every plottable section of a report as (file name, JSON pointer), in
/// document order. File names join the path below /results with '_'.
inline std::vector<std::pair<std::string, std::string>> plot_sections(const Json& document) {
  std::vector<std::pair<std::string, std::string>> out;
  auto walk = [&](auto&& self, const Json& node, const std::string& pointer, const std::string& name) -> void {
    if (!node.is_object()) return;
    for (const auto& [key, child] : node.items()) {
      const std::string p = pointer + "/" + key;
      const std::string n = name.empty() ? key : name + "_" + key;
      if ((key == "surface" || key == "interaction") && child.is_object()) {
        out.emplace_back(n + ".csv", p);
      } else if (key == "dataset" && child.is_object() && child.contains("rows")) {
        out.emplace_back(n + ".csv", p);
      } else {
        self(self, child, p, n);
      }
    }
  };
  if (!document.contains("results")) return out;
  const Json& results = document.at("results");
  if (results.is_object() && results.contains("cells")) {
    out.emplace_back("surface.csv", "/results");  // the surface subcommand's report is the surface itself
    return out;
  }
  walk(walk, results, "/results", "");
  return out;
}

}  // namespace revdoe::report
