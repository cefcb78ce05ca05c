#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmpdee/metrics.hpp"

namespace nmpdee {

enum class Method { LDG, FD, MC, EXACT };

const char* to_string(Method m);

/// Flat description of one experiment; mirrors the INI sections
/// [experiment], [model], [solver], [mc], [grid], [output], [sweep].
struct ExperimentConfig {
  std::string name = "experiment";
  std::string description;

  // [model]
  std::string family;                    ///< double_well, gbm_time_varying, linear_fgn, linear_tv, nonlinear_fgn, fgn_only
  std::map<std::string, double> params;  ///< family coefficients (a, b, c, d, sigma)
  double x0 = 0.0;
  double hurst = 0.5;
  std::string centering = "drift_only";  ///< lognormal exact for linear_fgn with b = 0

  // [solver]
  std::vector<Method> methods;
  std::size_t degree = 2;
  double dt = 1e-3;
  std::string initial = "delta";  ///< delta | warm_start
  double sigma0 = 0.0;            ///< 0 selects 2h
  double warm_start_time = 0.0;
  double c_cfl = 0.0;  ///< 0 selects the degree default
  double c_adv = 0.0;
  double fd_c_cfl = 0.4;

  // [mc]
  double mc_dt = 0.004;
  std::size_t paths = 100000;
  std::uint64_t seed = 1;

  // [grid]
  double a = -3.0;
  double b = 3.0;
  std::size_t cells = 120;

  // [output]
  std::vector<double> times;
  std::filesystem::path output_dir = "out";

  // [sweep]
  std::vector<double> hurst_sweep;

  unsigned threads = 1;

  double dx() const { return (b - a) / static_cast<double>(cells); }
  bool has(Method m) const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses INI text. `origin` names the source in error messages.
ExperimentConfig parse_config(const std::string& text, std::string_view origin = "config");
ExperimentConfig load_config(const std::filesystem::path& file);
/// Round-trips through parse_config.
std::string to_ini(const ExperimentConfig& config);

struct PresetInfo {
  std::string name;
  std::string description;
  std::string ini;
};

const std::vector<PresetInfo>& list_presets();
const PresetInfo* find_preset(std::string_view name);
/// A path to an existing file is loaded as a config; anything else is looked
/// up as a preset name.
ExperimentConfig resolve_config(const std::string& config_or_preset);

struct RunOutput {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> files;
  std::vector<ErrorReport> errors;
  std::string reference;  ///< "EXACT", "MC" or empty
};

/// Runs every selected solver and writes
///   <dir>/<method>/density_t<time>.csv, <dir>/errors.csv, <dir>/metadata.json.
/// With a Hurst sweep, one such directory per H value (H<value>/).
std::vector<RunOutput> run_experiment(const ExperimentConfig& config);

}  // namespace nmpdee
