#pragma once

#include "vns/grid.hpp"
#include "vns/params.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vns {

/// Schema or value error in a configuration file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration file missing or unreadable.
class ConfigIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialConfig {
  /// gaussian | compact-bump | constant | snapshot
  std::string density = "compact-bump";
  double amplitude = 0.5;
  double width = 2.0;
  double background = 0.0;
  std::string density_file;
  /// zero | modes | compression | snapshot
  std::string velocity = "zero";
  double velocity_amplitude = 0.0;
  int velocity_mode = 1;
  double velocity_width = 2.0;
  std::string velocity_file;
  /// Multiplies the density perturbation (over background) and the velocity.
  double amplitude_scale = 1.0;
};

struct SolverConfig {
  double eta0 = 0.5;
  double eta_factor = 0.5;
  int eta_levels = 5;
  double cauchy_tol = 0.0;
  double picard_tol = 1e-10;
  int max_iter = 50;
  double cfl_safety = 0.4;
  double T = 0.1;
  double cadence = 0.0;
  double dt = 0.0;  ///< 0 selects the CFL step
  bool limit_solve = true;
  std::string validity = "record";  ///< record | abort
  double gmres_tol = 1e-12;
  std::uint64_t seed = 1;
};

struct OutputConfig {
  std::string directory = "out";
  /// Any of ledger, conservation, vacuum, characteristics, ellipticity.
  std::vector<std::string> diagnostics{"ledger", "conservation", "vacuum", "characteristics", "ellipticity"};
  bool snapshots = false;
  int particles = 32;
  int ellipticity_samples = 10000;
};

struct MmsConfig {
  double rho_bar = 1.0;
  double eps = 0.1;
  int mode = 1;
  double omega = 1.0;
  double U = 0.1;
  double nu = 1.0;
  double T = 0.5;
  std::vector<double> dts{0.02, 0.01, 0.005, 0.0025};
  std::vector<double> oracle_dts{0.02, 0.01, 0.005};
};

struct CompareConfig {
  int levels = 2;  ///< joint (h, dt) refinements including the baseline
};

struct SweepAxis {
  std::string key;  ///< section.key
  std::vector<std::string> values;
};

struct RunConfig {
  RawParams params;
  double calib_C = 1.0;
  int dim = 1;
  int n = 128;
  double L = 8.0;
  InitialConfig initial;
  SolverConfig solver;
  OutputConfig output;
  MmsConfig mms;
  CompareConfig compare;
  std::vector<SweepAxis> sweep;
  std::filesystem::path base_dir;  ///< resolves relative snapshot paths

  [[nodiscard]] Grid grid() const { return Grid(dim, n, L); }
  [[nodiscard]] bool wants(const std::string& diagnostic) const;
};

struct InitialData {
  ScalarField rho;
  VectorField u;
};

/// Parses INI text (sections params, grid, initial, solver, output, mms,
/// compare, sweep). Unknown sections or keys are rejected.
[[nodiscard]] RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Sets one "section.key" from its text form.
void apply_override(RunConfig& cfg, const std::string& dotted_key, const std::string& value);

/// Every key with its effective value, in a fixed order; sweep axes omitted.
[[nodiscard]] std::string resolved_config(const RunConfig& cfg, bool with_directory = true);

/// Samples the configured density and velocity generators on the grid.
[[nodiscard]] InitialData build_initial(const RunConfig& cfg);

/// Cartesian product of the sweep axes (axes sorted by key, values in file order).
[[nodiscard]] std::vector<std::vector<std::pair<std::string, std::string>>> expand_sweep(const RunConfig& cfg);

}  // namespace vns
