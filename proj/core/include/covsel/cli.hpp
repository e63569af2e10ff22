#pragma once

// Command layer behind the covsel executable: configuration, the select /
// simulate / validate commands, and report emission.
//
// Config files are INI-style:
//
//   [data]        input, center
//   [basis]       family, max_index, t_min, t_max
//   [collection]  scheme, max_dim, subset_size, subset_guard
//   [selection]   theta
//   [output]      out, replications_csv
//   [run]         seed, threads, reps
//   [grid]        p, t_min, t_max               (simulate)
//   [kernel]      kind, length_scale, family, max_index, indices, psi
//   [simulate]    n, n_grid, diagnostics, alpha
//   [validate]    instances, inject_fault
//
// Lists are comma separated. Command-line flags override config keys.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "covsel/dictionary.hpp"
#include "covsel/sampling.hpp"

namespace covsel::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 1,
  kInputError = 2,
  kDegenerateCollection = 3,
};

struct RunConfig {
  // data / select
  std::filesystem::path input;
  bool center = false;

  // basis; unset values are resolved against the data or simulation grid
  dict::BasisKind family = dict::BasisKind::fourier;
  std::optional<std::size_t> max_index;
  std::optional<double> basis_t_min;
  std::optional<double> basis_t_max;

  // collection
  dict::SchemeKind scheme = dict::SchemeKind::nested;
  std::optional<std::size_t> max_dim;
  std::size_t subset_size = 1;
  std::size_t subset_guard = 2;

  double theta = 1.0;

  std::filesystem::path out = "covsel_out";
  bool replications_csv = false;

  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t reps = 100;

  // simulation grid: uniform, p points on [t_min, t_max)
  std::size_t grid_p = 16;
  double grid_t_min = 0.0;
  double grid_t_max = 1.0;

  sim::KernelSpec kernel;

  std::size_t n = 100;
  std::vector<std::size_t> n_grid;
  bool diagnostics = false;
  double alpha = 0.5;

  std::size_t validate_instances = 100;
  bool inject_fault = false;
};

/// Parses an INI config. Unknown sections or keys are errors, as are
/// malformed values. Throws InputError naming the offending key.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> out;
  std::optional<double> theta;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool inject_fault = false;
};

void apply(RunConfig& cfg, const Overrides& o);

/// Resolved config as JSON text (embedded in every report).
std::string config_to_json(const RunConfig& cfg);

/// Each command writes its outputs under cfg.out, logs progress to `log`
/// and errors to `err`, and returns an ExitCode. Exceptions never escape.
int cmd_select(const RunConfig& cfg, std::ostream& log, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& log, std::ostream& err);
int cmd_validate(const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace covsel::cli
