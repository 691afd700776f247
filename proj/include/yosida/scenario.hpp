#pragma once

// Scenario files (JSON) and the solve / verify / oracle commands behind the
// command-line tool. Unknown keys are rejected; parse -> serialize -> parse
// is the identity.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "yosida/operators.hpp"
#include "yosida/recursion.hpp"

namespace yosida {

enum class ExitCode : int {
  ok = 0,
  check_failed = 1,
  config_error = 2,
  gate_refused = 3,
  nonconvergence = 4,
};

struct StartSpec {
  enum class Kind { zero, constant, forcing };
  Kind kind = Kind::zero;
  State value;                  ///< constant
  std::vector<Forcing> shape;   ///< forcing, one per component

  bool operator==(const StartSpec&) const = default;
};

struct CheckSpec {
  enum class Kind { periodicity, antiperiodicity, almost_period, integral_residual, lipschitz, modulus };
  Kind kind = Kind::lipschitz;
  double period = 0.0;      ///< periodicity / antiperiodicity
  double epsilon = 0.1;     ///< almost_period
  double s_max = 10.0;
  double ds = 0.01;
  std::size_t samples = 200;  ///< integral_residual
  double delta_max = 0.5;
  double horizon = 1.0;     ///< lipschitz / modulus

  bool operator==(const CheckSpec&) const = default;
};

struct VerifySpec {
  std::size_t samples = 10000;
  double lambda_min = 1e-3;
  double lambda_max = 10.0;
  double t_range = 20.0;
  double state_scale = 3.0;
  bool iterate_inequality = true;

  bool operator==(const VerifySpec&) const = default;
};

struct OracleSpec {
  double alpha = 1.0;
  double beta = 2.0;
  double tol = 1e-10;
  std::size_t refine = 8;
  /// Either a fixed forcing f or `random_cases` random piecewise-linear
  /// signals with knots every `knot_spacing` and values in [0, 1].
  std::optional<Forcing> f;
  std::size_t random_cases = 0;
  double knot_spacing = 1.0;
  double agreement = 1e-8;

  bool operator==(const OracleSpec&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  std::string operator_id;
  /// Catalog parameters, kept as given for round-trips (validated on load).
  std::string operator_params_json = "{}";
  /// Declared-constant overrides ("K0", "omega", "L_g"); used for controls.
  std::vector<std::pair<std::string, double>> declared;
  StartSpec start;
  GridSpec grid{-40.0, 40.0, 1e-3, 1};
  LeftExtension extension;
  std::vector<double> lambda_schedule{0.2, 0.1, 0.05, 0.025, 0.0125};
  std::size_t n_max = 40;
  std::optional<double> tol_outer;
  double tol_picard = 1e-10;
  double burn_in = 10.0;
  bool warm_start = false;
  bool enforce_gate = true;
  std::vector<CheckSpec> checks;
  VerifySpec verify;
  OracleSpec oracle;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string output_dir;

  bool operator==(const Scenario&) const = default;
};

/// Throws ConfigError with a path to the offending key.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& file);
std::string serialize_scenario(const Scenario& s);

/// FNV-1a of the canonical serialization, as 16 hex digits.
std::string config_hash(const Scenario& s);

std::shared_ptr<Operator> build_operator(const Scenario& s);
GridFunction build_start(const Scenario& s, std::size_t dim);
SolverConfig build_solver_config(const Scenario& s, std::size_t dim);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

/// Output directory: flag, then $YOSIDA_OUT_DIR, then the scenario's
/// output_dir, then out/<name>.
std::filesystem::path resolve_output_dir(const Scenario& s, const RunOptions& opt);

ExitCode cmd_solve(const std::filesystem::path& scenario_file, const RunOptions& opt, std::ostream& log);
ExitCode cmd_verify(const std::filesystem::path& scenario_file, const RunOptions& opt, std::ostream& log);
ExitCode cmd_oracle(const std::filesystem::path& scenario_file, const RunOptions& opt, std::ostream& log);

}  // namespace yosida
