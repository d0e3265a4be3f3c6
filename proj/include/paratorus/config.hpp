#pragma once

#include "paratorus/grid.hpp"
#include "paratorus/small_divisor.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace paratorus {

inline constexpr int kConfigSchema = 1;

// Message carries "<source>:<line>:<col>" for syntax errors and the dotted
// field path for schema errors.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverSettings {
  double tol_abs = 1e-10;         // outer fixed-point step
  double tol_rel = 1e-14;         // relative tolerances (paracomposition inverse)
  double inner_tol = 1e-9;        // straightening / matrix reduction steps
  double ratio_guard = 0.9;
  int max_iter = 50;
  double neumann_cutoff = 1e-16;  // relative size of the last Neumann term
  int n_tau = 0;                  // RK4 steps; 0 picks the command default
};

struct LadderSettings {
  std::vector<double> eps{1e-2, 3e-3, 1e-3};  // strictly decreasing
  double exponent = 0.3;                      // gamma = eps^exponent
  double radius = 2.0;
  std::size_t samples = 200;
};

struct MeasureSettings {
  std::vector<double> gammas{0.02, 0.05, 0.1, 0.2};
  double radius = 2.0;
  std::size_t samples = 20000;
};

struct CheckSettings {
  int symbols = 50;                 // calculus-check sample count
  double lip = 0.3;                 // |theta|_{C^1} of generated maps
  std::vector<int> ks{4, 8, 16, 32};
  double index = 2.0;               // Sobolev index of the smoothing fits
  std::string diffeo;               // optional snapshot paths
  std::string field;
  bool allow_coarse_steps = false;  // skip the n_tau >= 8 <M> rule
};

struct ExperimentConfig {
  int schema_version = kConfigSchema;
  std::string problem = "quasilinear";
  int n = 2;
  int M = 16;
  int G = 0;  // 0: 4 M
  int N = 1;  // matrix size for reduce-matrix
  std::vector<double> omega;  // empty: family default
  double eps = 1e-3;
  double s = 0.0;  // working index of solve-hyperbolic; 0: family default
  DioParams dio;
  double delta = 0.1;
  SolverSettings solver;
  LadderSettings ladder;
  MeasureSettings measure;
  CheckSettings checks;
  std::string out_dir = "out";
  std::uint64_t seed = 1;

  GridSpec grid() const;
  std::vector<double> frequency() const;
  double s0() const;  // 2 tau + 1 + n/2 + delta
  double s1() const;  // 2 tau + 2 + n + delta
};

// Built-in defaults of each subcommand.
ExperimentConfig default_config(const std::string& command);

// Keys present in text override base.  Unknown keys and type mismatches
// are errors.  Does not run validate().
ExperimentConfig parse_config(const std::string& text, const std::string& source, const ExperimentConfig& base);
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base);

// Range checks, including the ones that depend on the subcommand.
void validate_config(const ExperimentConfig& cfg, const std::string& command);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

// ceil(8 <M>), the default and minimum RK4 step count for paracomposition checks.
int min_transport_steps(int M);

}  // namespace paratorus
