#pragma once

#include "paratorus/config.hpp"
#include "paratorus/paraflow.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace paratorus {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3 };

const std::vector<std::string>& experiment_commands();

struct RunOptions {
  std::optional<std::string> out_dir;  // overrides output.dir
  std::optional<std::uint64_t> seed;   // overrides seed
  int threads = 0;                     // 0 leaves the OpenMP default
  int symbolic_r = 2;                  // expansion order for calculus-check
};

// Validates, runs and writes the artifacts of one subcommand.  Nothing is
// written when the configuration is rejected.
int run_experiment(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log);

// Least-squares slope of log y against log x.
double fit_exponent(const std::vector<double>& x, const std::vector<double>& y);

// Remainder ratios on plane waves e^{i K x_1}:
//   pm, cm, plr: |R u|_{H^{s+1}} / |u|_{H^s};  conj: |D u|_{H^s} / |u|_{H^{s+1}}
// with the fixed coefficients a = 1/(2 - cos x_1), b = e^{sin x_1} and the
// transport symbol i (1 + 0.3 cos x_1, 1, ..).xi + a.
struct SmoothingFits {
  std::vector<int> K;
  std::vector<double> pm, cm, plr, conj;
  double exp_pm = 0.0, exp_cm = 0.0, exp_plr = 0.0, exp_conj = 0.0;
  double max_exponent() const;
};
SmoothingFits smoothing_fits(const Diffeo& chi, const Paracomposition& pc, const std::vector<int>& Ks, double s);

}  // namespace paratorus
