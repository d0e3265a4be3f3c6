#pragma once

#include "paratorus/fixed_point.hpp"
#include "paratorus/grid.hpp"
#include "paratorus/paraflow.hpp"
#include "paratorus/small_divisor.hpp"

#include <optional>
#include <vector>

namespace paratorus {

// Straighten omega + X (X an even n-vector field) to a parallel field omega + h.
struct StraighteningProblem {
  std::vector<double> omega;
  TorusField X;
  DioParams params;
  double s1 = 7.1;
  double tol = 1e-12;        // inner fixed point, H^{s1} step size
  int max_iter = 60;
  double ratio_guard = 0.95;
  double noise_floor = 1e-13;
  double shift_tol = 1e-13;  // |h_{k+1} - h_k|
  int shift_max_iter = 60;
  double shift_guard = 0.5;
  bool compute_inverse = true;
};

struct ModifiedSolution {
  TorusField theta;
  std::vector<double> lambda;
  SolveReport report;
};

struct ModifiedStep {
  TorusField theta;
  std::vector<double> lambda;
};
// One application of the fixed-point map at frequency omega_bar.
ModifiedStep modified_map(const TorusField& X, const TorusField& theta, const ExtendedInverse& L,
                          const std::vector<double>& omega_bar);

ModifiedSolution modified_solve(const std::vector<double>& omega_bar, const StraighteningProblem& pb,
                                const TorusField* warm_start = nullptr);

struct ShiftResult {
  std::vector<double> h;
  std::vector<std::vector<double>> lambda_path;
  ModifiedSolution inner;  // modified solve at the last evaluated frequency
  SolveReport report;
};
ShiftResult shift_invert(const StraighteningProblem& pb, const TorusField* warm_start = nullptr,
                         const std::vector<double>* h0 = nullptr);

struct StraighteningResult {
  std::vector<double> h;
  Diffeo eta;
  std::optional<Diffeo> chi;  // eta^{-1}, when requested
  std::vector<std::vector<double>> lambda_path;
  std::vector<double> lambda;  // lambda(omega + h)
  SolveReport report;
};

StraighteningResult straighten(const StraighteningProblem& pb, const TorusField* warm_theta = nullptr,
                               const std::vector<double>* warm_h = nullptr);

// |(omega + h) . d theta - (X o eta - h)|_{H^s}.
double straighten_residual(const std::vector<double>& omega, const std::vector<double>& h, const TorusField& theta,
                           const TorusField& X, double s);

// |omega_bar . d theta - (X o eta - lambda)|_{H^s} for the modified problem.
double modified_residual(const std::vector<double>& omega_bar, const std::vector<double>& lambda,
                         const TorusField& theta, const TorusField& X, double s);

}  // namespace paratorus
