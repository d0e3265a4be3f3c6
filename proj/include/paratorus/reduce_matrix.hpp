#pragma once

#include "paratorus/fixed_point.hpp"
#include "paratorus/grid.hpp"
#include "paratorus/small_divisor.hpp"

#include <vector>

namespace paratorus {

// Solve omega . dU = A (I + U) for an odd N x N field A.
struct MatrixReductionProblem {
  std::vector<double> omega;
  TorusField A;
  DioParams params;
  double s0 = 5.1;
  double tol = 1e-12;
  int max_iter = 60;
  double ratio_guard = 0.95;
  double noise_floor = 1e-13;
};

struct MatrixReduction {
  TorusField U;
  SolveReport report;
};

// One application of the parahomological fixed-point map.
TorusField matred_map(const TorusField& A, const TorusField& U, const ExtendedInverse& L,
                      const std::vector<double>& omega);
// Paradifferential remainder produced when d_omega is moved through T_{I+U} and T_{(I+U)^-1}.
TorusField matred_remainder(const TorusField& U, const std::vector<double>& omega);

MatrixReduction matred_solve(const MatrixReductionProblem& pb, const TorusField* warm_start = nullptr);

// |omega . dU - A (I + U)|_{H^s} with the dealiased product.
double matred_residual(const std::vector<double>& omega, const TorusField& A, const TorusField& U, double s);

// Dense Galerkin solve of omega . dU - A U = A with U^(0) = 0 (the xi = 0 row is dropped).
TorusField matred_oracle(const std::vector<double>& omega, const TorusField& A);

// (I+U)^{-1} (d_omega - A)((I+U) v) - d_omega v for a test field v (N x 1 or N x N).
TorusField matred_conjugation_defect(const std::vector<double>& omega, const TorusField& A, const TorusField& U,
                                     const TorusField& v);

// Rescale a solution to zero average: (I+U) C - I with C = (I + Avg U)^{-1}.
TorusField matred_zero_average_gauge(const TorusField& U);

}  // namespace paratorus
