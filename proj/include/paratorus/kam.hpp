#pragma once

#include "paratorus/fixed_point.hpp"
#include "paratorus/grid.hpp"
#include "paratorus/paracalculus.hpp"
#include "paratorus/paraflow.hpp"
#include "paratorus/reduce_matrix.hpp"
#include "paratorus/reduce_vector.hpp"
#include "paratorus/small_divisor.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace paratorus {

struct KamOptions {
  double tol = 1e-10;          // outer step |u_{k+1} - u_k| in the distance norm
  // Sobolev index of that distance; < 0 means s.  H^s steps stall at
  // round-off (~1e-7 at M = 16) so the default is a low index.
  double dist_index = 4.0;
  int max_iter = 50;
  double ratio_guard = 0.9;
  double noise_floor = 0.0;
  int steps = 16;              // paracomposition RK4 steps
  double straighten_tol = 1e-12;
  double straighten_noise = 1e-13;
  double matred_tol = 1e-12;
  double matred_noise = 1e-13;
  double inverse_tol = 1e-14;  // paracomposition inversion, relative
  bool compute_chi = true;     // Newton inverse of eta at the end
};

// (omega + eps X(x,u)) . grad u + eps F(x,u) = eps f for u: T^n -> R^N.
// X: (x, z) -> R^n even in x; F: (x, z) -> R^N odd in x with F(x, 0) = 0; f odd.
struct HyperbolicProblem {
  int n = 1;
  int N = 1;
  NonlinearMap X;
  NonlinearMap F;
  TorusField f;
  double eps = 0.0;
  DioParams params;
  double s = 12.5;
  KamOptions opt;

  const GridSpec& spec() const { return f.spec; }
  // Shape and parity checks, including point samples of X and F.  Throws DomainError.
  void validate() const;
};

struct ParalinearizedEq {
  TorusField Y;  // X(x, u), even
  TorusField A;  // F'_z(x, u) + sum_j d_j u (X_j)'_z(x, u), odd
  TorusField R;  // exact remainder, odd
};
ParalinearizedEq paralinearize_eq(const HyperbolicProblem& pb, const TorusField& u);

struct ConjugationData {
  TorusField Y;
  TorusField A;
  TorusField R;
  std::vector<double> h;
  Diffeo eta;
  std::optional<Diffeo> chi;
  TorusField Aeta;  // A o eta
  TorusField U;
  std::shared_ptr<const Paracomposition> pc;  // built from eta
  SolveReport straighten_report;
  SolveReport matred_report;
};

// Warm starts are taken from prev when given.
ConjugationData conjugation_data(const HyperbolicProblem& pb, const std::vector<double>& omega, const TorusField& u,
                                 const ConjugationData* prev = nullptr, bool with_chi = false);

// y = T_{I+U}^{-1} eta^* u and its inverse u = (eta^*)^{-1} T_{I+U} y.
TorusField change_unknown(const ConjugationData& data, const TorusField& u);
TorusField invert_unknown(const ConjugationData& data, const TorusField& y, double tol = 1e-14);

// Transport symbol i(omega + eps Y).xi + eps A and its conjugate by eta.
DifferentialSymbol equation_symbol(const HyperbolicProblem& pb, const std::vector<double>& omega,
                                   const ConjugationData& data);

struct KamState {
  TorusField u;
  TorusField y;
  ConjugationData data;
  SolveReport report;
  bool feasible = false;
};

// One evaluation of the fixed-point map in the new unknown.
TorusField kam_step(const HyperbolicProblem& pb, const std::vector<double>& omega, const KamState& state);

// |(omega + h) . grad - T_q| on w and |(omega + h) . dU + eps (A o eta)(I + U)|_{H^s}.
struct DefectMonitor {
  double q_defect = 0.0;
  double u_defect = 0.0;
};
DefectMonitor defect_monitor(const HyperbolicProblem& pb, const std::vector<double>& omega, const KamState& state);

// Per-iteration trace row for CSV output.
struct KamTraceRow {
  int iteration = 0;
  double step = 0.0;
  double ratio = 0.0;
  double residual = 0.0;
  std::vector<double> h;
};

KamState kam_solve(const HyperbolicProblem& pb, const std::vector<double>& omega,
                   std::vector<KamTraceRow>* trace = nullptr);

// |(omega + eps X(x,u)) . grad u + eps F(x,u) - eps f|_{H^{s-1}}.
double pde_residual(const HyperbolicProblem& pb, const std::vector<double>& omega, const TorusField& u);
// Same quantity at an explicit Sobolev index.
double pde_residual_at(const HyperbolicProblem& pb, const std::vector<double>& omega, const TorusField& u,
                       double index);

struct ScanRow {
  std::vector<double> omega;
  std::vector<double> h;
  bool feasible = false;
  double residual = 0.0;
  std::string failure;  // stage label of a failed solve, empty otherwise
};

struct ScanTable {
  double eps = 0.0;
  double gamma = 0.0;
  std::vector<ScanRow> rows;
  double excluded_fraction() const;
};

// kam_solve at every sampled omega in B(0, R).  Failures are recorded in the
// row and count as excluded.
ScanTable feasible_set_scan(const HyperbolicProblem& pb, double R, std::size_t samples, std::uint64_t seed);

struct LadderScan {
  double a = 0.3;
  std::vector<ScanTable> rungs;
  double exponent = 0.0;  // least-squares slope of log(excluded) against log(eps)
};
// eps-ladder with gamma = eps^a; pb is rebuilt per rung by setting eps and gamma.
LadderScan feasible_ladder(const HyperbolicProblem& pb, const std::vector<double>& ladder, double a, double R,
                           std::size_t samples, std::uint64_t seed);

// Autonomous problem on T^{nu+d} for
//   d_t u + (w'' + eps X) . d_x u + eps F = eps f(w' t, x),
// X: R^{nu+d} x R^N -> R^d acts on the x block of the gradient only.
HyperbolicProblem forced_wrapper(int nu, int d, int N, const NonlinearMap& X, const NonlinearMap& F,
                                 const TorusField& f, double eps, const DioParams& params);

}  // namespace paratorus
