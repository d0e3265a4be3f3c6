#pragma once

#include "paratorus/fft.hpp"
#include "paratorus/grid.hpp"

#include <functional>
#include <vector>

namespace paratorus {

// Build a field by sampling fn(x, out) on the grid (out has shape.comps()
// real entries) and truncating to the lattice.
using PointFn = std::function<void(const double* x, double* out)>;
TorusField sample(const GridSpec& spec, Shape shape, const PointFn& fn, Parity parity = Parity::none);

// Littlewood-Paley block Delta_j (zero for j outside 0..J) and low part S_j.
TorusField lp_block(const TorusField& u, int j);
TorusField lp_low(const TorusField& u, int j);

double sobolev_norm(const TorusField& u, double s);
double sobolev_distance(const TorusField& a, const TorusField& b, double s);
double holder_norm(const TorusField& u, double r);
double grid_mean_square(const TorusField& u);  // mean over the grid of |u|^2
double max_abs_coeff(const TorusField& u);

// d/dx_k, the Jacobian (rows = components of a column field, cols = n),
// and omega . grad applied componentwise.
TorusField partial(const TorusField& u, int k);
TorusField jacobian(const TorusField& u);
TorusField directional_derivative(const TorusField& u, const std::vector<double>& omega);

TorusField parity_project(const TorusField& u, Parity p);
// Largest coefficient violating the declared parity (0 for Parity::none).
double parity_defect(const TorusField& u);
std::vector<cplx> average(const TorusField& u);
TorusField subtract_average(const TorusField& u);

// Pointwise matrix product of grid samples (scalars broadcast).
GridValues grid_multiply(const GridValues& a, const GridValues& b);
// Pointwise inverse of square matrix samples.
GridValues grid_inverse(const GridValues& a);
// Dealiased product and pointwise inverse of fields.
TorusField multiply(const TorusField& a, const TorusField& b);
TorusField pointwise_inverse(const TorusField& a);
TorusField transpose(const TorusField& a);
TorusField scalar_times_identity(const TorusField& s, int N);

// Direct summation of the truncated series at arbitrary points (row-major
// n-vectors).  Result: comps x npoints values.
std::vector<cplx> evaluate_at(const TorusField& u, const std::vector<double>& points);
// Same sum, plain serial loop; kept as a reference for the parallel kernel.
std::vector<cplx> evaluate_at_serial(const TorusField& u, const std::vector<double>& points);

// f(x + theta(x)) on the grid, re-truncated.  theta is an n-vector field.
// Uses Taylor sums about the grid nodes when theta is small enough for a
// tail bound below round-off, direct summation otherwise.
TorusField compose_displacement(const TorusField& f, const TorusField& theta);
TorusField compose_displacement_direct(const TorusField& f, const TorusField& theta);

// Values of f (or d_k f) at x_g + d_g, one displacement per grid node, from
// the Taylor series about the nodes.  The order is picked from a bound
// dmax >= |d_g|_inf so that the tail is below 1e-17 sum |f^(xi)|.
class TaylorEvaluator {
 public:
  TaylorEvaluator(const TorusField& f, double dmax, bool with_gradient = false);
  // Order needed for this bound, or -1 when direct summation is cheaper.
  static int order_for(const GridSpec& spec, double dmax, bool with_gradient);

  double dmax() const { return dmax_; }
  int order() const { return K_; }
  // disp: P x n row-major.  deriv = -1 for f itself, k for d_k f.
  // out: comps x P, component-major.
  void evaluate(const std::vector<double>& disp, int deriv, std::vector<cplx>& out) const;

 private:
  GridSpec spec_;
  int comps_ = 1;
  int K_ = 0;
  double dmax_ = 0.0;
  bool grad_ = false;
  std::vector<std::vector<int>> alphas_;
  std::vector<double> inv_fact_;
  std::vector<std::vector<int>> shift_;  // shift_[k][a]: index of alpha_a + e_k (or -1)
  std::vector<GridValues> samples_;
};

// sup-norm bound sum |u^(xi)| for each component, maximized over components.
double l1_coeff_bound(const TorusField& u);

// Points x_g + theta(x_g) for all grid nodes (row-major), real parts only.
std::vector<double> displaced_grid(const TorusField& theta);

}  // namespace paratorus
