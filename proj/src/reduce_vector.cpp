#include "paratorus/reduce_vector.hpp"

#include "paratorus/field_ops.hpp"
#include "paratorus/paracalculus.hpp"

#include <algorithm>
#include <cmath>

namespace paratorus {

namespace {

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// X o eta - T_{X' o eta} theta, which equals eta^* X plus the refined
// paralinearization remainder by definition of the latter.
TorusField composed_forcing(const TorusField& X, const TorusField& theta) {
  TorusField v = compose_displacement(X, theta);
  TorusField t = paraproduct(compose_displacement(jacobian(X), theta), theta, Side::left);
  v -= t;
  v.parity = X.parity == Parity::even && theta.parity == Parity::odd ? Parity::even : Parity::none;
  return v;
}

}  // namespace

ModifiedStep modified_map(const TorusField& X, const TorusField& theta, const ExtendedInverse& L,
                          const std::vector<double>& omega_bar) {
  const int n = X.spec.n;
  if (X.shape != Shape::vec(n) || theta.shape != Shape::vec(n))
    throw ShapeError("modified_map: X and theta must be n-vector fields");
  const TorusField dtheta = jacobian(theta);
  TorusField A = dtheta;
  A.add_identity(1.0);
  A.parity = dtheta.parity;
  const TorusField Ainv = pointwise_inverse(A);
  const TorusField Dtheta = directional_derivative(theta, omega_bar);
  const TorusField B = multiply(directional_derivative(dtheta, omega_bar), Ainv);

  // R_1 = (T_A T_{A^-1} - 1) D theta - (T_A T_{A^-1 B} - T_B) theta
  TorusField r1 = paraproduct(A, paraproduct(Ainv, Dtheta));
  r1 -= Dtheta;
  TorusField r2 = paraproduct(A, paraproduct(multiply(Ainv, B), theta));
  r2 -= paraproduct(B, theta);
  r1 -= r2;

  TorusField rhs = composed_forcing(X, theta);
  rhs += r1;
  rhs.parity = X.parity == Parity::even && theta.parity == Parity::odd ? Parity::even : Parity::none;
  TorusField g = neumann_inverse(Paraproduct(dtheta), rhs);

  ModifiedStep out;
  const std::size_t z = g.zero_index();
  out.lambda.resize(n);
  for (int d = 0; d < n; ++d) {
    out.lambda[d] = g.at(d, z).real();
    g.at(d, z) = 0.0;
  }
  const TorusField v = L.apply(g);
  TorusField w = Ainv;
  w.add_identity(-1.0);
  out.theta = neumann_inverse(Paraproduct(w), v);
  out.theta.parity = parity_flip(g.parity);
  return out;
}

ModifiedSolution modified_solve(const std::vector<double>& omega_bar, const StraighteningProblem& pb,
                                const TorusField* warm_start) {
  const TorusField& X = pb.X;
  const ExtendedInverse L(X.spec, omega_bar, pb.params);
  TorusField t0 = warm_start ? *warm_start : TorusField(X.spec, X.shape, Parity::odd);
  if (X.parity == Parity::even) t0.parity = Parity::odd;
  std::vector<double> lambda;
  FixedPointOptions opt;
  opt.tol = pb.tol;
  opt.max_iter = pb.max_iter;
  opt.ratio_guard = pb.ratio_guard;
  opt.noise_floor = pb.noise_floor;
  opt.stage = "straighten";
  const double s1 = pb.s1;
  std::function<TorusField(const TorusField&)> map = [&](const TorusField& th) {
    ModifiedStep s = modified_map(X, th, L, omega_bar);
    lambda = s.lambda;
    return s.theta;
  };
  std::function<double(const TorusField&, const TorusField&)> dist = [s1](const TorusField& a, const TorusField& b) {
    return sobolev_distance(a, b, s1);
  };
  ModifiedSolution out;
  out.theta = fixed_point_solve<TorusField>(map, t0, dist, opt, &out.report);
  out.lambda = lambda;
  out.report.feasible = L.exact();
  return out;
}

ShiftResult shift_invert(const StraighteningProblem& pb, const TorusField* warm_start, const std::vector<double>* h0) {
  const int n = pb.X.spec.n;
  if (static_cast<int>(pb.omega.size()) != n) throw ShapeError("shift_invert: omega has wrong length");
  ShiftResult res;
  std::vector<double> h(n, 0.0);
  if (h0) {
    h = *h0;
  } else {
    const std::size_t z = pb.X.zero_index();
    for (int d = 0; d < n; ++d) h[d] = pb.X.at(d, z).real();
  }
  TorusField warm = warm_start ? *warm_start : TorusField(pb.X.spec, pb.X.shape, Parity::odd);
  int inner_iters = 0;
  std::function<std::vector<double>(const std::vector<double>&)> map = [&](const std::vector<double>& hk) {
    ModifiedSolution m = modified_solve(add(pb.omega, hk), pb, &warm);
    warm = m.theta;
    inner_iters += m.report.iterations;
    res.lambda_path.push_back(m.lambda);
    res.inner = std::move(m);
    return res.inner.lambda;
  };
  std::function<double(const std::vector<double>&, const std::vector<double>&)> dist =
      [](const std::vector<double>& a, const std::vector<double>& b) { return max_diff(a, b); };
  FixedPointOptions opt;
  opt.tol = pb.shift_tol;
  opt.max_iter = pb.shift_max_iter;
  opt.ratio_guard = pb.shift_guard;
  opt.noise_floor = 1e-14;
  opt.stage = "shift-invert";
  res.h = fixed_point_solve<std::vector<double>>(map, h, dist, opt, &res.report);
  res.report.residuals["inner_iterations"] = inner_iters;
  return res;
}

StraighteningResult straighten(const StraighteningProblem& pb, const TorusField* warm_theta,
                               const std::vector<double>* warm_h) {
  const int n = pb.X.spec.n;
  StraighteningResult out;
  ShiftResult sh = shift_invert(pb, warm_theta, warm_h);
  out.h = sh.h;
  out.lambda_path = sh.lambda_path;
  const std::vector<double> wbar = add(pb.omega, out.h);
  ModifiedSolution fin = modified_solve(wbar, pb, &sh.inner.theta);
  out.lambda = fin.lambda;
  out.eta = Diffeo::make(fin.theta, false);
  if (pb.compute_inverse) {
    out.eta.inverse_theta = invert_displacement(fin.theta);
    Diffeo chi;
    chi.theta = *out.eta.inverse_theta;
    chi.inverse_theta = fin.theta;
    chi.lip = jacobian_sup(chi.theta);
    out.chi = chi;
  }
  out.report = sh.report;
  out.report.stage = "straighten";
  out.report.residuals["inner_iterations_final"] = fin.report.iterations;
  double shift_eq = 0.0;
  for (int d = 0; d < n; ++d) shift_eq = std::max(shift_eq, std::abs(out.h[d] - fin.lambda[d]));
  out.report.residuals["shift_equation"] = shift_eq;
  out.report.residuals["conjugacy"] = straighten_residual(pb.omega, out.h, fin.theta, pb.X, pb.s1);
  if (out.chi) out.report.residuals["eta_chi"] = out.eta.inverse_residual();
  out.report.residuals["parity_defect"] = parity_defect(fin.theta);
  DioParams lattice = pb.params;
  out.report.feasible = dio_check(wbar, lattice);
  return out;
}

double modified_residual(const std::vector<double>& omega_bar, const std::vector<double>& lambda,
                         const TorusField& theta, const TorusField& X, double s) {
  TorusField r = directional_derivative(theta, omega_bar);
  r -= compose_displacement(X, theta);
  const std::size_t z = r.zero_index();
  for (int d = 0; d < X.spec.n; ++d) r.at(d, z) += lambda[d];
  return sobolev_norm(r, s);
}

double straighten_residual(const std::vector<double>& omega, const std::vector<double>& h, const TorusField& theta,
                           const TorusField& X, double s) {
  return modified_residual(add(omega, h), h, theta, X, s);
}

}  // namespace paratorus
