#include "paratorus/reduce_matrix.hpp"

#include "paratorus/field_ops.hpp"
#include "paratorus/paracalculus.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace paratorus {

namespace {

TorusField plus_identity(const TorusField& U) {
  TorusField m = U;
  m.add_identity(1.0);
  m.parity = U.parity;
  return m;
}

TorusField remainder_with(const TorusField& U, const TorusField& IpU, const TorusField& Inv,
                          const std::vector<double>& omega) {
  const TorusField dU = directional_derivative(U, omega);
  TorusField a = paraproduct(IpU, paraproduct(Inv, dU));
  a -= dU;
  const TorusField c = multiply(dU, Inv);
  const TorusField b = multiply(Inv, c);
  TorusField r2 = paraproduct(IpU, paraproduct(b, U));
  r2 -= paraproduct(c, U);
  a -= r2;
  a.parity = parity_flip(U.parity);
  return a;
}

}  // namespace

TorusField matred_remainder(const TorusField& U, const std::vector<double>& omega) {
  const TorusField IpU = plus_identity(U);
  return remainder_with(U, IpU, pointwise_inverse(IpU), omega);
}

TorusField matred_map(const TorusField& A, const TorusField& U, const ExtendedInverse& L,
                      const std::vector<double>& omega) {
  if (!A.shape.square() || A.shape != U.shape) throw ShapeError("matred: A and U must be N x N");
  const TorusField IpU = plus_identity(U);
  const TorusField Inv = pointwise_inverse(IpU);
  TorusField rhs = paraproduct(IpU, A, Side::right);
  rhs += pm_remainder(A, U, Side::left);
  rhs += remainder_with(U, IpU, Inv, omega);
  rhs.parity = A.parity == Parity::odd && U.parity == Parity::even ? Parity::odd : Parity::none;
  const TorusField g = neumann_inverse(Paraproduct(U), rhs);
  const TorusField v = L.apply(g);
  TorusField w = Inv;
  w.add_identity(-1.0);
  TorusField out = neumann_inverse(Paraproduct(w), v);
  out.parity = parity_flip(rhs.parity);
  return out;
}

MatrixReduction matred_solve(const MatrixReductionProblem& pb, const TorusField* warm_start) {
  const TorusField& A = pb.A;
  if (!A.shape.square()) throw ShapeError("matred_solve: A must be square");
  const ExtendedInverse L(A.spec, pb.omega, pb.params);
  TorusField U0 = warm_start ? *warm_start : TorusField(A.spec, A.shape, Parity::even);
  if (A.parity == Parity::odd) U0.parity = Parity::even;
  FixedPointOptions opt;
  opt.tol = pb.tol;
  opt.max_iter = pb.max_iter;
  opt.ratio_guard = pb.ratio_guard;
  opt.noise_floor = pb.noise_floor;
  opt.stage = "matred";
  const double s0 = pb.s0;
  std::function<TorusField(const TorusField&)> map = [&](const TorusField& U) {
    return matred_map(A, U, L, pb.omega);
  };
  std::function<double(const TorusField&, const TorusField&)> dist = [s0](const TorusField& a, const TorusField& b) {
    return sobolev_distance(a, b, s0);
  };
  MatrixReduction out;
  out.U = fixed_point_solve<TorusField>(map, U0, dist, opt, &out.report);
  out.report.residuals["equation"] = matred_residual(pb.omega, A, out.U, s0);
  out.report.residuals["parity_defect"] = parity_defect(out.U);
  out.report.residuals["clamped_modes"] = static_cast<double>(L.clamped_count());
  out.report.feasible = L.exact();
  return out;
}

double matred_residual(const std::vector<double>& omega, const TorusField& A, const TorusField& U, double s) {
  TorusField r = directional_derivative(U, omega);
  r -= multiply(A, plus_identity(U));
  return sobolev_norm(r, s);
}

TorusField matred_oracle(const std::vector<double>& omega, const TorusField& A) {
  const GridSpec& spec = A.spec;
  const int n = spec.n, N = A.shape.rows;
  if (!A.shape.square()) throw ShapeError("matred_oracle: A must be square");
  const auto& t = tables(spec);
  const std::size_t L = spec.lattice_size(), z = L / 2;
  // Unknown ordering: (row k, lattice index without zero).
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < L; ++i)
    if (i != z) idx.push_back(i);
  const std::size_t m = idx.size(), dim = m * N;
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd rhs(dim, N);
  std::vector<int> diff(n);
  for (std::size_t a = 0; a < m; ++a) {
    const int* xi = t.point(idx[a]);
    double w = 0.0;
    for (int d = 0; d < n; ++d) w += omega[d] * xi[d];
    for (int r = 0; r < N; ++r) {
      const std::size_t row = r * m + a;
      K(row, row) += cplx(0.0, w);
      for (std::size_t b = 0; b < m; ++b) {
        const int* eta = t.point(idx[b]);
        for (int d = 0; d < n; ++d) diff[d] = xi[d] - eta[d];
        if (!t.in_lattice(diff.data())) continue;
        const std::size_t j = t.index_of(diff.data());
        for (int k = 0; k < N; ++k) K(row, k * m + b) -= A.at(r * N + k, j);
      }
      for (int c = 0; c < N; ++c) rhs(row, c) = A.at(r * N + c, idx[a]);
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(K);
  const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
  // rcond alone misses exactly singular systems
  if (!(piv.minCoeff() > 1e-14 * piv.maxCoeff()) || !(lu.rcond() > 1e-14))
    throw DomainError("matred_oracle: singular Galerkin system (resonant omega?)");
  const Eigen::MatrixXcd sol = lu.solve(rhs);
  TorusField U(spec, A.shape, A.parity == Parity::odd ? Parity::even : Parity::none);
  for (std::size_t a = 0; a < m; ++a)
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) U.at(r * N + c, idx[a]) = sol(r * m + a, c);
  return U;
}

TorusField matred_conjugation_defect(const std::vector<double>& omega, const TorusField& A, const TorusField& U,
                                     const TorusField& v) {
  const TorusField IpU = plus_identity(U);
  const TorusField w = multiply(IpU, v);
  TorusField inner = directional_derivative(w, omega);
  inner -= multiply(A, w);
  TorusField out = multiply(pointwise_inverse(IpU), inner);
  out -= directional_derivative(v, omega);
  return out;
}

TorusField matred_zero_average_gauge(const TorusField& U) {
  const int N = U.shape.rows;
  const std::vector<cplx> avg = average(U);
  Eigen::MatrixXcd M(N, N);
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) M(r, c) = (r == c ? 1.0 : 0.0) + avg[r * N + c];
  const Eigen::MatrixXcd C = M.inverse();
  TorusField out(U.spec, U.shape, U.parity);
  const std::size_t L = U.L(), z = U.zero_index();
  for (std::size_t i = 0; i < L; ++i) {
    if (i == z) continue;
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) {
        cplx s = 0.0;
        for (int k = 0; k < N; ++k) s += U.at(r * N + k, i) * C(k, c);
        out.at(r * N + c, i) = s;
      }
  }
  return out;
}

}  // namespace paratorus
