#include "support.hpp"

#include "paratorus/reduce_matrix.hpp"

#include <doctest.h>

using namespace paratorus;
using namespace testing_support;

namespace {

MatrixReductionProblem scalar_problem(double eps) {
  const GridSpec s = GridSpec::make(1, 16);
  MatrixReductionProblem pb;
  pb.omega = {1.0};
  pb.A = sample(s, Shape::mat(1, 1), [&](const double* x, double* o) { o[0] = eps * std::sin(x[0]); }, Parity::odd);
  pb.params.tau = 1.5;
  return pb;
}

MatrixReductionProblem dense_problem(double size, std::uint64_t seed) {
  const GridSpec s = GridSpec::make(2, 8);
  MatrixReductionProblem pb;
  pb.omega = {1.0, std::sqrt(2.0)};
  TorusField A = rnd(s, Shape::mat(2, 2), Parity::odd, seed, 1.0, 3, 0.5);
  A *= size / sobolev_norm(A, pb.s0);
  pb.A = A;
  return pb;
}

}  // namespace

TEST_CASE("zero input gives zero solution in one step") {
  MatrixReductionProblem pb = scalar_problem(0.0);
  const MatrixReduction r = matred_solve(pb);
  CHECK(r.report.iterations == 1);
  CHECK(max_abs_coeff(r.U) == 0.0);
  CHECK(matred_residual(pb.omega, pb.A, r.U, pb.s0) == 0.0);
  CHECK(max_abs_coeff(matred_oracle(pb.omega, pb.A)) == 0.0);
}

TEST_CASE("scalar exponential solution") {
  const double eps = 1e-2;
  MatrixReductionProblem pb = scalar_problem(eps);
  const MatrixReduction r = matred_solve(pb);
  const TorusField expo =
      sample(pb.A.spec, Shape::mat(1, 1), [&](const double* x, double* o) { o[0] = std::exp(-eps * std::cos(x[0])) - 1.0; });
  // the fixed point is the zero-average member of the solution family
  CHECK(sobolev_distance(r.U, matred_zero_average_gauge(expo), pb.s0) < 1e-8);
  CHECK(sobolev_distance(matred_oracle(pb.omega, pb.A), matred_zero_average_gauge(expo), pb.s0) < 1e-10);
  CHECK(matred_residual(pb.omega, pb.A, expo, pb.s0) < 1e-9);
  CHECK(r.U.parity == Parity::even);
  CHECK(parity_defect(r.U) < 1e-15);
}

TEST_CASE("dense oracle agreement and residual") {
  MatrixReductionProblem pb = dense_problem(1e-3, 3);
  const MatrixReduction r = matred_solve(pb);
  CHECK(r.report.converged);
  CHECK(matred_residual(pb.omega, pb.A, r.U, pb.s0) <= 1e-9);
  CHECK(sobolev_distance(r.U, matred_oracle(pb.omega, pb.A), pb.s0) <= 1e-8);
  for (double q : r.report.ratios) CHECK(q < 0.95);
}

TEST_CASE("residual sensitivity") {
  MatrixReductionProblem pb = dense_problem(1e-3, 4);
  const TorusField U = matred_oracle(pb.omega, pb.A);
  CHECK(matred_residual(pb.omega, pb.A, U, pb.s0) <= 1e-9);
  const TorusField noise = rnd(pb.A.spec, pb.A.shape, Parity::even, 5, 1e-3, 8, 0.0);
  CHECK(matred_residual(pb.omega, pb.A, U + noise, pb.s0) >= 1e-4);
}

TEST_CASE("conjugation identity") {
  MatrixReductionProblem pb = dense_problem(1e-3, 6);
  pb.tol = 1e-13;
  const MatrixReduction r = matred_solve(pb);
  for (int k = 0; k < 20; ++k) {
    const TorusField v = rnd(pb.A.spec, Shape::vec(2), Parity::none, 100 + k, 1.0, 3, 0.5);
    const TorusField d = matred_conjugation_defect(pb.omega, pb.A, r.U, v);
    CHECK(sobolev_norm(d, 0.0) <= 10.0 * 1e-9 * sobolev_norm(v, 1.0));
  }
}

TEST_CASE("linear scaling in A") {
  MatrixReductionProblem a = dense_problem(1e-4, 7), b = a;
  b.A *= 2.0;
  const double ra = sobolev_norm(matred_solve(a).U, a.s0), rb = sobolev_norm(matred_solve(b).U, b.s0);
  CHECK(rb / ra > 1.5);
  CHECK(rb / ra < 2.5);
}

TEST_CASE("non-contraction is reported") {
  MatrixReductionProblem pb = dense_problem(5.0, 8);
  pb.omega = {1.0, 0.5};
  CHECK_THROWS_AS(matred_solve(pb), SolverError);
}

TEST_CASE("resonant frequency makes the oracle singular or flags infeasible") {
  MatrixReductionProblem pb = dense_problem(1e-3, 9);
  pb.omega = {1.0, 0.0};
  CHECK_THROWS_AS(matred_oracle(pb.omega, 0.0 * pb.A), DomainError);
  const MatrixReduction r = matred_solve(pb);
  REQUIRE(r.report.feasible.has_value());
  CHECK_FALSE(*r.report.feasible);
}

TEST_CASE("shape checks") {
  MatrixReductionProblem pb = dense_problem(1e-3, 10);
  pb.A = TorusField(pb.A.spec, Shape::vec(2), Parity::odd);
  CHECK_THROWS_AS(matred_solve(pb), ShapeError);
}
