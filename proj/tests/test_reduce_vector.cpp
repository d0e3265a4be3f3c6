#include "support.hpp"

#include "paratorus/reduce_vector.hpp"

#include <doctest.h>

using namespace paratorus;
using namespace testing_support;

namespace {

StraighteningProblem cosine_problem(double a, int M = 16) {
  const GridSpec s = GridSpec::make(1, M);
  StraighteningProblem pb;
  pb.omega = {1.0};
  pb.X = sample(s, Shape::vec(1), [&](const double* x, double* o) { o[0] = a * std::cos(x[0]); }, Parity::even);
  return pb;
}

StraighteningProblem random_problem(double size, std::uint64_t seed) {
  const GridSpec s = GridSpec::make(2, 16);
  StraighteningProblem pb;
  pb.omega = {1.0, std::sqrt(2.0)};
  TorusField X = rnd(s, Shape::vec(2), Parity::even, seed, 1.0, 3, 0.5);
  X *= size / sobolev_norm(X, 0.0);
  pb.X = X;
  return pb;
}

}  // namespace

TEST_CASE("zero field") {
  StraighteningProblem pb = random_problem(1.0, 1);
  pb.X *= 0.0;
  const ModifiedSolution m = modified_solve(pb.omega, pb);
  CHECK(m.report.iterations == 1);
  CHECK(max_abs_coeff(m.theta) == 0.0);
  CHECK(m.lambda == std::vector<double>{0.0, 0.0});
  const StraighteningResult r = straighten(pb);
  CHECK(r.h == std::vector<double>{0.0, 0.0});
  CHECK(max_abs_coeff(r.eta.theta) == 0.0);
  CHECK(straighten_residual(pb.omega, r.h, r.eta.theta, pb.X, pb.s1) == 0.0);
}

TEST_CASE("constant field is absorbed by the counterterm") {
  StraighteningProblem pb = random_problem(1.0, 2);
  const std::vector<double> c{0.01, -0.02};
  pb.X = TorusField::constant(pb.X.spec, Shape::vec(2), {c[0], c[1]});
  pb.X.parity = Parity::even;
  const ModifiedSolution m = modified_solve({0.9, 1.3}, pb);
  CHECK(max_abs_coeff(m.theta) < 1e-15);
  CHECK(std::abs(m.lambda[0] - c[0]) < 1e-15);
  CHECK(std::abs(m.lambda[1] - c[1]) < 1e-15);
  const ShiftResult sh = shift_invert(pb);
  CHECK(std::abs(sh.h[0] - c[0]) < 1e-14);
  CHECK(std::abs(sh.h[1] - c[1]) < 1e-14);
}

TEST_CASE("rotation number of a circle flow") {
  // frequency of x' = 1 + a cos x is 2 pi / int dx / (1 + a cos x) = sqrt(1 - a^2)
  const double a = 0.05;
  StraighteningProblem pb = cosine_problem(a);
  pb.s1 = 5.1;
  const StraighteningResult r = straighten(pb);
  CHECK(std::abs(1.0 + r.h[0] - std::sqrt(1.0 - a * a)) < 1e-6);
  CHECK(r.report.residuals.at("conjugacy") < 1e-10);
  CHECK(r.eta.theta.parity == Parity::odd);
  CHECK(parity_defect(r.eta.theta) < 1e-15);
}

TEST_CASE("n = 2 conjugacy, inverse and shift equation") {
  StraighteningProblem pb = random_problem(1e-3, 3);
  const StraighteningResult r = straighten(pb);
  REQUIRE(r.report.feasible.has_value());
  CHECK(*r.report.feasible);
  CHECK(r.report.residuals.at("conjugacy") <= 1e-7);
  CHECK(r.report.residuals.at("eta_chi") <= 1e-8);
  CHECK(r.report.residuals.at("shift_equation") <= 1e-9);
  REQUIRE(r.chi.has_value());
  for (double q : r.report.ratios) CHECK(q < 0.5);

  // the average of the multiplier input vanishes by construction of lambda
  const ExtendedInverse L(pb.X.spec, {pb.omega[0] + r.h[0], pb.omega[1] + r.h[1]}, pb.params);
  const ModifiedStep st = modified_map(pb.X, r.eta.theta, L, L.omega());
  CHECK(std::abs(st.lambda[0] - r.lambda[0]) < 1e-12);
  CHECK(sobolev_distance(st.theta, r.eta.theta, pb.s1) < 1e-10);
}

TEST_CASE("residual sensitivity") {
  StraighteningProblem pb = random_problem(1e-3, 4);
  const StraighteningResult r = straighten(pb);
  const TorusField noise = rnd(pb.X.spec, Shape::vec(2), Parity::odd, 5, 1e-3, 16, 0.0);
  CHECK(straighten_residual(pb.omega, r.h, r.eta.theta + noise, pb.X, pb.s1) >= 1e-4);
}

TEST_CASE("determinism") {
  StraighteningProblem pb = random_problem(1e-3, 6);
  const StraighteningResult a = straighten(pb), b = straighten(pb);
  CHECK(a.h == b.h);
  CHECK(a.eta.theta.c == b.eta.theta.c);
}

TEST_CASE("h is lipschitz in omega") {
  StraighteningProblem pb = random_problem(1e-3, 7);
  pb.compute_inverse = false;
  const StraighteningResult a = straighten(pb);
  StraighteningProblem pb2 = pb;
  pb2.omega[0] += 1e-3;
  pb2.omega[1] -= 5e-4;
  const StraighteningResult b = straighten(pb2);
  const double dh = std::hypot(a.h[0] - b.h[0], a.h[1] - b.h[1]);
  const double dw = std::hypot(1e-3, 5e-4);
  CHECK(dh / dw <= 0.5);
}

TEST_CASE("shape errors") {
  StraighteningProblem pb = random_problem(1e-3, 8);
  pb.omega = {1.0};
  CHECK_THROWS_AS(shift_invert(pb), ShapeError);
}
