#include "support.hpp"

#include "paratorus/paracalculus.hpp"
#include "paratorus/symbol.hpp"

#include <doctest.h>

using namespace paratorus;
using namespace testing_support;

namespace {

NonlinearMap square_map() {
  NonlinearMap F;
  F.value = [](const double*, const double* z, double* o) { o[0] = z[0] * z[0]; };
  F.jac_z = [](const double*, const double* z, double* j) { j[0] = 2.0 * z[0]; };
  return F;
}

NonlinearMap sin_times_z() {
  NonlinearMap F;
  F.value = [](const double* x, const double* z, double* o) { o[0] = std::sin(x[0]) * z[0]; };
  F.jac_z = [](const double* x, const double*, double* j) { j[0] = std::sin(x[0]); };
  return F;
}

}  // namespace

TEST_CASE("paraproduct with a constant symbol") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField u = rnd(s, Shape::scalar_shape(), Parity::none, 1);
  const TorusField c = TorusField::constant(s, Shape::scalar_shape(), {2.5});
  CHECK(max_diff(paraproduct(c, u), 2.5 * u) < 1e-13);
  CHECK(max_abs_coeff(pm_remainder(c, subtract_average(u))) < 1e-12);
  // with a mean, T_u c keeps u^(0) c and the remainder is -c u^(0)
  const TorusField r = pm_remainder(c, u);
  CHECK(std::abs(r.at(0, r.zero_index()) + 2.5 * u.at(0, u.zero_index())) < 1e-13);
  CHECK(max_abs_coeff(subtract_average(r)) < 1e-12);
}

TEST_CASE("paraproduct of separated plane waves") {
  const GridSpec s = GridSpec::make(1, 64);
  const TorusField a = plane_wave(s, {2});
  const TorusField u = plane_wave(s, {32});
  CHECK(max_diff(paraproduct(a, u), plane_wave(s, {34})) < 1e-14);
  CHECK(max_abs_coeff(paraproduct(u, a)) < 1e-14);
}

TEST_CASE("paraproduct matches the block sum oracle") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField A = rnd(s, Shape::mat(2, 2), Parity::none, 3);
  const TorusField u = rnd(s, Shape::vec(2), Parity::none, 4);
  CHECK(max_diff(paraproduct(A, u), paraproduct_reference(A, u)) < 1e-12);
  const TorusField B = rnd(s, Shape::mat(2, 2), Parity::none, 5);
  for (Side side : {Side::left, Side::right})
    CHECK(max_diff(paraproduct(A, B, side), paraproduct_reference(A, B, side)) < 1e-12);
  CHECK_THROWS_AS(paraproduct(u, A), ShapeError);
}

TEST_CASE("paraproduct remainder") {
  const GridSpec s = GridSpec::make(1, 16);
  const TorusField e4 = plane_wave(s, {4});
  CHECK(max_abs_coeff(paraproduct(e4, e4)) < 1e-15);
  CHECK(max_diff(pm_remainder(e4, e4), plane_wave(s, {8})) < 1e-14);

  const GridSpec s2 = GridSpec::make(2, 8);
  const TorusField a = rnd(s2, Shape::scalar_shape(), Parity::none, 7);
  const TorusField u = rnd(s2, Shape::scalar_shape(), Parity::none, 8);
  CHECK(max_diff(pm_remainder(a, u), pm_remainder_diagonal(a, u)) < 1e-11);
}

TEST_CASE("paradiff quantization") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField u = rnd(s, Shape::scalar_shape(), Parity::none, 9);
  const std::vector<double> w{1.0, std::sqrt(2.0)};
  const GridSymbol d = GridSymbol::from_function(s, 1.0, [&](const double*, const int* xi) {
    return cplx(0.0, w[0] * xi[0] + w[1] * xi[1]);
  });
  CHECK(max_diff(paradiff_apply(d, u), directional_derivative(u, w)) < 1e-12);
  const GridSymbol one = GridSymbol::from_function(s, 0.0, [](const double*, const int*) { return cplx(1.0); });
  CHECK(max_diff(paradiff_apply(one, u), u) < 1e-13);
  const TorusField a = rnd(s, Shape::scalar_shape(), Parity::none, 10);
  const GridSymbol as = GridSymbol::from_field(a);
  CHECK(max_diff(paradiff_apply(as, u), paraproduct(a, u)) < 1e-12);
  CHECK(max_diff(paradiff_apply(as, u), paradiff_apply_serial(as, u)) < 1e-14);
}

TEST_CASE("cutoff") {
  const GridSpec s = GridSpec::make(1, 64);
  const auto& t = tables(s);
  for (std::size_t z = 0; z < s.lattice_size(); ++z)
    for (std::size_t e = 0; e < s.lattice_size(); e += 3) {
      const double rz = t.norm[z], re = t.norm[e];
      const double c = cutoff_chi(s, z, e);
      if (re > 0.0 && rz <= re / 16.0) CHECK(c == doctest::Approx(1.0).epsilon(1e-14));
      if (rz >= 0.5 * re) CHECK(c == 0.0);
    }
}

TEST_CASE("symbol calculus") {
  const GridSpec s = GridSpec::make(1, 8);
  const TorusField a = sample(s, Shape::scalar_shape(), [](const double* x, double* o) { o[0] = std::cos(x[0]); });
  const TorusField b = sample(s, Shape::scalar_shape(), [](const double* x, double* o) { o[0] = std::sin(2 * x[0]); });
  const GridSymbol as = GridSymbol::from_field(a), bs = GridSymbol::from_field(b);
  const GridSymbol ab = GridSymbol::from_field(multiply(a, b));
  GridSymbol d = symbol_sharp(as, bs, 1);
  d -= ab;
  double m = 0.0;
  for (const cplx& z : d.values) m = std::max(m, std::abs(z));
  CHECK(m < 1e-13);

  // i w xi # b = i w xi b + w b'
  const double w = 1.7;
  const GridSymbol p = GridSymbol::from_function(s, 1.0, [&](const double*, const int* xi) { return cplx(0, w * xi[0]); });
  GridSymbol q = symbol_sharp(p, bs, 2);
  const GridSymbol expect = GridSymbol::from_function(s, 1.0, [&](const double* x, const int* xi) {
    return cplx(0, w * xi[0]) * std::sin(2 * x[0]) + w * 2.0 * std::cos(2 * x[0]);
  });
  q -= expect;
  m = 0.0;
  for (const cplx& z : q.values) m = std::max(m, std::abs(z));
  CHECK(m < 1e-11);

  GridSymbol adj = symbol_adjoint(as, 1);
  adj -= as;
  m = 0.0;
  for (const cplx& z : adj.values) m = std::max(m, std::abs(z));
  CHECK(m < 1e-13);
  CHECK_THROWS_AS(symbol_sharp(as, bs, -1), DomainError);
  CHECK(homogeneity_defect(p, 1.0) < 1e-12);
}

TEST_CASE("paralinearization") {
  const GridSpec s = GridSpec::make(1, 16);
  const TorusField u = rnd(s, Shape::scalar_shape(), Parity::none, 12, 0.1, 6, 0.3);
  NonlinearMap id;
  id.value = [](const double*, const double* z, double* o) { o[0] = z[0]; };
  id.jac_z = [](const double*, const double*, double* j) { j[0] = 1.0; };
  const Paralinearization pl = paralinearize(id, u);
  CHECK(max_abs_coeff(pl.coef - TorusField::constant(s, Shape::scalar_shape(), {1.0})) < 1e-14);
  CHECK(max_abs_coeff(pl.remainder) < 1e-13);

  // z^2: u^2 = 2 T_u u + R_PM(u, u), so the remainder is R_PM(u, u)
  const Paralinearization sq = paralinearize(square_map(), u);
  CHECK(max_diff(sq.remainder, pm_remainder(u, u)) < 1e-11);

  const TorusField zero(s, Shape::scalar_shape());
  const Paralinearization sz = paralinearize(sin_times_z(), zero);
  const TorusField sn = sample(s, Shape::scalar_shape(), [](const double* x, double* o) { o[0] = std::sin(x[0]); });
  CHECK(max_diff(sz.coef, sn) < 1e-14);
  CHECK(max_abs_coeff(sz.remainder) < 1e-15);
}

TEST_CASE("composition remainder") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField b = rnd(s, Shape::scalar_shape(), Parity::none, 13);
  const TorusField u = rnd(s, Shape::scalar_shape(), Parity::none, 14);
  const TorusField c = TorusField::constant(s, Shape::scalar_shape(), {0.7});
  CHECK(max_abs_coeff(cm_remainder_apply(c, b, u)) < 1e-12);
  const TorusField B = rnd(s, Shape::mat(2, 2), Parity::none, 15);
  const TorusField v = rnd(s, Shape::vec(2), Parity::none, 16);
  CHECK(max_abs_coeff(cm_remainder_apply(TorusField::identity(s, 2), B, v, Side::left)) < 1e-12);
}

TEST_CASE("parity of paraproducts") {
  const GridSpec s = GridSpec::make(2, 8);
  for (Parity pa : {Parity::even, Parity::odd})
    for (Parity pu : {Parity::even, Parity::odd}) {
      const TorusField a = rnd(s, Shape::scalar_shape(), pa, 20);
      const TorusField u = rnd(s, Shape::scalar_shape(), pu, 21);
      const TorusField t = paraproduct(a, u);
      CHECK(t.parity == parity_product(pa, pu));
      CHECK(parity_defect(t) < 1e-14);
      const TorusField r = pm_remainder(a, u);
      CHECK(r.parity == parity_product(pa, pu));
      CHECK(parity_defect(r) < 1e-13);
    }
}

TEST_CASE("spectral localization of a single block") {
  const GridSpec s = GridSpec::make(1, 64);
  const TorusField a = rnd(s, Shape::scalar_shape(), Parity::none, 30, 1.0, 64, 0.2);
  const TorusField u0 = rnd(s, Shape::scalar_shape(), Parity::none, 31, 1.0, 64, 0.0);
  const auto& t = tables(s);
  for (int j = 4; j <= 6; ++j) {
    const TorusField u = lp_block(u0, j);
    const TorusField w = paraproduct(a, u);
    for (std::size_t i = 0; i < w.L(); ++i) {
      const double r = t.norm[i];
      if (r < std::ldexp(1.0, j - 3) || r > std::ldexp(1.0, j + 1)) CHECK(std::abs(w.at(0, i)) < 1e-14);
    }
  }
}

TEST_CASE("linearity") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField a = rnd(s, Shape::scalar_shape(), Parity::none, 40);
  const TorusField u = rnd(s, Shape::scalar_shape(), Parity::none, 41);
  const TorusField v = rnd(s, Shape::scalar_shape(), Parity::none, 42);
  const cplx k(0.3, -1.2);
  CHECK(max_diff(paraproduct(a, u + k * v), paraproduct(a, u) + k * paraproduct(a, v)) < 1e-12);
  CHECK(max_diff(pm_remainder(a, u + k * v), pm_remainder(a, u) + k * pm_remainder(a, v)) < 1e-12);
}

TEST_CASE("neumann inverse of I + T_w") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField W = rnd(s, Shape::mat(2, 2), Parity::none, 50, 0.05);
  const TorusField g = rnd(s, Shape::vec(2), Parity::none, 51);
  const Paraproduct P(W);
  NeumannInfo info;
  const TorusField v = neumann_inverse(P, g, 1e-16, 60, &info);
  CHECK(max_diff(v + P.apply(v), g) < 1e-13);
  CHECK(info.terms <= 30);
}
