#include "support.hpp"

#include "paratorus/lp.hpp"

#include <doctest.h>

#include <random>

using namespace paratorus;
using namespace testing_support;

TEST_CASE("grid spec validation") {
  CHECK_THROWS_AS(GridSpec::make(0, 8), ShapeError);
  CHECK_THROWS_AS(GridSpec::make(1, 6), ShapeError);
  CHECK_THROWS_AS(GridSpec::make(1, 8, 16), ShapeError);
  const GridSpec s = GridSpec::make(2, 8);
  CHECK(s.G == 32);
  CHECK(std::ldexp(1.0, s.J - 1) >= std::sqrt(2.0) * 8);
}

TEST_CASE("analyze of constant and cosine") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField c = sample(s, Shape::scalar_shape(), [](const double*, double* o) { o[0] = 3.0; });
  CHECK(std::abs(c.at(0, c.zero_index()) - cplx(3.0)) < 1e-14);
  CHECK(max_abs_coeff(c - TorusField::constant(s, Shape::scalar_shape(), {3.0})) < 1e-14);

  const TorusField u = sample(s, Shape::scalar_shape(), [](const double* x, double* o) { o[0] = std::cos(x[0]); });
  const auto& t = tables(s);
  const int p[2] = {1, 0}, m[2] = {-1, 0};
  CHECK(std::abs(u.at(0, t.index_of(p)) - 0.5) < 1e-14);
  CHECK(std::abs(u.at(0, t.index_of(m)) - 0.5) < 1e-14);
  TorusField rest = u;
  rest.at(0, t.index_of(p)) = rest.at(0, t.index_of(m)) = 0.0;
  CHECK(max_abs_coeff(rest) < 1e-14);
}

TEST_CASE("synthesize round trip against direct summation") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField u = rnd(s, Shape::vec(2), Parity::none, 11);
  const TorusField back = analyze(synthesize(u));
  CHECK(max_diff(u, back) < 1e-12);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 2 * M_PI);
  std::vector<double> pts(20);
  for (double& x : pts) x = U(rng);
  const auto direct = evaluate_at(u, pts);
  const auto serial = evaluate_at_serial(u, pts);
  double err = 0.0;
  for (int k = 0; k < 2; ++k)
    for (int q = 0; q < 10; ++q) {
      cplx ref = 0.0;
      for (std::size_t i = 0; i < u.L(); ++i) {
        const int* xi = tables(s).point(i);
        ref += u.at(k, i) * std::exp(cplx(0, xi[0] * pts[2 * q] + xi[1] * pts[2 * q + 1]));
      }
      err = std::max(err, std::abs(direct[k * 10 + q] - ref));
      err = std::max(err, std::abs(serial[k * 10 + q] - ref));
    }
  CHECK(err < 1e-12);
}

TEST_CASE("lp blocks of a plane wave and of a constant") {
  const GridSpec s = GridSpec::make(1, 16);
  const TorusField u = plane_wave(s, {4});
  for (int j = 0; j <= s.J; ++j) {
    if (j == 3)
      CHECK(max_diff(lp_block(u, j), u) < 1e-15);
    else
      CHECK(max_abs_coeff(lp_block(u, j)) < 1e-15);
  }
  const TorusField c = TorusField::constant(s, Shape::scalar_shape(), {2.5});
  CHECK(max_diff(lp_block(c, 0), c) < 1e-15);
  for (int j = 1; j <= s.J; ++j) CHECK(max_abs_coeff(lp_block(c, j)) == 0.0);
  CHECK(max_abs_coeff(lp_block(u, -1)) == 0.0);
  CHECK(max_abs_coeff(lp_block(u, s.J + 1)) == 0.0);
}

TEST_CASE("partition of unity and block support") {
  for (int n : {1, 2}) {
    const GridSpec s = GridSpec::make(n, 16);
    const TorusField u = rnd(s, Shape::scalar_shape(), Parity::none, 5, 1.0, 16, 0.0);
    TorusField sum(s, u.shape);
    for (int j = 0; j <= s.J; ++j) {
      const TorusField b = lp_block(u, j);
      sum += b;
      if (j == 0) continue;
      const auto& t = tables(s);
      for (std::size_t i = 0; i < u.L(); ++i) {
        const double r = t.norm[i];
        if (!(r > std::ldexp(1.0, j - 2) && r <= std::ldexp(1.0, j))) CHECK(std::abs(b.at(0, i)) == 0.0);
      }
    }
    CHECK(std::sqrt(grid_mean_square(u - sum)) < 1e-12);
  }
}

TEST_CASE("bump functions") {
  for (double r = 0.0; r < 2.0; r += 0.01) {
    CHECK(lp::phi(r) >= 0.0);
    if (r < 0.25 || r > 1.0) CHECK(lp::phi(r) == 0.0);
  }
  // telescoping partition
  for (double r : {0.0, 0.7, 3.3, 17.0, 63.9}) {
    double acc = lp::psi(r);
    for (int j = 1; j <= 8; ++j) acc += lp::phi(std::ldexp(r, -j));
    CHECK(std::abs(acc - lp::psi(std::ldexp(r, -8))) < 1e-15);
    CHECK(std::abs(acc - 1.0) < 1e-15);
  }
}

TEST_CASE("sobolev and holder norms") {
  const GridSpec s = GridSpec::make(1, 8);
  const TorusField u = plane_wave(s, {3});
  CHECK(std::abs(sobolev_norm(u, 2.0) - 10.0) < 1e-12);
  const TorusField z(s, Shape::scalar_shape());
  CHECK(sobolev_norm(z, 3.0) == 0.0);
  CHECK(holder_norm(z, 1.0) == 0.0);

  const GridSpec s2 = GridSpec::make(2, 8);
  const TorusField v = rnd(s2, Shape::vec(2), Parity::none, 9);
  const double a = sobolev_norm(v, 0.0);
  CHECK(std::abs(a * a - grid_mean_square(v)) <= 1e-10 * a * a);
}

TEST_CASE("directional derivative") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField sn = sample(s, Shape::scalar_shape(), [](const double* x, double* o) { o[0] = std::sin(x[0]); },
                               Parity::odd);
  const TorusField cs = sample(s, Shape::scalar_shape(), [](const double* x, double* o) { o[0] = std::cos(x[0]); },
                               Parity::even);
  const TorusField d = directional_derivative(sn, {1.0, 0.0});
  CHECK(max_diff(d, cs) < 1e-14);
  CHECK(d.parity == Parity::even);
  const TorusField c = TorusField::constant(s, Shape::scalar_shape(), {4.0});
  CHECK(max_abs_coeff(directional_derivative(c, {1.0, 2.0})) == 0.0);
}

TEST_CASE("derivative and projection commute with lp blocks") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField u = rnd(s, Shape::scalar_shape(), Parity::none, 21);
  const std::vector<double> w{1.0, std::sqrt(2.0)};
  for (int j = 0; j <= s.J; ++j) {
    CHECK(max_diff(lp_block(directional_derivative(u, w), j), directional_derivative(lp_block(u, j), w)) < 1e-12);
    CHECK(max_diff(lp_block(parity_project(u, Parity::odd), j), parity_project(lp_block(u, j), Parity::odd)) <
          1e-14);
  }
}

TEST_CASE("composition") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField f = rnd(s, Shape::scalar_shape(), Parity::none, 4);
  const TorusField zero(s, Shape::vec(2));
  CHECK(max_diff(compose_displacement(f, zero), f) < 1e-12);

  // constant shift: e^{i x1} -> e^{ic} e^{i x1}
  const double c = 0.37;
  const TorusField e1 = plane_wave(s, {1, 0});
  const TorusField shift = TorusField::constant(s, Shape::vec(2), {c, 0.0});
  CHECK(max_diff(compose_displacement(e1, shift), std::exp(cplx(0, c)) * e1) < 1e-12);

  // generic small theta against the pointwise series
  const TorusField theta = rnd(s, Shape::vec(2), Parity::odd, 8, 0.02, 3, 0.5);
  const TorusField g = rnd(s, Shape::scalar_shape(), Parity::none, 6, 1.0, 4, 0.3);
  const TorusField direct = compose_displacement_direct(g, theta);
  CHECK(max_diff(compose_displacement(g, theta), direct) < 1e-10);
  const auto pts = displaced_grid(theta);
  const auto vals = evaluate_at(g, pts);
  GridValues gv(s, g.shape);
  for (std::size_t p = 0; p < gv.P(); ++p) gv.v[p] = vals[p];
  CHECK(max_diff(analyze(gv), direct) < 1e-12);
}

TEST_CASE("composition round trip with the inverse map") {
  // default resolution: at M = 16 the truncated inverse map is only good to ~1e-5
  const GridSpec s = GridSpec::make(2, 32);
  TorusField theta = rnd(s, Shape::vec(2), Parity::odd, 17, 1.0, 2, 0.0);
  const double lip = jacobian_sup(theta);
  theta *= 0.3 / lip;
  const Diffeo chi = Diffeo::make(theta);
  const TorusField f = rnd(s, Shape::scalar_shape(), Parity::none, 2, 1.0, 3, 0.5);
  const TorusField back = compose_displacement(compose_displacement(f, chi.theta), chi.inverse());
  CHECK(sobolev_distance(back, f, 2.0) < 1e-8);
}

TEST_CASE("parity projection and average") {
  const GridSpec s = GridSpec::make(1, 8);
  const TorusField mix = sample(s, Shape::scalar_shape(), [](const double* x, double* o) {
    o[0] = std::sin(x[0]) + std::cos(2 * x[0]);
  });
  const TorusField sn = sample(s, Shape::scalar_shape(), [](const double* x, double* o) { o[0] = std::sin(x[0]); });
  CHECK(max_diff(parity_project(mix, Parity::odd), sn) < 1e-14);
  CHECK(std::abs(average(TorusField::constant(s, Shape::scalar_shape(), {5.0}))[0] - 5.0) < 1e-15);
  const GridSpec s2 = GridSpec::make(2, 4);
  for (int k = 0; k < 100; ++k) {
    const TorusField u = rnd(s2, Shape::vec(2), Parity::none, 100 + k);
    for (Parity p : {Parity::even, Parity::odd}) {
      const TorusField a = parity_project(u, p);
      CHECK(max_diff(parity_project(a, p), a) == 0.0);
      CHECK(parity_defect(a) == 0.0);
    }
  }
}

TEST_CASE("shape errors") {
  const GridSpec s = GridSpec::make(1, 8);
  TorusField a(s, Shape::vec(2)), b(s, Shape::vec(3));
  CHECK_THROWS_AS(a += b, ShapeError);
  TorusField c(GridSpec::make(1, 4), Shape::vec(2));
  CHECK_THROWS_AS(a += c, ShapeError);
}
