#include "support.hpp"

#include "paratorus/paraflow.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace paratorus;
using namespace testing_support;

namespace {

TorusField scaled_theta(const GridSpec& s, double lip, std::uint64_t seed, int modes = 2) {
  TorusField th = rnd(s, Shape::vec(s.n), Parity::odd, seed, 1.0, modes, 0.0);
  th *= lip / jacobian_sup(th);
  return th;
}

}  // namespace

TEST_CASE("deformation endpoints and single mode") {
  const GridSpec s = GridSpec::make(1, 8);
  const TorusField zero(s, Shape::vec(1), Parity::odd);
  for (double tau : {0.0, 0.5, 1.0}) {
    const Deformation d = deformation(zero, tau);
    CHECK(max_abs_coeff(d.Theta) == 0.0);
    CHECK(max_abs_coeff(d.X) == 0.0);
  }
  const double c = 0.2;
  const TorusField th = sample(s, Shape::vec(1), [&](const double* x, double* o) { o[0] = c * std::sin(x[0]); },
                               Parity::odd);
  CHECK(max_diff(deformation(th, 1.0).Theta, th) < 1e-15);
  for (double tau : {0.0, 0.3, 0.8}) {
    const TorusField expect = (tau * std::exp(-(1.0 - tau) * std::sqrt(2.0))) * th;
    CHECK(max_diff(deformation(th, tau).Theta, expect) < 1e-12);
  }
  CHECK_THROWS_AS(deformation(th, 1.5), DomainError);
}

TEST_CASE("deformation keeps the jacobian bound") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField th = scaled_theta(s, 0.3, 3);
  const DeformationPath path = DeformationPath::build(th, 8);
  CHECK(max_abs_coeff(path.Theta.front()) == 0.0);
  CHECK(max_diff(path.Theta.back(), th) < 1e-15);
  for (const TorusField& T : path.Theta) CHECK(jacobian_sup(T) <= jacobian_sup(th) + 1e-12);
}

TEST_CASE("paratransport") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField w0 = rnd(s, Shape::scalar_shape(), Parity::none, 4);
  TransportProblem none;
  CHECK(max_diff(paratransport_solve(none, w0, 16), w0) == 0.0);

  TransportProblem decay;
  const double c = 0.8;
  decay.zeroth = [&](double) { return TorusField::constant(s, Shape::scalar_shape(), {c}); };
  CHECK(max_diff(paratransport_solve(decay, w0, 128), std::exp(-c) * w0) < 1e-10 * max_abs_coeff(w0));

  const TorusField th = scaled_theta(s, 0.2, 5);
  TransportProblem flow;
  flow.velocity = [&](double tau) { return deformation(th, tau).X; };
  double prev = 0.0;
  for (int N : {16, 32}) {
    const TorusField back = paratransport_solve(flow, paratransport_solve(flow, w0, N), N, Direction::backward);
    const double e = max_diff(back, w0);
    if (prev > 0.0) CHECK(prev / e > 12.0);
    prev = e;
  }
}

TEST_CASE("paracomposition basics") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField f = rnd(s, Shape::scalar_shape(), Parity::even, 6);
  const Diffeo id = Diffeo::identity(s);
  CHECK(max_diff(paracompose(id, f), f) == 0.0);

  const Diffeo chi = Diffeo::make(scaled_theta(s, 0.3, 7));
  const TorusField c = TorusField::constant(s, Shape::scalar_shape(), {1.5});
  CHECK(max_diff(paracompose(chi, c, false, 16), c) < 1e-15);

  const Paracomposition pc(chi.theta, 32);
  const TorusField g = pc.apply(f);
  CHECK(g.parity == Parity::even);
  CHECK(parity_defect(g) < 1e-14);
  int it = 0;
  const TorusField back = pc.invert(g, 1e-14, 20, &it);
  CHECK(max_diff(pc.apply(back), g) < 1e-13);
  CHECK(sobolev_distance(pc.apply_backward(g), f, 4.0) < 1e-3 * sobolev_norm(f, 4.0));
}

TEST_CASE("paracomposition boundedness and lipschitz in the map") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField f = rnd(s, Shape::scalar_shape(), Parity::none, 8);
  const TorusField th1 = scaled_theta(s, 0.3, 9);
  const Paracomposition pc1(th1, 32);
  for (double idx : {0.0, 2.0, 4.0}) CHECK(sobolev_norm(pc1.apply(f), idx) <= 2.0 * sobolev_norm(f, idx));

  TorusField th2 = th1 + rnd(s, Shape::vec(2), Parity::odd, 10, 1e-3, 2, 0.0);
  const Paracomposition pc2(th2, 32);
  const TorusField dth = th1 - th2;
  const GridValues g = synthesize(dth);
  double sup = 0.0;
  for (const cplx& z : g.v) sup = std::max(sup, std::abs(z.real()));
  const double c1 = std::max(sup, jacobian_sup(dth));
  const double dist = sobolev_distance(pc1.apply(f), pc2.apply(f), 1.0);
  CHECK(dist > 0.0);
  CHECK(dist <= 10.0 * c1 * sobolev_norm(f, 2.0));
}

TEST_CASE("diffeo inversion") {
  const GridSpec s = GridSpec::make(2, 32);
  const Diffeo chi = Diffeo::make(scaled_theta(s, 0.3, 11));
  CHECK(chi.inverse_residual() < 1e-10);
  TorusField big = scaled_theta(s, 1.2, 12);
  CHECK_THROWS_AS(Diffeo::make(big), DomainError);
  InversionInfo info;
  invert_displacement(chi.theta, 1e-12, 50, &info);
  CHECK(info.residual < 1e-12);
}

TEST_CASE("conjugation symbols") {
  const GridSpec s = GridSpec::make(2, 4);
  const std::vector<double> w{1.0, std::sqrt(2.0)};
  const SymbolFn p = [&](const double*, const double* xi) { return cplx(0.0, w[0] * xi[0] + w[1] * xi[1]); };
  const auto& t = tables(s);

  const GridSymbol q_id = conjugation_symbol(s, p, Diffeo::identity(s), 0);
  double m = 0.0;
  for (std::size_t e = 0; e < s.lattice_size(); ++e) {
    const int* k = t.point(e);
    for (std::size_t g = 0; g < q_id.P(); ++g)
      m = std::max(m, std::abs(q_id.at_freq(e)[g] - cplx(0.0, w[0] * k[0] + w[1] * k[1])));
  }
  CHECK(m < 1e-14);

  const Diffeo shift = Diffeo::make(TorusField::constant(s, Shape::vec(2), {0.3, -0.1}));
  const GridSymbol q_shift = conjugation_symbol(s, p, shift, 0);
  m = 0.0;
  for (std::size_t e = 0; e < s.lattice_size(); ++e)
    for (std::size_t g = 0; g < q_shift.P(); ++g) m = std::max(m, std::abs(q_shift.at_freq(e)[g] - q_id.at_freq(e)[g]));
  CHECK(m < 1e-14);

  // generic map: q(x, xi) = i w . (chi'(x)^{-T} xi) point by point
  const Diffeo chi = Diffeo::make(scaled_theta(s, 0.3, 13, 1));
  const GridSymbol q = conjugation_symbol(s, p, chi, 0);
  const GridValues J = synthesize(jacobian(chi.theta));
  m = 0.0;
  for (std::size_t g = 0; g < q.P(); ++g) {
    Eigen::Matrix2d D;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) D(i, k) = (i == k ? 1.0 : 0.0) + J.comp(i * 2 + k)[g].real();
    const Eigen::Matrix2d DiT = D.inverse().transpose();
    for (std::size_t e = 0; e < s.lattice_size(); ++e) {
      const int* k = t.point(e);
      const Eigen::Vector2d eta = DiT * Eigen::Vector2d(k[0], k[1]);
      m = std::max(m, std::abs(q.at_freq(e)[g] - cplx(0.0, w[0] * eta(0) + w[1] * eta(1))));
    }
  }
  CHECK(m < 1e-12);
  CHECK_THROWS_AS(conjugation_symbol(s, p, chi, 2), DomainError);
}

TEST_CASE("conjugation defect") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField u = rnd(s, Shape::scalar_shape(), Parity::none, 14);
  DifferentialSymbol p;
  p.velocity = rnd(s, Shape::vec(2), Parity::even, 15, 0.5, 2, 0.3);
  p.velocity.c[p.velocity.zero_index()] += 1.0;
  CHECK(max_abs_coeff(conj_defect_apply(p, Diffeo::identity(s), u, 16)) < 1e-10);

  const Diffeo chi = Diffeo::make(scaled_theta(s, 0.2, 16));
  const SymbolFn one = [](const double*, const double*) { return cplx(1.0); };
  CHECK(max_abs_coeff(conj_defect_apply(s, one, chi, u, 0, 16)) < 1e-10);
}

TEST_CASE("refined paralinearization remainder") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField f = rnd(s, Shape::scalar_shape(), Parity::none, 17);
  CHECK(max_abs_coeff(refined_paralin_remainder(f, Diffeo::identity(s), 16)) < 1e-8);
  const Diffeo chi = Diffeo::make(scaled_theta(s, 0.2, 18));
  const TorusField c = TorusField::constant(s, Shape::scalar_shape(), {2.0});
  CHECK(max_abs_coeff(refined_paralin_remainder(c, chi, 16)) < 1e-14);
}
