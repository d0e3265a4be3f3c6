#include "paratorus/demos.hpp"

#include "paratorus/field_ops.hpp"

#include <cmath>
#include <random>

namespace paratorus {

TorusField random_field(const GridSpec& spec, Shape shape, Parity parity, double amplitude, int max_mode,
                        double decay, std::uint64_t seed) {
  const auto& t = tables(spec);
  const int n = spec.n;
  TorusField u(spec, shape, Parity::none);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t L = u.L();
  for (int c = 0; c < u.comps(); ++c)
    for (std::size_t i = 0; i < L; ++i) {
      const int* xi = t.point(i);
      int inf = 0;
      for (int d = 0; d < n; ++d) inf = std::max(inf, std::abs(xi[d]));
      // draw for every index so the stream does not depend on max_mode
      const double re = g(rng), im = g(rng);
      if (inf > max_mode) continue;
      const double w = amplitude * std::exp(-decay * t.norm[i]);
      u.at(c, i) = cplx(re, im) * w;
    }
  // real-valued: c(-xi) = conj c(xi)
  for (int c = 0; c < u.comps(); ++c)
    for (std::size_t i = 0; i < L; ++i) {
      const std::size_t j = t.negate(i);
      if (j < i) continue;
      const cplx a = 0.5 * (u.at(c, i) + std::conj(u.at(c, j)));
      u.at(c, i) = a;
      u.at(c, j) = std::conj(a);
    }
  if (parity != Parity::none) u = parity_project(u, parity);
  u.parity = parity;
  return u;
}

TorusField sine_forcing(const GridSpec& spec, int N) {
  return sample(
      spec, Shape::vec(N),
      [&](const double* x, double* out) {
        double s = 0.0;
        for (int d = 0; d < spec.n; ++d) s += std::sin(x[d]);
        for (int k = 0; k < N; ++k) out[k] = s;
      },
      Parity::odd);
}

namespace {

NonlinearMap zero_map(int in, int out) {
  NonlinearMap m;
  m.in_dim = in;
  m.out_dim = out;
  m.value = [out](const double*, const double*, double* v) {
    for (int k = 0; k < out; ++k) v[k] = 0.0;
  };
  m.jac_z = [in, out](const double*, const double*, double* j) {
    for (int k = 0; k < in * out; ++k) j[k] = 0.0;
  };
  return m;
}

HyperbolicProblem base(const GridSpec& spec, int N, double eps, const DioParams& params) {
  HyperbolicProblem pb;
  pb.n = spec.n;
  pb.N = N;
  pb.eps = eps;
  pb.params = params;
  pb.f = sine_forcing(spec, N);
  pb.s = spec.n == 1 ? 8.5 : 12.5;
  return pb;
}

std::vector<DemoFamily> make_registry() {
  std::vector<DemoFamily> r;

  r.push_back({"linear", "X = 0, F = 0, f = sum sin x_k: exact Fourier division", 0, 1, {1.0, std::sqrt(2.0)},
               [](const GridSpec& spec, double eps, const DioParams& params) {
                 HyperbolicProblem pb = base(spec, 1, eps, params);
                 pb.X = zero_map(1, spec.n);
                 pb.F = zero_map(1, 1);
                 return pb;
               }});

  r.push_back({"quasilinear", "X = cos(x_1) (1,...,1), F = sin(x_1) z, f = sum sin x_k", 0, 1,
               {1.0, std::sqrt(2.0)}, [](const GridSpec& spec, double eps, const DioParams& params) {
                 HyperbolicProblem pb = base(spec, 1, eps, params);
                 const int n = spec.n;
                 pb.X.in_dim = 1;
                 pb.X.out_dim = n;
                 pb.X.value = [n](const double* x, const double*, double* v) {
                   for (int k = 0; k < n; ++k) v[k] = std::cos(x[0]);
                 };
                 pb.X.jac_z = [n](const double*, const double*, double* j) {
                   for (int k = 0; k < n; ++k) j[k] = 0.0;
                 };
                 pb.F.in_dim = pb.F.out_dim = 1;
                 pb.F.value = [](const double* x, const double* z, double* v) { v[0] = std::sin(x[0]) * z[0]; };
                 pb.F.jac_z = [](const double* x, const double*, double* j) { j[0] = std::sin(x[0]); };
                 return pb;
               }});

  r.push_back({"coupled", "N = 2: X = cos(x_1)(1 + z_1/2)(1,...,1), F = sin(x_1) (z_1 + z_2/2, z_2 - z_1/2)", 0, 2,
               {1.0, std::sqrt(2.0)}, [](const GridSpec& spec, double eps, const DioParams& params) {
                 HyperbolicProblem pb = base(spec, 2, eps, params);
                 const int n = spec.n;
                 pb.X.in_dim = 2;
                 pb.X.out_dim = n;
                 pb.X.value = [n](const double* x, const double* z, double* v) {
                   for (int k = 0; k < n; ++k) v[k] = std::cos(x[0]) * (1.0 + 0.5 * z[0]);
                 };
                 pb.X.jac_z = [n](const double* x, const double*, double* j) {
                   for (int k = 0; k < n; ++k) {
                     j[2 * k] = 0.5 * std::cos(x[0]);
                     j[2 * k + 1] = 0.0;
                   }
                 };
                 pb.F.in_dim = pb.F.out_dim = 2;
                 pb.F.value = [](const double* x, const double* z, double* v) {
                   const double s = std::sin(x[0]);
                   v[0] = s * (z[0] + 0.5 * z[1]);
                   v[1] = s * (z[1] - 0.5 * z[0]);
                 };
                 pb.F.jac_z = [](const double* x, const double*, double* j) {
                   const double s = std::sin(x[0]);
                   j[0] = s;
                   j[1] = 0.5 * s;
                   j[2] = -0.5 * s;
                   j[3] = s;
                 };
                 return pb;
               }});

  // d_t u + (1 + eps u) d_x u = eps f(w' t, x), from u <- 1 + eps u in forced Burgers.
  r.push_back({"burgers", "forced Burgers around 1: time-forcing frequency w', X = (0, z)", 2, 1,
               {std::sqrt(2.0), 1.0}, [](const GridSpec& spec, double eps, const DioParams& params) {
                 if (spec.n != 2) throw DomainError("burgers family needs n = 2");
                 NonlinearMap X;
                 X.in_dim = 1;
                 X.out_dim = 1;
                 X.value = [](const double*, const double* z, double* v) { v[0] = z[0]; };
                 X.jac_z = [](const double*, const double*, double* j) { j[0] = 1.0; };
                 return forced_wrapper(1, 1, 1, X, zero_map(1, 1), sine_forcing(spec, 1), eps, params);
               }});
  return r;
}

}  // namespace

const std::vector<DemoFamily>& demo_registry() {
  static const std::vector<DemoFamily> r = make_registry();
  return r;
}

const DemoFamily& demo_family(const std::string& key) {
  for (const DemoFamily& f : demo_registry())
    if (f.key == key) return f;
  throw DomainError("unknown problem family '" + key + "'");
}

}  // namespace paratorus
