#include "paratorus/field_ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>

namespace paratorus {

TorusField sample(const GridSpec& spec, Shape shape, const PointFn& fn, Parity parity) {
  GridValues g(spec, shape);
  const std::size_t P = g.P();
  const int C = shape.comps();
#pragma omp parallel
  {
    std::vector<double> x(spec.n), out(C);
#pragma omp for
    for (std::size_t p = 0; p < P; ++p) {
      grid_point(spec, p, x.data());
      fn(x.data(), out.data());
      for (int k = 0; k < C; ++k) g.comp(k)[p] = out[k];
    }
  }
  return analyze(g, parity);
}

namespace {
TorusField weighted(const TorusField& u, const std::vector<double>& w) {
  TorusField out = u;
  const std::size_t L = u.L();
  for (int k = 0; k < u.comps(); ++k) {
    cplx* c = out.comp(k);
    for (std::size_t i = 0; i < L; ++i) c[i] *= w[i];
  }
  return out;
}
}  // namespace

TorusField lp_block(const TorusField& u, int j) {
  if (j < 0 || j > u.spec.J) return TorusField(u.spec, u.shape, u.parity);
  return weighted(u, tables(u.spec).block[j]);
}

TorusField lp_low(const TorusField& u, int j) { return weighted(u, tables(u.spec).low_weights(j)); }

double sobolev_norm(const TorusField& u, double s) {
  const auto& t = tables(u.spec);
  const std::size_t L = u.L();
  double sum = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    double a = 0.0;
    for (int k = 0; k < u.comps(); ++k) a += std::norm(u.at(k, i));
    if (a == 0.0) continue;
    sum += std::pow(1.0 + t.norm[i] * t.norm[i], s) * a;
  }
  return std::sqrt(sum);
}

double sobolev_distance(const TorusField& a, const TorusField& b, double s) {
  return sobolev_norm(a - b, s);
}

double holder_norm(const TorusField& u, double r) {
  double best = 0.0;
  for (int j = 0; j <= u.spec.J; ++j) {
    GridValues g = synthesize(lp_block(u, j));
    double m = 0.0;
    for (const auto& v : g.v) m = std::max(m, std::abs(v));
    best = std::max(best, std::pow(2.0, j * r) * m);
  }
  return best;
}

double grid_mean_square(const TorusField& u) {
  GridValues g = synthesize(u);
  double s = 0.0;
  for (const auto& v : g.v) s += std::norm(v);
  return s / static_cast<double>(g.P());
}

double max_abs_coeff(const TorusField& u) {
  double m = 0.0;
  for (const auto& v : u.c) m = std::max(m, std::abs(v));
  return m;
}

TorusField partial(const TorusField& u, int k) {
  const auto& t = tables(u.spec);
  TorusField out(u.spec, u.shape, parity_flip(u.parity));
  const std::size_t L = u.L();
  const int n = u.spec.n;
  for (int c = 0; c < u.comps(); ++c)
    for (std::size_t i = 0; i < L; ++i) out.at(c, i) = cplx(0.0, t.xi[i * n + k]) * u.at(c, i);
  return out;
}

TorusField jacobian(const TorusField& u) {
  if (u.shape.cols != 1) throw ShapeError("jacobian: expected a column field");
  const int n = u.spec.n, R = u.shape.rows;
  const auto& t = tables(u.spec);
  TorusField out(u.spec, Shape::mat(R, n), parity_flip(u.parity));
  const std::size_t L = u.L();
  for (int r = 0; r < R; ++r)
    for (int k = 0; k < n; ++k)
      for (std::size_t i = 0; i < L; ++i) out.at(r * n + k, i) = cplx(0.0, t.xi[i * n + k]) * u.at(r, i);
  return out;
}

TorusField directional_derivative(const TorusField& u, const std::vector<double>& omega) {
  const int n = u.spec.n;
  if (static_cast<int>(omega.size()) != n) throw ShapeError("directional_derivative: omega has wrong length");
  const auto& t = tables(u.spec);
  TorusField out(u.spec, u.shape, parity_flip(u.parity));
  const std::size_t L = u.L();
  std::vector<double> w(L);
  for (std::size_t i = 0; i < L; ++i) {
    double s = 0.0;
    for (int d = 0; d < n; ++d) s += omega[d] * t.xi[i * n + d];
    w[i] = s;
  }
  for (int c = 0; c < u.comps(); ++c)
    for (std::size_t i = 0; i < L; ++i) out.at(c, i) = cplx(0.0, w[i]) * u.at(c, i);
  return out;
}

TorusField parity_project(const TorusField& u, Parity p) {
  if (p == Parity::none) {
    TorusField out = u;
    out.parity = Parity::none;
    return out;
  }
  const auto& t = tables(u.spec);
  const double sgn = p == Parity::even ? 1.0 : -1.0;
  TorusField out(u.spec, u.shape, p);
  const std::size_t L = u.L();
  for (int c = 0; c < u.comps(); ++c)
    for (std::size_t i = 0; i < L; ++i) out.at(c, i) = 0.5 * (u.at(c, i) + sgn * u.at(c, t.negate(i)));
  return out;
}

double parity_defect(const TorusField& u) {
  if (u.parity == Parity::none) return 0.0;
  const auto& t = tables(u.spec);
  const double sgn = u.parity == Parity::even ? 1.0 : -1.0;
  double m = 0.0;
  const std::size_t L = u.L();
  for (int c = 0; c < u.comps(); ++c)
    for (std::size_t i = 0; i < L; ++i) m = std::max(m, std::abs(u.at(c, i) - sgn * u.at(c, t.negate(i))));
  return m;
}

std::vector<cplx> average(const TorusField& u) {
  std::vector<cplx> a(u.comps());
  for (int c = 0; c < u.comps(); ++c) a[c] = u.at(c, u.zero_index());
  return a;
}

TorusField subtract_average(const TorusField& u) {
  TorusField out = u;
  for (int c = 0; c < u.comps(); ++c) out.at(c, u.zero_index()) = 0.0;
  return out;
}

GridValues grid_multiply(const GridValues& a, const GridValues& b) {
  if (a.spec != b.spec) throw ShapeError("grid_multiply: grid specs differ");
  const Shape s = product_shape(a.shape, b.shape);
  GridValues out(a.spec, s);
  const std::size_t P = a.P();
  if (a.shape.scalar() || b.shape.scalar()) {
    const GridValues& sc = a.shape.scalar() ? a : b;
    const GridValues& other = a.shape.scalar() ? b : a;
    for (int k = 0; k < s.comps(); ++k) {
      const cplx* x = sc.comp(0);
      const cplx* y = other.comp(k);
      cplx* o = out.comp(k);
      for (std::size_t p = 0; p < P; ++p) o[p] = x[p] * y[p];
    }
    return out;
  }
  const int R = a.shape.rows, K = a.shape.cols, C = b.shape.cols;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      cplx* o = out.comp(r * C + c);
      for (int k = 0; k < K; ++k) {
        const cplx* x = a.comp(r * K + k);
        const cplx* y = b.comp(k * C + c);
        for (std::size_t p = 0; p < P; ++p) o[p] += x[p] * y[p];
      }
    }
  return out;
}

GridValues grid_inverse(const GridValues& a) {
  if (!a.shape.square()) throw ShapeError("grid_inverse: not square");
  const int N = a.shape.rows;
  GridValues out(a.spec, a.shape);
  const std::size_t P = a.P();
  if (N == 1) {
    for (std::size_t p = 0; p < P; ++p) {
      if (a.v[p] == 0.0) throw DomainError("grid_inverse: singular value");
      out.v[p] = 1.0 / a.v[p];
    }
    return out;
  }
  if (N == 2) {
    for (std::size_t p = 0; p < P; ++p) {
      const cplx m00 = a.comp(0)[p], m01 = a.comp(1)[p], m10 = a.comp(2)[p], m11 = a.comp(3)[p];
      const cplx det = m00 * m11 - m01 * m10;
      if (std::abs(det) < 1e-300) throw DomainError("grid_inverse: singular matrix");
      out.comp(0)[p] = m11 / det;
      out.comp(1)[p] = -m01 / det;
      out.comp(2)[p] = -m10 / det;
      out.comp(3)[p] = m00 / det;
    }
    return out;
  }
  Eigen::MatrixXcd m(N, N);
  for (std::size_t p = 0; p < P; ++p) {
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) m(r, c) = a.comp(r * N + c)[p];
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    if (std::abs(lu.determinant()) < 1e-300) throw DomainError("grid_inverse: singular matrix");
    Eigen::MatrixXcd inv = lu.inverse();
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) out.comp(r * N + c)[p] = inv(r, c);
  }
  return out;
}

TorusField multiply(const TorusField& a, const TorusField& b) {
  require_same_spec(a, b, "multiply");
  return analyze(grid_multiply(synthesize(a), synthesize(b)), parity_product(a.parity, b.parity));
}

TorusField pointwise_inverse(const TorusField& a) {
  // The inverse of an even field is even; other parities are not preserved.
  return analyze(grid_inverse(synthesize(a)), a.parity == Parity::even ? Parity::even : Parity::none);
}

TorusField transpose(const TorusField& a) {
  TorusField out(a.spec, Shape::mat(a.shape.cols, a.shape.rows), a.parity);
  for (int r = 0; r < a.shape.rows; ++r)
    for (int c = 0; c < a.shape.cols; ++c)
      std::copy(a.comp(r * a.shape.cols + c), a.comp(r * a.shape.cols + c) + a.L(), out.comp(c * a.shape.rows + r));
  return out;
}

TorusField scalar_times_identity(const TorusField& s, int N) {
  if (!s.shape.scalar()) throw ShapeError("scalar_times_identity: expected scalar");
  TorusField out(s.spec, Shape::mat(N, N), s.parity);
  for (int r = 0; r < N; ++r) out.set_component(r * N + r, s);
  return out;
}

std::vector<double> displaced_grid(const TorusField& theta) {
  const GridSpec& spec = theta.spec;
  const int n = spec.n;
  if (theta.shape != Shape::vec(n)) throw ShapeError("displacement must be an n-vector field");
  GridValues g = synthesize(theta);
  const std::size_t P = g.P();
  std::vector<double> pts(P * n);
  for (std::size_t p = 0; p < P; ++p) {
    grid_point(spec, p, pts.data() + p * n);
    for (int d = 0; d < n; ++d) pts[p * n + d] += g.comp(d)[p].real();
  }
  return pts;
}

namespace {

void multi_indices_upto(int n, int K, std::vector<std::vector<int>>& out);

// sum_{|alpha| <= K} d^alpha f(x_g) disp_g^alpha / alpha!, one derivative
// synthesized at a time into a scratch buffer.
GridValues taylor_sum(const TorusField& f, const std::vector<double>& disp, int K) {
  const GridSpec& spec = f.spec;
  const int n = spec.n;
  const std::size_t P = spec.grid_size(), L = f.L();
  const auto& t = tables(spec);
  std::vector<std::vector<int>> alphas;
  multi_indices_upto(n, K, alphas);
  std::vector<double> pw(P * n * (K + 1));
  for (std::size_t p = 0; p < P; ++p)
    for (int d = 0; d < n; ++d) {
      double* q = pw.data() + (p * n + d) * (K + 1);
      q[0] = 1.0;
      for (int m = 1; m <= K; ++m) q[m] = q[m - 1] * disp[p * n + d] / m;
    }
  GridValues out(spec, f.shape);
  const int C = f.comps();
  cvec buf(P);
  std::vector<cplx> tmp(L);
  for (const auto& al : alphas)
    for (int c = 0; c < C; ++c) {
      bool any = false;
      for (std::size_t i = 0; i < L; ++i) {
        cplx w = f.at(c, i);
        if (w != 0.0) {
          for (int d = 0; d < n; ++d)
            for (int m = 0; m < al[d]; ++m) w *= cplx(0.0, t.xi[i * n + d]);
          any = any || w != 0.0;
        }
        tmp[i] = w;
      }
      if (!any) continue;
      synthesize_component(spec, tmp.data(), buf.data());
      cplx* dst = out.comp(c);
#pragma omp parallel for schedule(static)
      for (std::size_t p = 0; p < P; ++p) {
        double w = 1.0;
        for (int d = 0; d < n; ++d) w *= pw[(p * n + d) * (K + 1) + al[d]];
        dst[p] += w * buf[p];
      }
    }
  return out;
}

}  // namespace

TorusField compose_displacement_direct(const TorusField& f, const TorusField& theta) {
  require_same_spec(f, theta, "compose");
  const std::vector<double> pts = displaced_grid(theta);
  const std::vector<cplx> vals = evaluate_at(f, pts);
  GridValues g(f.spec, f.shape);
  std::copy(vals.begin(), vals.end(), g.v.begin());
  return analyze(g, theta.parity == Parity::odd ? f.parity : Parity::none);
}

double l1_coeff_bound(const TorusField& u) {
  double m = 0.0;
  for (int c = 0; c < u.comps(); ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.L(); ++i) s += std::abs(u.at(c, i));
    m = std::max(m, s);
  }
  return m;
}

TorusField compose_displacement(const TorusField& f, const TorusField& theta) {
  require_same_spec(f, theta, "compose");
  const GridSpec& spec = f.spec;
  const int n = spec.n;
  const std::size_t P = spec.grid_size();
  GridValues th = synthesize(theta);
  // The series is expanded about the nodes only, so the largest nodal
  // displacement is an exact bound.
  double dmax = 0.0;
  std::vector<double> disp(P * n);
  for (std::size_t p = 0; p < P; ++p)
    for (int d = 0; d < n; ++d) {
      disp[p * n + d] = th.comp(d)[p].real();
      dmax = std::max(dmax, std::abs(disp[p * n + d]));
    }
  const int K = TaylorEvaluator::order_for(spec, dmax, false);
  if (K < 0) return compose_displacement_direct(f, theta);
  GridValues g = taylor_sum(f, disp, K);
  return analyze(g, theta.parity == Parity::odd ? f.parity : Parity::none);
}

namespace {

void multi_indices_upto(int n, int K, std::vector<std::vector<int>>& out) {
  std::vector<int> a(n, 0);
  for (int total = 0; total <= K; ++total) {
    // all a with |a| = total, lexicographic
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == n - 1) {
        a[pos] = left;
        out.push_back(a);
        return;
      }
      for (int v = left; v >= 0; --v) {
        a[pos] = v;
        rec(pos + 1, left - v);
      }
    };
    rec(0, total);
  }
}

}  // namespace

int TaylorEvaluator::order_for(const GridSpec& spec, double dmax, bool with_gradient) {
  const double reach = static_cast<double>(spec.n) * spec.M;
  const double r = reach * dmax;
  if (r == 0.0) return 0;
  if (r > 2.0) return -1;
  const double target = 1e-17 / (with_gradient ? reach : 1.0);
  double term = std::exp(r) * r;  // e^r r^{K+1} / (K+1)! at K = 0
  int K = 0;
  while (term > target) {
    ++K;
    term *= r / (K + 1);
    if (K > 16) return -1;
  }
  return K;
}

TaylorEvaluator::TaylorEvaluator(const TorusField& f, double dmax, bool with_gradient)
    : spec_(f.spec), comps_(f.comps()), dmax_(dmax), grad_(with_gradient) {
  K_ = order_for(spec_, dmax, with_gradient);
  if (K_ < 0) throw DomainError("TaylorEvaluator: displacement too large for a short series");
  const int n = spec_.n;
  multi_indices_upto(n, K_ + (with_gradient ? 1 : 0), alphas_);
  const auto& t = tables(spec_);
  const std::size_t L = f.L();
  samples_.resize(alphas_.size());
  inv_fact_.resize(alphas_.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t a = 0; a < alphas_.size(); ++a) {
    const auto& al = alphas_[a];
    double fact = 1.0;
    for (int v : al)
      for (int m = 2; m <= v; ++m) fact *= m;
    inv_fact_[a] = 1.0 / fact;
    GridValues g(spec_, f.shape);
    std::vector<cplx> tmp(L);
    for (int c = 0; c < comps_; ++c) {
      for (std::size_t i = 0; i < L; ++i) {
        cplx w = f.at(c, i);
        if (w == 0.0) {
          tmp[i] = 0.0;
          continue;
        }
        for (int d = 0; d < n; ++d)
          for (int m = 0; m < al[d]; ++m) w *= cplx(0.0, t.xi[i * n + d]);
        tmp[i] = w;
      }
      synthesize_component(spec_, tmp.data(), g.comp(c));
    }
    samples_[a] = std::move(g);
  }
  shift_.assign(n, std::vector<int>(alphas_.size(), -1));
  for (std::size_t a = 0; a < alphas_.size(); ++a)
    for (int k = 0; k < n; ++k) {
      std::vector<int> b = alphas_[a];
      ++b[k];
      for (std::size_t c = 0; c < alphas_.size(); ++c)
        if (alphas_[c] == b) {
          shift_[k][a] = static_cast<int>(c);
          break;
        }
    }
}

void TaylorEvaluator::evaluate(const std::vector<double>& disp, int deriv, std::vector<cplx>& out) const {
  const int n = spec_.n;
  const std::size_t P = spec_.grid_size();
  if (disp.size() != P * n) throw ShapeError("TaylorEvaluator: one displacement per grid node expected");
  if (deriv >= 0 && (deriv >= n || !grad_))
    throw DomainError("TaylorEvaluator: gradient not prepared");
  out.assign(static_cast<std::size_t>(comps_) * P, 0.0);
  // Terms with |alpha| <= K only; alpha + e_k for the gradient.
  std::vector<std::size_t> use;
  for (std::size_t a = 0; a < alphas_.size(); ++a) {
    int tot = 0;
    for (int v : alphas_[a]) tot += v;
    if (tot <= K_) use.push_back(a);
  }
  double worst = 0.0;
  for (double d : disp) worst = std::max(worst, std::abs(d));
  if (worst > dmax_ * (1.0 + 1e-12)) throw DomainError("TaylorEvaluator: displacement exceeds its bound");
#pragma omp parallel
  {
    std::vector<double> pw(static_cast<std::size_t>(n) * (K_ + 1));
#pragma omp for schedule(static)
    for (std::size_t p = 0; p < P; ++p) {
      for (int d = 0; d < n; ++d) {
        pw[d * (K_ + 1)] = 1.0;
        for (int m = 1; m <= K_; ++m) pw[d * (K_ + 1) + m] = pw[d * (K_ + 1) + m - 1] * disp[p * n + d];
      }
      for (int c = 0; c < comps_; ++c) {
        cplx s = 0.0;
        for (std::size_t a : use) {
          const int src = deriv < 0 ? static_cast<int>(a) : shift_[deriv][a];
          double w = inv_fact_[a];
          for (int d = 0; d < n; ++d) w *= pw[d * (K_ + 1) + alphas_[a][d]];
          s += w * samples_[src].comp(c)[p];
        }
        out[c * P + p] = s;
      }
    }
  }
}

}  // namespace paratorus
