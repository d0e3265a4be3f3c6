#include "paratorus/paracalculus.hpp"

#include <algorithm>
#include <cmath>

namespace paratorus {

namespace {

// acc += a * b pointwise (matrix product, scalars broadcast).
void multiply_add(const cplx* const* a, Shape sa, const cplx* const* b, Shape sb, cplx* const* acc,
                  std::size_t P) {
  const Shape s = product_shape(sa, sb);
  if (sa.scalar() || sb.scalar()) {
    const bool as = sa.scalar();
    for (int k = 0; k < s.comps(); ++k) {
      const cplx* x = as ? a[0] : b[0];
      const cplx* y = as ? b[k] : a[k];
      cplx* o = acc[k];
      for (std::size_t p = 0; p < P; ++p) o[p] += x[p] * y[p];
    }
    return;
  }
  const int R = sa.rows, K = sa.cols, C = sb.cols;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      cplx* o = acc[r * C + c];
      for (int k = 0; k < K; ++k) {
        const cplx* x = a[r * K + k];
        const cplx* y = b[k * C + c];
        for (std::size_t p = 0; p < P; ++p) o[p] += x[p] * y[p];
      }
    }
}

// Coefficient-space product of a constant matrix with a field at index i.
void const_times(const std::vector<cplx>& m, Shape sm, const TorusField& u, std::size_t i, bool left,
                 double w, TorusField& out) {
  const Shape su = u.shape;
  const Shape so = out.shape;
  if (sm.scalar()) {
    for (int k = 0; k < su.comps(); ++k) out.at(k, i) += w * m[0] * u.at(k, i);
    return;
  }
  if (su.scalar()) {
    for (int k = 0; k < sm.comps(); ++k) out.at(k, i) += w * m[k] * u.at(0, i);
    return;
  }
  if (left) {
    for (int r = 0; r < so.rows; ++r)
      for (int c = 0; c < so.cols; ++c) {
        cplx s = 0.0;
        for (int k = 0; k < sm.cols; ++k) s += m[r * sm.cols + k] * u.at(k * su.cols + c, i);
        out.at(r * so.cols + c, i) += w * s;
      }
  } else {
    for (int r = 0; r < so.rows; ++r)
      for (int c = 0; c < so.cols; ++c) {
        cplx s = 0.0;
        for (int k = 0; k < su.cols; ++k) s += u.at(r * su.cols + k, i) * m[k * sm.cols + c];
        out.at(r * so.cols + c, i) += w * s;
      }
  }
}

bool block_is_zero(const TorusField& u, const std::vector<std::size_t>& support) {
  for (int k = 0; k < u.comps(); ++k) {
    const cplx* c = u.comp(k);
    for (std::size_t i : support)
      if (c[i] != 0.0) return false;
  }
  return true;
}

}  // namespace

Paraproduct::Paraproduct(const TorusField& a) : a_(a), mean_(average(a)) {
  const GridSpec& spec = a.spec;
  const auto& t = tables(spec);
  for (int j = 4; j <= spec.J; ++j) {
    GridValues g(spec, a.shape);
    std::vector<cplx> tmp(a.L());
    const auto& w = t.low_weights(j - 3);
    for (int k = 0; k < a.comps(); ++k) {
      const cplx* src = a.comp(k);
      for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = src[i] * w[i];
      synthesize_component(spec, tmp.data(), g.comp(k));
    }
    low_.push_back(std::move(g));
  }
}

TorusField Paraproduct::apply(const TorusField& u, Side side) const {
  require_same_spec(a_, u, "paraproduct");
  const bool left = side != Side::right;
  const Shape so = left ? product_shape(a_.shape, u.shape) : product_shape(u.shape, a_.shape);
  const GridSpec& spec = u.spec;
  const auto& t = tables(spec);
  TorusField out(spec, so, parity_product(a_.parity, u.parity));
  const std::size_t L = u.L(), P = spec.grid_size();

  // Blocks j <= 3 see only the mean of a.
  const auto& w3 = t.low_weights(std::min(3, spec.J));
  for (std::size_t i = 0; i < L; ++i)
    if (w3[i] != 0.0) const_times(mean_, a_.shape, u, i, left, w3[i], out);

  if (spec.J < 4) return out;
  GridValues acc(spec, so);
  GridValues ub(spec, u.shape);
  std::vector<cplx> tmp(L);
  bool any = false;
  std::vector<const cplx*> pa(a_.comps()), pu(u.comps());
  std::vector<cplx*> po(so.comps());
  for (int k = 0; k < so.comps(); ++k) po[k] = acc.comp(k);
  for (int j = 4; j <= spec.J; ++j) {
    const auto& sup = t.block_support[j];
    if (sup.empty() || block_is_zero(u, sup)) continue;
    const auto& w = t.block[j];
    for (int k = 0; k < u.comps(); ++k) {
      std::fill(tmp.begin(), tmp.end(), cplx(0.0));
      const cplx* src = u.comp(k);
      for (std::size_t i : sup) tmp[i] = src[i] * w[i];
      synthesize_component(spec, tmp.data(), ub.comp(k));
      pu[k] = ub.comp(k);
    }
    const GridValues& lo = low_[j - 4];
    for (int k = 0; k < a_.comps(); ++k) pa[k] = lo.comp(k);
    if (left)
      multiply_add(pa.data(), a_.shape, pu.data(), u.shape, po.data(), P);
    else
      multiply_add(pu.data(), u.shape, pa.data(), a_.shape, po.data(), P);
    any = true;
  }
  if (any) out += analyze(acc, out.parity);
  return out;
}

TorusField Paraproduct::apply_transport(const TorusField& w) const {
  const GridSpec& spec = w.spec;
  const int n = spec.n;
  if (a_.shape != Shape::vec(n)) throw ShapeError("transport: symbol must be an n-vector field");
  require_same_spec(a_, w, "transport");
  const auto& t = tables(spec);
  const std::size_t L = w.L(), P = spec.grid_size();
  const int C = w.comps();
  TorusField out(spec, w.shape, parity_product(a_.parity, parity_flip(w.parity)));

  const auto& w3 = t.low_weights(std::min(3, spec.J));
  for (int c = 0; c < C; ++c)
    for (std::size_t i = 0; i < L; ++i) {
      if (w3[i] == 0.0) continue;
      cplx s = 0.0;
      for (int k = 0; k < n; ++k) s += mean_[k] * cplx(0.0, t.xi[i * n + k]);
      out.at(c, i) += w3[i] * s * w.at(c, i);
    }
  if (spec.J < 4) return out;

  cvec acc(P), blk(P);
  std::vector<cplx> tmp(L);
  for (int c = 0; c < C; ++c) {
    std::fill(acc.begin(), acc.end(), cplx(0.0));
    bool any = false;
    const cplx* src = w.comp(c);
    for (int j = 4; j <= spec.J; ++j) {
      const auto& sup = t.block_support[j];
      bool zero = true;
      for (std::size_t i : sup)
        if (src[i] != 0.0) {
          zero = false;
          break;
        }
      if (zero) continue;
      const auto& wj = t.block[j];
      for (int k = 0; k < n; ++k) {
        std::fill(tmp.begin(), tmp.end(), cplx(0.0));
        for (std::size_t i : sup) tmp[i] = src[i] * wj[i] * cplx(0.0, t.xi[i * n + k]);
        synthesize_component(spec, tmp.data(), blk.data());
        const cplx* lo = low_[j - 4].comp(k);
        for (std::size_t p = 0; p < P; ++p) acc[p] += lo[p] * blk[p];
      }
      any = true;
    }
    if (!any) continue;
    analyze_component(spec, acc.data(), tmp.data());
    cplx* dst = out.comp(c);
    for (std::size_t i = 0; i < L; ++i) dst[i] += tmp[i];
  }
  return out;
}

TorusField paraproduct(const TorusField& a, const TorusField& u, Side side) {
  return Paraproduct(a).apply(u, side);
}

TorusField paraproduct_reference(const TorusField& a, const TorusField& u, Side side) {
  const bool left = side != Side::right;
  const Shape so = left ? product_shape(a.shape, u.shape) : product_shape(u.shape, a.shape);
  TorusField out(u.spec, so, parity_product(a.parity, u.parity));
  for (int j = 0; j <= u.spec.J; ++j) {
    TorusField lo = lp_low(a, j - 3), blk = lp_block(u, j);
    out += left ? multiply(lo, blk) : multiply(blk, lo);
  }
  out.parity = parity_product(a.parity, u.parity);
  return out;
}

TorusField pm_remainder(const TorusField& a, const TorusField& u, Side side) {
  const bool left = side != Side::right;
  if (left) {
    TorusField r = multiply(a, u);
    r -= paraproduct(a, u, Side::left);
    r -= paraproduct(u, a, Side::right);
    r.parity = parity_product(a.parity, u.parity);
    return r;
  }
  TorusField r = multiply(u, a);
  r -= paraproduct(a, u, Side::right);
  r -= paraproduct(u, a, Side::left);
  r.parity = parity_product(a.parity, u.parity);
  return r;
}

TorusField pm_remainder_diagonal(const TorusField& a, const TorusField& u, Side side) {
  const bool left = side != Side::right;
  const Shape so = left ? product_shape(a.shape, u.shape) : product_shape(u.shape, a.shape);
  TorusField out(u.spec, so, parity_product(a.parity, u.parity));
  const int J = u.spec.J;
  std::vector<TorusField> ab, ub;
  for (int j = 0; j <= J; ++j) {
    ab.push_back(lp_block(a, j));
    ub.push_back(lp_block(u, j));
  }
  auto pair = [&](int j, int k) { return left ? multiply(ab[j], ub[k]) : multiply(ub[k], ab[j]); };
  for (int j = 0; j <= J; ++j)
    for (int k = std::max(0, j - 2); k <= std::min(J, j + 2); ++k) out += pair(j, k);
  // S_{j-3} is the mean block for j <= 3, so each paraproduct also holds the
  // pairs (0, 0), (0, 1), (0, 2) of its own orientation.
  for (int k = 0; k <= std::min(J, 2); ++k) {
    out -= pair(0, k);
    out -= pair(k, 0);
  }
  out.parity = parity_product(a.parity, u.parity);
  return out;
}

TorusField cm_remainder_apply(const TorusField& a, const TorusField& b, const TorusField& u, Side side) {
  const bool left = side != Side::right;
  TorusField inner = paraproduct(b, u, side);
  TorusField r = paraproduct(a, inner, side);
  TorusField ab = left ? multiply(a, b) : multiply(b, a);
  r -= paraproduct(ab, u, side);
  r.parity = parity_product(parity_product(a.parity, b.parity), u.parity);
  return r;
}

namespace {
std::vector<double> real_samples(const TorusField& u) {
  GridValues g = synthesize(u);
  std::vector<double> z(g.v.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = g.v[i].real();
  return z;
}
}  // namespace

TorusField apply_map(const NonlinearMap& F, const TorusField& u, Parity parity) {
  const GridSpec& spec = u.spec;
  if (u.comps() != F.in_dim) throw ShapeError("apply_map: argument dimension mismatch");
  const std::vector<double> z = real_samples(u);
  const std::size_t P = spec.grid_size();
  GridValues out(spec, F.out_dim == 1 ? Shape::scalar_shape() : Shape::vec(F.out_dim));
#pragma omp parallel
  {
    std::vector<double> x(spec.n), zz(F.in_dim), val(F.out_dim);
#pragma omp for
    for (std::size_t p = 0; p < P; ++p) {
      grid_point(spec, p, x.data());
      for (int k = 0; k < F.in_dim; ++k) zz[k] = z[k * P + p];
      F.value(x.data(), zz.data(), val.data());
      for (int k = 0; k < F.out_dim; ++k) out.comp(k)[p] = val[k];
    }
  }
  return analyze(out, parity);
}

TorusField apply_jacobian(const NonlinearMap& F, const TorusField& u, Parity parity) {
  const GridSpec& spec = u.spec;
  if (u.comps() != F.in_dim) throw ShapeError("apply_jacobian: argument dimension mismatch");
  const std::vector<double> z = real_samples(u);
  const std::size_t P = spec.grid_size();
  const int C = F.out_dim * F.in_dim;
  GridValues out(spec, Shape::mat(F.out_dim, F.in_dim));
#pragma omp parallel
  {
    std::vector<double> x(spec.n), zz(F.in_dim), jac(C);
#pragma omp for
    for (std::size_t p = 0; p < P; ++p) {
      grid_point(spec, p, x.data());
      for (int k = 0; k < F.in_dim; ++k) zz[k] = z[k * P + p];
      F.jac_z(x.data(), zz.data(), jac.data());
      for (int k = 0; k < C; ++k) out.comp(k)[p] = jac[k];
    }
  }
  return analyze(out, parity);
}

Paralinearization paralinearize(const NonlinearMap& F, const TorusField& u, Parity coef_parity,
                                Parity rem_parity) {
  Paralinearization r;
  r.coef = apply_jacobian(F, u, coef_parity);
  TorusField zero(u.spec, u.shape, u.parity);
  TorusField Fu = apply_map(F, u, rem_parity);
  TorusField F0 = apply_map(F, zero, rem_parity);
  r.remainder = Fu - F0;
  TorusField Tu = paraproduct(r.coef, u, Side::left);
  if (Tu.shape != r.remainder.shape) Tu.shape = r.remainder.shape;  // m x 1 vs scalar when m = 1
  r.remainder -= Tu;
  r.remainder.parity = rem_parity;
  return r;
}

TorusField neumann_inverse(const Paraproduct& w, const TorusField& g, double rel_tol, int max_terms,
                           NeumannInfo* info) {
  TorusField sum = g, term = g;
  double prev = sobolev_norm(g, 0.0);
  const double g0 = prev;
  int k = 0;
  double ratio = 0.0;
  if (g0 == 0.0) {
    if (info) *info = {0, 0.0};
    return sum;
  }
  for (k = 1; k <= max_terms; ++k) {
    term = w.apply(term, Side::left);
    term *= -1.0;
    const double tn = sobolev_norm(term, 0.0);
    sum += term;
    ratio = prev > 0 ? tn / prev : 0.0;
    prev = tn;
    if (tn <= rel_tol * sobolev_norm(sum, 0.0)) break;
    if (ratio >= 1.0 && k > 3) throw DomainError("neumann series: paraproduct not small enough to invert");
  }
  sum.parity = g.parity;
  if (info) *info = {k, ratio};
  return sum;
}

}  // namespace paratorus
