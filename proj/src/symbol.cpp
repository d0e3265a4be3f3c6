#include "paratorus/symbol.hpp"

#include <algorithm>
#include <cmath>

namespace paratorus {

GridSymbol::GridSymbol(const GridSpec& s, double m)
    : spec(s), order(m), values(s.lattice_size() * s.grid_size()) {}

GridSymbol GridSymbol::from_function(const GridSpec& s, double m, const Fn& fn) {
  GridSymbol a(s, m);
  const auto& t = tables(s);
  const std::size_t L = s.lattice_size(), P = s.grid_size();
#pragma omp parallel
  {
    std::vector<double> x(s.n);
#pragma omp for
    for (std::size_t p = 0; p < P; ++p) {
      grid_point(s, p, x.data());
      for (std::size_t e = 0; e < L; ++e) a.values[e * P + p] = fn(x.data(), t.point(e));
    }
  }
  return a;
}

GridSymbol GridSymbol::from_field(const TorusField& f) {
  if (!f.shape.scalar()) throw ShapeError("GridSymbol: scalar fields only");
  GridSymbol a(f.spec, 0.0);
  GridValues g = synthesize(f);
  const std::size_t L = f.spec.lattice_size(), P = g.P();
  for (std::size_t e = 0; e < L; ++e) std::copy(g.v.begin(), g.v.end(), a.values.begin() + e * P);
  return a;
}

GridSymbol& GridSymbol::operator+=(const GridSymbol& o) {
  if (spec != o.spec) throw ShapeError("symbol add: specs differ");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  order = std::max(order, o.order);
  return *this;
}

GridSymbol& GridSymbol::operator-=(const GridSymbol& o) {
  if (spec != o.spec) throw ShapeError("symbol subtract: specs differ");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  order = std::max(order, o.order);
  return *this;
}

double cutoff_chi(const GridSpec& spec, std::size_t zeta, std::size_t eta) {
  const auto& t = tables(spec);
  double s = 0.0;
  for (int j = 0; j <= spec.J; ++j) {
    const double w = t.block[j][eta];
    if (w != 0.0) s += t.low_weights(j - 3)[zeta] * w;
  }
  return s;
}

namespace {

TorusField paradiff_core(const GridSymbol& a, const TorusField& u, bool parallel) {
  if (a.spec != u.spec) throw ShapeError("paradiff_apply: specs differ");
  const GridSpec& spec = u.spec;
  const auto& t = tables(spec);
  const std::size_t L = spec.lattice_size(), P = spec.grid_size();
  const int n = spec.n, M = spec.M, S = spec.side();
  TorusField out(spec, u.shape, Parity::none);

  // Spatial transforms a^(zeta, eta) for every eta with u^(eta) != 0.
  std::vector<char> live(L, 0);
  for (int c = 0; c < u.comps(); ++c)
    for (std::size_t e = 0; e < L; ++e)
      if (u.at(c, e) != 0.0) live[e] = 1;
  std::vector<cplx> ahat(L * L);
#pragma omp parallel if (parallel)
  {
    cvec buf(P);
#pragma omp for schedule(dynamic, 8)
    for (std::size_t e = 0; e < L; ++e) {
      if (!live[e]) continue;
      std::copy(a.at_freq(e), a.at_freq(e) + P, buf.begin());
      analyze_component(spec, buf.data(), ahat.data() + e * L);
    }
  }
  // Per-eta cutoff pieces: at most a couple of blocks meet each eta.
  std::vector<std::vector<std::pair<int, double>>> pieces(L);
  for (std::size_t e = 0; e < L; ++e)
    for (int j = 0; j <= spec.J; ++j)
      if (t.block[j][e] != 0.0) pieces[e].push_back({j, t.block[j][e]});

#pragma omp parallel for if (parallel) schedule(dynamic, 16)
  for (std::size_t x = 0; x < L; ++x) {
    const int* xi = t.point(x);
    std::vector<cplx> acc(u.comps(), 0.0);
    for (std::size_t e = 0; e < L; ++e) {
      if (!live[e]) continue;
      const int* eta = t.point(e);
      std::size_t z = 0;
      bool inside = true;
      for (int d = 0; d < n; ++d) {
        const int k = xi[d] - eta[d];
        if (k < -M || k > M) {
          inside = false;
          break;
        }
        z = z * S + static_cast<std::size_t>(k + M);
      }
      if (!inside) continue;
      double chi = 0.0;
      for (const auto& [j, w] : pieces[e]) chi += t.low_weights(j - 3)[z] * w;
      if (chi == 0.0) continue;
      const cplx m = chi * ahat[e * L + z];
      for (int c = 0; c < u.comps(); ++c) acc[c] += m * u.at(c, e);
    }
    for (int c = 0; c < u.comps(); ++c) out.at(c, x) = acc[c];
  }
  return out;
}

// Wave number of FFT position i along one axis.
inline int wave(int i, int G) { return i < G / 2 ? i : (i == G / 2 ? 0 : i - G); }

// Spectral x-derivative d^alpha of grid samples (length G^n), in place.
void grid_derivative(const GridSpec& spec, cplx* data, const std::vector<int>& alpha) {
  bool any = false;
  for (int a : alpha) any = any || a > 0;
  if (!any) return;
  const auto& fft = FftEngine::get(spec.n, spec.G);
  fft.forward(data);
  const std::size_t P = spec.grid_size();
  const double scale = 1.0 / static_cast<double>(P);
  std::vector<int> idx(spec.n);
  for (std::size_t p = 0; p < P; ++p) {
    std::size_t r = p;
    cplx f = scale;
    for (int d = spec.n - 1; d >= 0; --d) {
      const int k = wave(static_cast<int>(r % spec.G), spec.G);
      r /= spec.G;
      for (int m = 0; m < alpha[d]; ++m) f *= cplx(0.0, k);
    }
    data[p] *= f;
  }
  fft.backward(data);
}

// Centered lattice difference in direction k (one-sided at the boundary).
GridSymbol xi_difference(const GridSymbol& a, int k) {
  const GridSpec& spec = a.spec;
  const auto& t = tables(spec);
  const std::size_t L = spec.lattice_size(), P = spec.grid_size();
  std::size_t stride = 1;
  for (int d = spec.n - 1; d > k; --d) stride *= spec.side();
  GridSymbol out(spec, a.order - 1.0);
  for (std::size_t e = 0; e < L; ++e) {
    const int c = t.point(e)[k];
    const bool lo = c > -spec.M, hi = c < spec.M;
    const cplx* f = a.at_freq(e);
    cplx* o = out.at_freq(e);
    if (lo && hi) {
      const cplx* fp = a.at_freq(e + stride);
      const cplx* fm = a.at_freq(e - stride);
      for (std::size_t p = 0; p < P; ++p) o[p] = 0.5 * (fp[p] - fm[p]);
    } else if (hi) {
      const cplx* fp = a.at_freq(e + stride);
      for (std::size_t p = 0; p < P; ++p) o[p] = fp[p] - f[p];
    } else if (lo) {
      const cplx* fm = a.at_freq(e - stride);
      for (std::size_t p = 0; p < P; ++p) o[p] = f[p] - fm[p];
    }
  }
  return out;
}

GridSymbol x_derivative(const GridSymbol& a, const std::vector<int>& alpha) {
  GridSymbol out = a;
  const std::size_t L = a.spec.lattice_size();
#pragma omp parallel for
  for (std::size_t e = 0; e < L; ++e) grid_derivative(a.spec, out.at_freq(e), alpha);
  return out;
}

GridSymbol xi_derivative(const GridSymbol& a, const std::vector<int>& alpha) {
  GridSymbol out = a;
  for (int k = 0; k < static_cast<int>(alpha.size()); ++k)
    for (int m = 0; m < alpha[k]; ++m) out = xi_difference(out, k);
  return out;
}

// All multi-indices of length n with |alpha| <= r.
void multi_indices(int n, int r, std::vector<int>& cur, int pos, std::vector<std::vector<int>>& out) {
  if (pos == n) {
    out.push_back(cur);
    return;
  }
  int used = 0;
  for (int d = 0; d < pos; ++d) used += cur[d];
  for (int a = 0; a + used <= r; ++a) {
    cur[pos] = a;
    multi_indices(n, r, cur, pos + 1, out);
  }
  cur[pos] = 0;
}

cplx expansion_weight(const std::vector<int>& alpha) {
  // 1 / (i^|alpha| alpha!)
  int total = 0;
  double fact = 1.0;
  for (int a : alpha) {
    total += a;
    for (int m = 2; m <= a; ++m) fact *= m;
  }
  cplx ipow = 1.0;
  for (int m = 0; m < total; ++m) ipow *= cplx(0.0, 1.0);
  return 1.0 / (ipow * fact);
}

}  // namespace

TorusField paradiff_apply(const GridSymbol& a, const TorusField& u) { return paradiff_core(a, u, true); }
TorusField paradiff_apply_serial(const GridSymbol& a, const TorusField& u) { return paradiff_core(a, u, false); }

GridSymbol symbol_sharp(const GridSymbol& a, const GridSymbol& b, int r) {
  if (r < 0) throw DomainError("symbol_sharp: r must be >= 0");
  if (a.spec != b.spec) throw ShapeError("symbol_sharp: specs differ");
  std::vector<std::vector<int>> alphas;
  std::vector<int> cur(a.spec.n, 0);
  multi_indices(a.spec.n, r, cur, 0, alphas);
  GridSymbol out(a.spec, a.order + b.order);
  for (const auto& alpha : alphas) {
    const GridSymbol da = xi_derivative(a, alpha);
    const GridSymbol db = x_derivative(b, alpha);
    const cplx w = expansion_weight(alpha);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += w * da.values[i] * db.values[i];
  }
  return out;
}

GridSymbol symbol_adjoint(const GridSymbol& a, int r) {
  if (r < 0) throw DomainError("symbol_adjoint: r must be >= 0");
  GridSymbol conj_a = a;
  for (auto& v : conj_a.values) v = std::conj(v);
  std::vector<std::vector<int>> alphas;
  std::vector<int> cur(a.spec.n, 0);
  multi_indices(a.spec.n, r, cur, 0, alphas);
  GridSymbol out(a.spec, a.order);
  for (const auto& alpha : alphas) {
    const GridSymbol d = x_derivative(xi_derivative(conj_a, alpha), alpha);
    const cplx w = expansion_weight(alpha);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += w * d.values[i];
  }
  return out;
}

double homogeneity_defect(const GridSymbol& a, double degree) {
  const GridSpec& spec = a.spec;
  const auto& t = tables(spec);
  const std::size_t L = spec.lattice_size(), P = spec.grid_size();
  const double f = std::pow(2.0, degree);
  double m = 0.0;
  std::vector<int> twice(spec.n);
  for (std::size_t e = 0; e < L; ++e) {
    if (t.norm[e] < 1.0) continue;
    const int* xi = t.point(e);
    for (int d = 0; d < spec.n; ++d) twice[d] = 2 * xi[d];
    if (!t.in_lattice(twice.data())) continue;
    const cplx* v1 = a.at_freq(e);
    const cplx* v2 = a.at_freq(t.index_of(twice.data()));
    for (std::size_t p = 0; p < P; ++p) m = std::max(m, std::abs(v2[p] - f * v1[p]));
  }
  return m;
}

TorusField DifferentialSymbol::apply(const TorusField& u) const {
  TorusField out = Paraproduct(velocity).apply_transport(u);
  if (zeroth) {
    TorusField z = Paraproduct(*zeroth).apply(u, Side::left);
    if (z.shape != out.shape) z.shape = out.shape;
    Parity p = out.parity;
    out += z;
    out.parity = parity_sum(p, z.parity);
  }
  return out;
}

GridSymbol DifferentialSymbol::to_grid_symbol() const {
  const GridSpec& spec = velocity.spec;
  if (zeroth && !zeroth->shape.scalar()) throw ShapeError("to_grid_symbol: scalar zeroth-order part only");
  const auto& t = tables(spec);
  GridValues v = synthesize(velocity);
  GridValues b;
  if (zeroth) b = synthesize(*zeroth);
  GridSymbol a(spec, 1.0);
  const std::size_t L = spec.lattice_size(), P = spec.grid_size();
  for (std::size_t e = 0; e < L; ++e) {
    const int* xi = t.point(e);
    cplx* o = a.at_freq(e);
    for (std::size_t p = 0; p < P; ++p) {
      cplx s = 0.0;
      for (int d = 0; d < spec.n; ++d) s += v.comp(d)[p] * static_cast<double>(xi[d]);
      o[p] = cplx(0.0, 1.0) * s + (zeroth ? b.v[p] : cplx(0.0));
    }
  }
  return a;
}

}  // namespace paratorus
