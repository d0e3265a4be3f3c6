#include "paratorus/field_ops.hpp"

#include <cmath>

namespace paratorus {

// Nested contraction: for each point build e^{i k y_d} per axis, then sum
// the coefficient array one axis at a time (last axis first).
std::vector<cplx> evaluate_at(const TorusField& u, const std::vector<double>& points) {
  const GridSpec& spec = u.spec;
  const int n = spec.n, S = spec.side(), M = spec.M;
  if (points.size() % n != 0) throw ShapeError("evaluate_at: point array not a multiple of n");
  const std::size_t np = points.size() / n, L = u.L();
  const int C = u.comps();
  std::vector<cplx> out(static_cast<std::size_t>(C) * np);

  // Skip components that are identically zero.
  std::vector<char> live(C, 0);
  for (int c = 0; c < C; ++c)
    for (std::size_t i = 0; i < L && !live[c]; ++i)
      if (u.at(c, i) != 0.0) live[c] = 1;

#pragma omp parallel
  {
    std::vector<cplx> e(static_cast<std::size_t>(n) * S);
    std::vector<cplx> buf(L), next(L);
#pragma omp for schedule(static)
    for (std::size_t p = 0; p < np; ++p) {
      for (int d = 0; d < n; ++d) {
        const double y = points[p * n + d];
        for (int k = -M; k <= M; ++k) e[d * S + (k + M)] = std::polar(1.0, k * y);
      }
      for (int c = 0; c < C; ++c) {
        if (!live[c]) {
          out[c * np + p] = 0.0;
          continue;
        }
        const cplx* src = u.comp(c);
        std::size_t len = L;
        for (int d = n - 1; d >= 0; --d) {
          const cplx* ed = e.data() + d * S;
          const std::size_t outer = len / S;
          cplx* target = ((n - 1 - d) % 2 == 0) ? buf.data() : next.data();
          for (std::size_t o = 0; o < outer; ++o) {
            const cplx* row = src + o * S;
            double re = 0.0, im = 0.0;
            for (int k = 0; k < S; ++k) {
              const double a = row[k].real(), b = row[k].imag();
              const double x = ed[k].real(), z = ed[k].imag();
              re += a * x - b * z;
              im += a * z + b * x;
            }
            target[o] = cplx(re, im);
          }
          src = target;
          len = outer;
        }
        out[c * np + p] = src[0];
      }
    }
  }
  return out;
}

std::vector<cplx> evaluate_at_serial(const TorusField& u, const std::vector<double>& points) {
  const GridSpec& spec = u.spec;
  const int n = spec.n;
  const auto& t = tables(spec);
  const std::size_t np = points.size() / n, L = u.L();
  std::vector<cplx> out(static_cast<std::size_t>(u.comps()) * np);
  for (std::size_t p = 0; p < np; ++p)
    for (int c = 0; c < u.comps(); ++c) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < L; ++i) {
        double ph = 0.0;
        for (int d = 0; d < n; ++d) ph += t.xi[i * n + d] * points[p * n + d];
        s += u.at(c, i) * std::polar(1.0, ph);
      }
      out[c * np + p] = s;
    }
  return out;
}

}  // namespace paratorus
