#pragma once

#include "paratorus/demos.hpp"
#include "paratorus/field_ops.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace testing_support {

using namespace paratorus;

inline TorusField rnd(const GridSpec& spec, Shape sh, Parity p, std::uint64_t seed, double amp = 1.0,
                      int max_mode = -1, double decay = 0.3) {
  return random_field(spec, sh, p, amp, max_mode < 0 ? spec.M : max_mode, decay, seed);
}

inline TorusField plane_wave(const GridSpec& spec, const std::vector<int>& k, cplx c = 1.0) {
  TorusField u(spec, Shape::scalar_shape());
  u.at(0, tables(spec).index_of(k.data())) = c;
  return u;
}

inline double max_diff(const TorusField& a, const TorusField& b) { return max_abs_coeff(a - b); }

// least-squares slope of log y against log x
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace testing_support
