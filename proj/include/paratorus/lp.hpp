#pragma once

#include <cmath>

// Radial Littlewood-Paley bumps.  g = 1 on [0, 1/2], g = 0 on [1, inf),
// smooth in between; psi(xi) = g(|xi|), phi(xi) = psi(xi) - psi(2 xi).
namespace paratorus::lp {

inline double h(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

inline double g(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = h(2.0 - 2.0 * t), b = h(2.0 * t - 1.0);
  return a / (a + b);
}

inline double psi(double r) { return g(r); }
inline double phi(double r) { return g(r) - g(2.0 * r); }

// Weight of S_j at radius r; S_j for j <= 0 is the mean block psi.
inline double low_pass(double r, int j) { return j <= 0 ? psi(r) : psi(std::ldexp(r, -j)); }

// Weight of Delta_j at radius r (Delta_0 = psi).
inline double block(double r, int j) { return j == 0 ? psi(r) : phi(std::ldexp(r, -j)); }

}  // namespace paratorus::lp
