#pragma once

#include "paratorus/fft.hpp"
#include "paratorus/grid.hpp"
#include "paratorus/paracalculus.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace paratorus {

// Scalar symbol a(x, xi) sampled on the spatial grid for every lattice
// frequency.  Storage is xi-major: values[eta * G^n + p].
struct GridSymbol {
  enum class Kind { general, polyhomogeneous };

  GridSpec spec;
  double order = 0.0;
  Kind kind = Kind::general;
  std::vector<double> degrees;  // homogeneity degrees of the components (polyhomogeneous only)
  cvec values;

  GridSymbol() = default;
  GridSymbol(const GridSpec& s, double m);

  std::size_t P() const { return spec.grid_size(); }
  cplx* at_freq(std::size_t eta) { return values.data() + eta * P(); }
  const cplx* at_freq(std::size_t eta) const { return values.data() + eta * P(); }

  using Fn = std::function<cplx(const double* x, const int* xi)>;
  static GridSymbol from_function(const GridSpec& s, double m, const Fn& fn);
  static GridSymbol from_field(const TorusField& a);  // xi-independent symbol

  GridSymbol& operator+=(const GridSymbol& o);
  GridSymbol& operator-=(const GridSymbol& o);
};

// (T_a u)^(xi) = sum_eta chi(xi - eta, eta) a^(xi - eta, eta) u^(eta).
TorusField paradiff_apply(const GridSymbol& a, const TorusField& u);
TorusField paradiff_apply_serial(const GridSymbol& a, const TorusField& u);

// Cutoff chi(zeta, eta) = sum_j S_{j-3}(zeta) phi_j(eta) at lattice indices.
double cutoff_chi(const GridSpec& spec, std::size_t zeta, std::size_t eta);

// Symbolic calculus with lattice finite differences in xi and spectral
// derivatives in x, truncated at |alpha| <= r.
GridSymbol symbol_sharp(const GridSymbol& a, const GridSymbol& b, int r);
GridSymbol symbol_adjoint(const GridSymbol& a, int r);

// Largest |a(x, 2 xi) - 2^deg a(x, xi)| over lattice pairs with |xi| >= 1.
double homogeneity_defect(const GridSymbol& a, double degree);

// First-order differential symbol p(x, xi) = i v(x).xi + B(x), with v an
// n-vector field and B scalar or matrix valued (optional).
struct DifferentialSymbol {
  TorusField velocity;
  std::optional<TorusField> zeroth;

  TorusField apply(const TorusField& u) const;  // T_p u via paraproducts
  GridSymbol to_grid_symbol() const;             // scalar B only
};

}  // namespace paratorus
