#pragma once

#include "paratorus/fft.hpp"
#include "paratorus/field_ops.hpp"
#include "paratorus/grid.hpp"

#include <functional>
#include <vector>

namespace paratorus {

// Multiplication order inside T_a u.  left: (S a)(Delta u); right:
// (Delta u)(S a).  For scalar symbols or arguments the two coincide.
enum class Side { scalar, left, right };

// Paraproduct operator T_a u = sum_j (S_{j-3} a)(Delta_j u) with the symbol's
// low-frequency pieces cached on the grid, so repeated applications cost
// one synthesis per block of u plus one analysis.
class Paraproduct {
 public:
  Paraproduct() = default;
  explicit Paraproduct(const TorusField& a);

  TorusField apply(const TorusField& u, Side side = Side::left) const;
  // sum_k T_{a_k} d_k w for an n-vector symbol a (transport term).
  TorusField apply_transport(const TorusField& w) const;

  const TorusField& symbol() const { return a_; }

 private:
  TorusField a_;
  std::vector<cplx> mean_;
  std::vector<GridValues> low_;  // low_[j - 4] = samples of S_{j-3} a, j = 4..J
};

TorusField paraproduct(const TorusField& a, const TorusField& u, Side side = Side::left);
// Block-by-block evaluation through dealiased products; slow, used as oracle.
TorusField paraproduct_reference(const TorusField& a, const TorusField& u, Side side = Side::left);

// a u - T_a u - T_u a (left: products ordered a*u).
TorusField pm_remainder(const TorusField& a, const TorusField& u, Side side = Side::left);
// sum over |j - k| < 3 of Delta_j a Delta_k u, less the mean-block pairs
// (0, k), (k, 0), k <= 2, that both paraproducts already contain.
TorusField pm_remainder_diagonal(const TorusField& a, const TorusField& u, Side side = Side::left);

// T_a T_b u - T_{ab} u (for right: T_a T_b u - T_{ba} u, matching order).
TorusField cm_remainder_apply(const TorusField& a, const TorusField& b, const TorusField& u,
                              Side side = Side::left);

// Smooth map (x, z) -> R^m with z in R^N and its z-Jacobian (m x N, row-major).
struct NonlinearMap {
  int in_dim = 1;
  int out_dim = 1;
  std::function<void(const double* x, const double* z, double* out)> value;
  std::function<void(const double* x, const double* z, double* jac)> jac_z;
};

struct Paralinearization {
  TorusField coef;       // F'_z(x, u(x)), shape out x in
  TorusField remainder;  // F(x,u) - F(x,0) - T_coef u
};

Paralinearization paralinearize(const NonlinearMap& F, const TorusField& u,
                                Parity coef_parity = Parity::none, Parity rem_parity = Parity::none);

// Sample F(x, u(x)) on the grid and truncate.
TorusField apply_map(const NonlinearMap& F, const TorusField& u, Parity parity = Parity::none);
TorusField apply_jacobian(const NonlinearMap& F, const TorusField& u, Parity parity = Parity::none);

// Neumann-series inverse of v -> v + T_w v: sum_k (-T_w)^k g, stopped when the
// term norm drops below rel_tol times the running sum (at most max_terms).
struct NeumannInfo {
  int terms = 0;
  double last_ratio = 0.0;
};
TorusField neumann_inverse(const Paraproduct& w, const TorusField& g, double rel_tol = 1e-16,
                           int max_terms = 60, NeumannInfo* info = nullptr);

}  // namespace paratorus
