#pragma once

#include "paratorus/grid.hpp"
#include "paratorus/paracalculus.hpp"
#include "paratorus/symbol.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace paratorus {

// Sup over the grid of the Frobenius norm of the Jacobian of an n-vector field.
double jacobian_sup(const TorusField& theta);

// Newton inversion of x -> x + theta(x) at every grid node: returns the
// displacement zeta with (Id + theta)^{-1} = Id + zeta.
struct InversionInfo {
  int iterations = 0;
  double residual = 0.0;  // max |y + theta(y) - x_g| over the grid
};
TorusField invert_displacement(const TorusField& theta, double tol = 1e-12, int max_iter = 50,
                               InversionInfo* info = nullptr);

// Near-identity torus map Id + theta.
struct Diffeo {
  TorusField theta;
  std::optional<TorusField> inverse_theta;
  double lip = 0.0;

  // Throws DomainError if lip > lip_max or the grid inversion fails.
  static Diffeo make(const TorusField& theta, bool with_inverse = true, double lip_max = 0.99);
  static Diffeo identity(const GridSpec& spec);

  const TorusField& inverse() const;
  // sup-norm of (Id + theta) o (Id + zeta) - Id on the grid, zeta = inverse_theta.
  double inverse_residual() const;
};

// Homotopy Theta(tau) = tau e^{-(1-tau)<D>} theta and the deformation field
// X(tau) = -(I + d_x Theta)^{-1} d_tau Theta.
struct Deformation {
  TorusField Theta;
  TorusField X;
};
Deformation deformation(const TorusField& theta, double tau);

struct DeformationPath {
  std::vector<double> tau;
  std::vector<TorusField> Theta;
  std::vector<TorusField> X;
  static DeformationPath build(const TorusField& theta, int intervals);
};

enum class Direction { forward, backward };

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Right-hand side data of d_tau w + T_X . grad w + T_B w = f on tau in [0, 1].
struct TransportProblem {
  std::function<TorusField(double)> velocity;                // n-vector field X(tau)
  std::function<TorusField(double)> zeroth;                  // optional B(tau)
  std::function<TorusField(double)> forcing;                 // optional f(tau)
};

TorusField paratransport_solve(const TransportProblem& pb, const TorusField& w0, int steps = 128,
                               Direction dir = Direction::forward);

// Time-one paratransport along the deformation of a displacement theta.
// Velocity paraproducts are cached at the 2 steps + 1 RK4 nodes when they
// fit in memory.
class Paracomposition {
 public:
  Paracomposition(const TorusField& theta, int steps = 128);

  TorusField apply(const TorusField& f) const;             // chi^* f
  TorusField apply_backward(const TorusField& g) const;    // backward RK4 solve
  // Exact inverse of the discrete forward map by defect correction
  // u <- u + B(g - F u); B is the backward solve.
  TorusField invert(const TorusField& g, double rel_tol = 1e-14, int max_iter = 20,
                    int* iterations = nullptr) const;

  int steps() const { return steps_; }
  const TorusField& theta() const { return theta_; }

 private:
  TorusField step(const TorusField& w, double dir) const;
  TorusField rhs(int node, const TorusField& w) const;
  const Paraproduct& node_op(int node, Paraproduct& scratch) const;

  TorusField theta_;
  int steps_;
  bool zero_ = false;
  std::vector<TorusField> X_;      // velocity at tau = node / (2 steps)
  std::vector<Paraproduct> ops_;   // cached, possibly empty
};

TorusField paracompose(const Diffeo& chi, const TorusField& f, bool inverse = false, int steps = 128);

// f o chi - T_{f' o chi} theta - chi^* f as an exact difference.
TorusField refined_paralin_remainder(const TorusField& f, const Diffeo& chi, int steps = 128);
TorusField refined_paralin_remainder(const TorusField& f, const Diffeo& chi, const Paracomposition& pc);

// Conjugated symbol of a first-order differential symbol i v.xi + B:
// velocity chi'^{-1} (v o chi), zeroth-order part B o chi.
DifferentialSymbol conjugation_symbol(const DifferentialSymbol& p, const Diffeo& chi);

// Symbol given pointwise for real x and xi.
using SymbolFn = std::function<cplx(const double* x, const double* xi)>;
// q(x, xi) sampled on grid x lattice; terms = 0 gives p(chi(x), chi'(x)^{-T} xi),
// terms = 1 adds the first-order correction (xi-derivatives by central differences).
GridSymbol conjugation_symbol(const GridSpec& spec, const SymbolFn& p, const Diffeo& chi, int terms,
                              double order = 1.0);

// chi^*(T_p u) - T_q(chi^* u).
TorusField conj_defect_apply(const DifferentialSymbol& p, const Diffeo& chi, const TorusField& u,
                             int steps = 128);
TorusField conj_defect_apply(const DifferentialSymbol& p, const DifferentialSymbol& q,
                             const Paracomposition& pc, const TorusField& u);
TorusField conj_defect_apply(const GridSpec& spec, const SymbolFn& p, const Diffeo& chi,
                             const TorusField& u, int terms, int steps = 128);

}  // namespace paratorus
