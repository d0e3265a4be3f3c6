#include "paratorus/paraflow.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace paratorus {

namespace {

// Stack the components of several fields into one vector field.
TorusField stack(const std::vector<const TorusField*>& parts) {
  int total = 0;
  for (auto* p : parts) total += p->comps();
  TorusField out(parts[0]->spec, Shape::vec(total), Parity::none);
  int k = 0;
  for (auto* p : parts)
    for (int c = 0; c < p->comps(); ++c, ++k) std::copy(p->comp(c), p->comp(c) + p->L(), out.comp(k));
  return out;
}

// Samples of I + d theta (n x n).
GridValues jacobian_plus_identity(const TorusField& theta) {
  TorusField j = jacobian(theta);
  j.add_identity(1.0);
  return synthesize(j);
}

bool finite(const TorusField& u) {
  for (const cplx& z : u.c)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

Parity transported_parity(const TorusField& theta, const TorusField& f) {
  return theta.parity == Parity::odd ? f.parity : Parity::none;
}

}  // namespace

double jacobian_sup(const TorusField& theta) {
  GridValues g = synthesize(jacobian(theta));
  const std::size_t P = g.P();
  double m = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    double s = 0.0;
    for (int k = 0; k < g.shape.comps(); ++k) s += std::norm(g.comp(k)[p].real());
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

TorusField invert_displacement(const TorusField& theta, double tol, int max_iter, InversionInfo* info) {
  const GridSpec& spec = theta.spec;
  const int n = spec.n;
  if (theta.shape != Shape::vec(n)) throw ShapeError("invert_displacement: theta must be an n-vector");
  const std::size_t P = spec.grid_size();
  std::vector<double> target(P * n), y(P * n);
  GridValues th = synthesize(theta);
  for (std::size_t p = 0; p < P; ++p) {
    grid_point(spec, p, target.data() + p * n);
    for (int d = 0; d < n; ++d) y[p * n + d] = target[p * n + d] - th.comp(d)[p].real();
  }

  // theta and its Jacobian at the current iterates: value[d * P + p], jac[(i n + k) * P + p].
  const double dmax = 1.5 * l1_coeff_bound(theta);
  std::unique_ptr<TaylorEvaluator> taylor;
  if (TaylorEvaluator::order_for(spec, dmax, true) >= 0) taylor = std::make_unique<TaylorEvaluator>(theta, dmax, true);
  TorusField both;
  if (!taylor) {
    const TorusField jac = jacobian(theta);
    both = stack({&theta, &jac});
  }
  std::vector<double> value(P * n), jacv(P * n * n);
  auto eval = [&](const std::vector<std::size_t>& active) {
    if (taylor) {
      std::vector<double> disp(P * n);
      for (std::size_t i = 0; i < P * n; ++i) disp[i] = y[i] - target[i];
      std::vector<cplx> out;
      taylor->evaluate(disp, -1, out);
      for (std::size_t i = 0; i < P * n; ++i) value[i] = out[i].real();
      for (int k = 0; k < n; ++k) {
        taylor->evaluate(disp, k, out);
        for (int i = 0; i < n; ++i)
          for (std::size_t p = 0; p < P; ++p) jacv[(i * n + k) * P + p] = out[i * P + p].real();
      }
      return;
    }
    std::vector<double> pts(active.size() * n);
    for (std::size_t a = 0; a < active.size(); ++a)
      for (int d = 0; d < n; ++d) pts[a * n + d] = y[active[a] * n + d];
    const std::vector<cplx> vals = evaluate_at(both, pts);
    const std::size_t np = active.size();
    for (std::size_t a = 0; a < np; ++a) {
      const std::size_t p = active[a];
      for (int d = 0; d < n; ++d) value[d * P + p] = vals[d * np + a].real();
      for (int c = 0; c < n * n; ++c) jacv[c * P + p] = vals[(n + c) * np + a].real();
    }
  };

  std::vector<std::size_t> active(P);
  for (std::size_t p = 0; p < P; ++p) active[p] = p;
  double worst = 0.0;
  int it = 0;
  Eigen::MatrixXd Jm(n, n);
  Eigen::VectorXd r(n);
  for (; it <= max_iter && !active.empty(); ++it) {
    eval(active);
    std::vector<std::size_t> next;
    worst = 0.0;
    for (std::size_t p : active) {
      double res = 0.0;
      for (int d = 0; d < n; ++d) {
        r(d) = y[p * n + d] + value[d * P + p] - target[p * n + d];
        res = std::max(res, std::abs(r(d)));
      }
      worst = std::max(worst, res);
      if (res <= tol || it == max_iter) continue;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) Jm(i, k) = (i == k ? 1.0 : 0.0) + jacv[(i * n + k) * P + p];
      const Eigen::VectorXd dy = Jm.partialPivLu().solve(r);
      for (int d = 0; d < n; ++d) y[p * n + d] -= dy(d);
      next.push_back(p);
    }
    if (it == max_iter && worst > tol) throw DomainError("invert_displacement: Newton did not converge");
    active.swap(next);
  }
  if (info) *info = {it, worst};
  GridValues g(spec, theta.shape);
  for (std::size_t p = 0; p < P; ++p)
    for (int d = 0; d < n; ++d) g.comp(d)[p] = y[p * n + d] - target[p * n + d];
  return analyze(g, theta.parity == Parity::odd ? Parity::odd : Parity::none);
}

Diffeo Diffeo::make(const TorusField& theta, bool with_inverse, double lip_max) {
  Diffeo d;
  d.theta = theta;
  d.lip = jacobian_sup(theta);
  if (d.lip > lip_max) throw DomainError("Diffeo: sup |d theta| exceeds " + std::to_string(lip_max));
  if (with_inverse) d.inverse_theta = invert_displacement(theta);
  return d;
}

Diffeo Diffeo::identity(const GridSpec& spec) {
  Diffeo d;
  d.theta = TorusField(spec, Shape::vec(spec.n), Parity::odd);
  d.inverse_theta = d.theta;
  return d;
}

const TorusField& Diffeo::inverse() const {
  if (!inverse_theta) throw DomainError("Diffeo: inverse not computed");
  return *inverse_theta;
}

double Diffeo::inverse_residual() const {
  // (Id + theta)(x + zeta(x)) - x = zeta(x) + theta(x + zeta(x))
  const TorusField& zeta = inverse();
  const std::vector<double> pts = displaced_grid(zeta);
  const std::vector<cplx> th = evaluate_at(theta, pts);
  GridValues z = synthesize(zeta);
  const std::size_t P = z.P();
  double m = 0.0;
  for (int d = 0; d < theta.spec.n; ++d)
    for (std::size_t p = 0; p < P; ++p) m = std::max(m, std::abs(z.comp(d)[p].real() + th[d * P + p].real()));
  return m;
}

Deformation deformation(const TorusField& theta, double tau) {
  if (tau < 0.0 || tau > 1.0) throw DomainError("deformation: tau outside [0, 1]");
  const auto& t = tables(theta.spec);
  const std::size_t L = theta.L();
  Deformation out;
  out.Theta = TorusField(theta.spec, theta.shape, theta.parity);
  TorusField dtau(theta.spec, theta.shape, theta.parity);
  for (std::size_t i = 0; i < L; ++i) {
    const double br = std::sqrt(1.0 + t.norm[i] * t.norm[i]);
    const double e = std::exp(-(1.0 - tau) * br);
    for (int k = 0; k < theta.comps(); ++k) {
      out.Theta.at(k, i) = tau * e * theta.at(k, i);
      dtau.at(k, i) = (1.0 + tau * br) * e * theta.at(k, i);
    }
  }
  GridValues inv = grid_inverse(jacobian_plus_identity(out.Theta));
  GridValues x = grid_multiply(inv, synthesize(dtau));
  for (auto& z : x.v) z = -z;
  out.X = analyze(x, theta.parity == Parity::odd ? Parity::odd : Parity::none);
  return out;
}

DeformationPath DeformationPath::build(const TorusField& theta, int intervals) {
  DeformationPath path;
  for (int k = 0; k <= intervals; ++k) {
    const double tau = static_cast<double>(k) / intervals;
    Deformation d = deformation(theta, tau);
    path.tau.push_back(tau);
    path.Theta.push_back(std::move(d.Theta));
    path.X.push_back(std::move(d.X));
  }
  return path;
}

TorusField paratransport_solve(const TransportProblem& pb, const TorusField& w0, int steps, Direction dir) {
  if (steps < 1) throw DomainError("paratransport_solve: steps must be positive");
  const double h = (dir == Direction::forward ? 1.0 : -1.0) / steps;
  auto rhs = [&](double tau, const TorusField& w) {
    TorusField r(w.spec, w.shape, w.parity);
    if (pb.velocity) {
      TorusField tx = Paraproduct(pb.velocity(tau)).apply_transport(w);
      r -= tx;
      r.parity = tx.parity;
    }
    if (pb.zeroth) {
      TorusField b = paraproduct(pb.zeroth(tau), w, Side::left);
      b.shape = w.shape;
      r -= b;
    }
    if (pb.forcing) r += pb.forcing(tau);
    return r;
  };
  TorusField w = w0;
  double tau = dir == Direction::forward ? 0.0 : 1.0;
  for (int s = 0; s < steps; ++s) {
    TorusField k1 = rhs(tau, w);
    TorusField k2 = rhs(tau + 0.5 * h, w + (0.5 * h) * k1);
    TorusField k3 = rhs(tau + 0.5 * h, w + (0.5 * h) * k2);
    TorusField k4 = rhs(tau + h, w + h * k3);
    Parity p = w.parity;
    w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    w.parity = parity_sum(p, k1.parity);
    if (!finite(w)) throw DivergenceError("paratransport_solve: non-finite state", s);
    tau += h;
  }
  return w;
}

// ---- paracomposition ----

Paracomposition::Paracomposition(const TorusField& theta, int steps) : theta_(theta), steps_(steps) {
  if (steps < 1) throw DomainError("Paracomposition: steps must be positive");
  zero_ = max_abs_coeff(theta) == 0.0;
  if (zero_) return;
  const int nodes = 2 * steps + 1;
  X_.resize(nodes);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < nodes; ++k) X_[k] = deformation(theta, static_cast<double>(k) / (2 * steps)).X;
  const GridSpec& spec = theta.spec;
  const double bytes = std::max(0, spec.J - 3) * static_cast<double>(spec.n) * spec.grid_size() * 16.0 * nodes;
  if (bytes <= 256.0 * 1024 * 1024) {
    ops_.resize(nodes);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < nodes; ++k) ops_[k] = Paraproduct(X_[k]);
  }
}

const Paraproduct& Paracomposition::node_op(int node, Paraproduct& scratch) const {
  if (!ops_.empty()) return ops_[node];
  scratch = Paraproduct(X_[node]);
  return scratch;
}

TorusField Paracomposition::rhs(int node, const TorusField& w) const {
  Paraproduct scratch;
  TorusField r = node_op(node, scratch).apply_transport(w);
  r *= -1.0;
  return r;
}

TorusField Paracomposition::step(const TorusField& w0, double dir) const {
  const double h = dir / steps_;
  TorusField w = w0;
  for (int s = 0; s < steps_; ++s) {
    const int a = dir > 0 ? 2 * s : 2 * (steps_ - s);
    const int m = dir > 0 ? a + 1 : a - 1;
    const int b = dir > 0 ? a + 2 : a - 2;
    TorusField k1 = rhs(a, w);
    TorusField k2 = rhs(m, w + (0.5 * h) * k1);
    TorusField k3 = rhs(m, w + (0.5 * h) * k2);
    TorusField k4 = rhs(b, w + h * k3);
    const Parity p = w.parity;
    w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    w.parity = parity_sum(p, k1.parity);
    if (!finite(w)) throw DivergenceError("paracomposition: non-finite state", s);
  }
  w.parity = transported_parity(theta_, w0);
  return w;
}

TorusField Paracomposition::apply(const TorusField& f) const {
  require_same_spec(theta_, f, "paracompose");
  if (zero_) return f;
  return step(f, 1.0);
}

TorusField Paracomposition::apply_backward(const TorusField& g) const {
  require_same_spec(theta_, g, "paracompose");
  if (zero_) return g;
  return step(g, -1.0);
}

TorusField Paracomposition::invert(const TorusField& g, double rel_tol, int max_iter, int* iterations) const {
  if (zero_) {
    if (iterations) *iterations = 0;
    return g;
  }
  const double gn = sobolev_norm(g, 0.0);
  TorusField u = apply_backward(g);
  int it = 0;
  for (; it < max_iter; ++it) {
    TorusField r = g - apply(u);
    if (sobolev_norm(r, 0.0) <= rel_tol * gn) break;
    u += apply_backward(r);
  }
  u.parity = g.parity;
  if (iterations) *iterations = it;
  return u;
}

TorusField paracompose(const Diffeo& chi, const TorusField& f, bool inverse, int steps) {
  Paracomposition pc(chi.theta, steps);
  return inverse ? pc.apply_backward(f) : pc.apply(f);
}

TorusField refined_paralin_remainder(const TorusField& f, const Diffeo& chi, const Paracomposition& pc) {
  if (f.shape.cols != 1) throw ShapeError("refined_paralin_remainder: column fields only");
  TorusField r = compose_displacement(f, chi.theta);
  TorusField grad = compose_displacement(jacobian(f), chi.theta);
  TorusField t = paraproduct(grad, chi.theta, Side::left);
  t.shape = f.shape;
  r -= t;
  r -= pc.apply(f);
  r.parity = transported_parity(chi.theta, f);
  return r;
}

TorusField refined_paralin_remainder(const TorusField& f, const Diffeo& chi, int steps) {
  return refined_paralin_remainder(f, chi, Paracomposition(chi.theta, steps));
}

DifferentialSymbol conjugation_symbol(const DifferentialSymbol& p, const Diffeo& chi) {
  const TorusField& theta = chi.theta;
  DifferentialSymbol q;
  TorusField vc = compose_displacement(p.velocity, theta);
  GridValues g = grid_multiply(grid_inverse(jacobian_plus_identity(theta)), synthesize(vc));
  const bool keeps = theta.parity == Parity::odd;
  q.velocity = analyze(g, keeps && p.velocity.parity == Parity::even ? Parity::even : Parity::none);
  if (p.zeroth) q.zeroth = compose_displacement(*p.zeroth, theta);
  return q;
}

GridSymbol conjugation_symbol(const GridSpec& spec, const SymbolFn& p, const Diffeo& chi, int terms,
                              double order) {
  if (terms < 0 || terms > 1) throw DomainError("conjugation_symbol: terms must be 0 or 1");
  const int n = spec.n;
  const TorusField& theta = chi.theta;
  const auto& t = tables(spec);
  const std::size_t L = spec.lattice_size(), P = spec.grid_size();
  GridValues th = synthesize(theta);
  GridValues jac = jacobian_plus_identity(theta);
  std::vector<GridValues> djac;  // d_k chi'
  if (terms == 1)
    for (int k = 0; k < n; ++k) djac.push_back(synthesize(jacobian(partial(theta, k))));
  GridSymbol q(spec, order);
  const double delta = 1e-3;

#pragma omp parallel
  {
    std::vector<double> x(n), y(n), xi(n), z(n);
    Eigen::MatrixXd Jm(n, n), Jinv(n, n), JinvT(n, n);
    std::vector<Eigen::MatrixXd> dJ(n, Eigen::MatrixXd(n, n));
    std::vector<double> trace(n);
#pragma omp for
    for (std::size_t pt = 0; pt < P; ++pt) {
      grid_point(spec, pt, x.data());
      for (int d = 0; d < n; ++d) y[d] = x[d] + th.comp(d)[pt].real();
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) Jm(i, k) = jac.comp(i * n + k)[pt].real();
      Jinv = Jm.inverse();
      JinvT = Jinv.transpose();
      if (terms == 1)
        for (int k = 0; k < n; ++k) {
          for (int i = 0; i < n; ++i)
            for (int l = 0; l < n; ++l) dJ[k](i, l) = djac[k].comp(i * n + l)[pt].real();
          trace[k] = 0.5 * (Jinv * dJ[k]).trace();
        }
      auto p_at = [&](const Eigen::VectorXd& eta) {
        for (int d = 0; d < n; ++d) z[d] = eta(d);
        return p(y.data(), z.data());
      };
      // d_{y_k} of p(chi(x), J(x,y)^{-1} xi) |det ratio| at y = x.
      auto first_y = [&](const Eigen::VectorXd& xv, int k) {
        const Eigen::VectorXd eta = JinvT * xv;
        const Eigen::VectorXd dir = -0.5 * JinvT * dJ[k].transpose() * JinvT * xv;
        const double hstep = delta * (1.0 + eta.norm());
        const cplx dp = (p_at(eta + hstep * dir / std::max(dir.norm(), 1e-300)) -
                         p_at(eta - hstep * dir / std::max(dir.norm(), 1e-300))) /
                        (2.0 * hstep) * dir.norm();
        return (dir.norm() == 0.0 ? cplx(0.0) : dp) + p_at(eta) * trace[k];
      };
      for (std::size_t e = 0; e < L; ++e) {
        const int* k = t.point(e);
        Eigen::VectorXd xv(n);
        for (int d = 0; d < n; ++d) xv(d) = k[d];
        cplx val = p_at(JinvT * xv);
        if (terms == 1) {
          for (int kk = 0; kk < n; ++kk) {
            Eigen::VectorXd xp = xv, xm = xv;
            const double hs = delta * (1.0 + xv.norm());
            xp(kk) += hs;
            xm(kk) -= hs;
            val += (first_y(xp, kk) - first_y(xm, kk)) / (2.0 * hs) / cplx(0.0, 1.0);
          }
        }
        q.at_freq(e)[pt] = val;
      }
    }
  }
  return q;
}

TorusField conj_defect_apply(const DifferentialSymbol& p, const DifferentialSymbol& q, const Paracomposition& pc,
                             const TorusField& u) {
  TorusField out = pc.apply(p.apply(u));
  out -= q.apply(pc.apply(u));
  out.parity = transported_parity(pc.theta(), p.apply(u));
  return out;
}

TorusField conj_defect_apply(const DifferentialSymbol& p, const Diffeo& chi, const TorusField& u, int steps) {
  return conj_defect_apply(p, conjugation_symbol(p, chi), Paracomposition(chi.theta, steps), u);
}

TorusField conj_defect_apply(const GridSpec& spec, const SymbolFn& p, const Diffeo& chi, const TorusField& u,
                             int terms, int steps) {
  const int n = spec.n;
  GridSymbol ps = GridSymbol::from_function(spec, 1.0, [&](const double* x, const int* xi) {
    std::vector<double> z(xi, xi + n);
    return p(x, z.data());
  });
  GridSymbol qs = conjugation_symbol(spec, p, chi, terms);
  Paracomposition pc(chi.theta, steps);
  TorusField out = pc.apply(paradiff_apply(ps, u));
  out -= paradiff_apply(qs, pc.apply(u));
  out.parity = Parity::none;
  return out;
}

}  // namespace paratorus
