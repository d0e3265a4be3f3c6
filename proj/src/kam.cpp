#include "paratorus/kam.hpp"

#include "paratorus/field_ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace paratorus {

namespace {

std::vector<double> shifted(const std::vector<double>& omega, const std::vector<double>& h) {
  std::vector<double> w = omega;
  for (std::size_t k = 0; k < w.size(); ++k) w[k] += h[k];
  return w;
}

TorusField zero_field(const GridSpec& spec, Shape sh, Parity p) { return TorusField(spec, sh, p); }

double sample_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

void HyperbolicProblem::validate() const {
  const GridSpec& sp = f.spec;
  if (sp.n != n) throw DomainError("problem: f lives on the wrong torus dimension");
  if (n < 1 || N < 1) throw DomainError("problem: n and N must be positive");
  if (f.shape != Shape::vec(N)) throw DomainError("problem: f must have N components");
  if (X.in_dim != N || X.out_dim != n) throw DomainError("problem: X must map R^N to R^n");
  if (F.in_dim != N || F.out_dim != N) throw DomainError("problem: F must map R^N to R^N");
  if (!X.value || !X.jac_z || !F.value || !F.jac_z) throw DomainError("problem: missing closure");
  if (!(eps >= 0.0)) throw DomainError("problem: eps must be non-negative");
  if (f.parity != Parity::odd) throw DomainError("problem: f must be tagged odd");
  if (parity_defect(f) > 1e-12 * std::max(1.0, max_abs_coeff(f))) throw DomainError("problem: f is not odd");
  params.validate(n);

  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> ux(0.0, 2.0 * M_PI), uz(-1.0, 1.0);
  std::vector<double> x(n), mx(n), z(N), zero(N, 0.0), a(std::max(n, N)), b(std::max(n, N));
  for (int trial = 0; trial < 16; ++trial) {
    for (int d = 0; d < n; ++d) {
      x[d] = ux(rng);
      mx[d] = -x[d];
    }
    for (int k = 0; k < N; ++k) z[k] = uz(rng);
    X.value(x.data(), z.data(), a.data());
    X.value(mx.data(), z.data(), b.data());
    for (int d = 0; d < n; ++d)
      if (std::abs(a[d] - b[d]) > 1e-12 * (1.0 + std::abs(a[d]))) throw DomainError("problem: X is not even in x");
    F.value(x.data(), z.data(), a.data());
    F.value(mx.data(), z.data(), b.data());
    for (int k = 0; k < N; ++k)
      if (std::abs(a[k] + b[k]) > 1e-12 * (1.0 + std::abs(a[k]))) throw DomainError("problem: F is not odd in x");
    F.value(x.data(), zero.data(), a.data());
    for (int k = 0; k < N; ++k)
      if (std::abs(a[k]) > 1e-14) throw DomainError("problem: F(x, 0) must vanish");
  }
}

ParalinearizedEq paralinearize_eq(const HyperbolicProblem& pb, const TorusField& u) {
  const GridSpec& spec = pb.spec();
  const Shape col = Shape::vec(pb.N);
  if (u.spec != spec || u.shape != col) throw ShapeError("paralinearize_eq: u must be an N-vector field on the problem grid");
  ParalinearizedEq out;
  out.Y = apply_map(pb.X, u, Parity::even);
  out.Y.shape = Shape::vec(pb.n);
  TorusField du = jacobian(u);  // N x n
  TorusField A = apply_jacobian(pb.F, u, Parity::odd);
  A.shape = Shape::mat(pb.N, pb.N);
  TorusField Xz = apply_jacobian(pb.X, u);  // n x N
  Xz.shape = Shape::mat(pb.n, pb.N);
  TorusField corr = multiply(du, Xz);
  corr.shape = A.shape;
  A += corr;
  A.parity = Parity::odd;
  out.A = A;

  TorusField R = multiply(du, out.Y);
  R.shape = col;
  TorusField Fu = apply_map(pb.F, u);
  Fu.shape = col;
  R += Fu;
  TorusField t = Paraproduct(out.Y).apply_transport(u);
  t.shape = col;
  R -= t;
  TorusField ta = paraproduct(out.A, u, Side::left);
  ta.shape = col;
  R -= ta;
  R.parity = Parity::odd;
  out.R = R;
  return out;
}

ConjugationData conjugation_data(const HyperbolicProblem& pb, const std::vector<double>& omega, const TorusField& u,
                                 const ConjugationData* prev, bool with_chi) {
  const GridSpec& spec = pb.spec();
  const int n = pb.n, N = pb.N;
  ParalinearizedEq pl = paralinearize_eq(pb, u);
  ConjugationData d;
  d.Y = pl.Y;
  d.A = pl.A;
  d.R = pl.R;

  TorusField epsY = static_cast<cplx>(pb.eps) * pl.Y;
  epsY.parity = Parity::even;
  if (max_abs_coeff(epsY) == 0.0) {
    d.h.assign(n, 0.0);
    d.eta = Diffeo::identity(spec);
    if (with_chi) d.chi = Diffeo::identity(spec);
    d.straighten_report.stage = "straighten";
    d.straighten_report.converged = true;
  } else {
    StraighteningProblem sp;
    sp.omega = omega;
    sp.X = epsY;
    sp.params = pb.params;
    sp.tol = pb.opt.straighten_tol;
    sp.noise_floor = pb.opt.straighten_noise;
    sp.compute_inverse = with_chi;
    StraighteningResult st = prev ? straighten(sp, &prev->eta.theta, &prev->h) : straighten(sp);
    d.h = st.h;
    d.eta = st.eta;
    d.chi = st.chi;
    d.straighten_report = st.report;
  }

  d.Aeta = compose_displacement(pl.A, d.eta.theta);
  d.Aeta.parity = Parity::odd;
  TorusField rhs = static_cast<cplx>(-pb.eps) * d.Aeta;
  rhs.parity = Parity::odd;
  if (max_abs_coeff(rhs) == 0.0) {
    d.U = zero_field(spec, Shape::mat(N, N), Parity::even);
    d.matred_report.stage = "matred";
    d.matred_report.converged = true;
  } else {
    MatrixReductionProblem mp;
    mp.omega = shifted(omega, d.h);
    mp.A = rhs;
    mp.params = pb.params;
    mp.tol = pb.opt.matred_tol;
    mp.noise_floor = pb.opt.matred_noise;
    MatrixReduction mr = matred_solve(mp, prev ? &prev->U : nullptr);
    d.U = mr.U;
    d.matred_report = mr.report;
  }
  d.pc = std::make_shared<const Paracomposition>(d.eta.theta, pb.opt.steps);
  return d;
}

TorusField change_unknown(const ConjugationData& data, const TorusField& u) {
  TorusField w = data.pc->apply(u);
  TorusField y = neumann_inverse(Paraproduct(data.U), w);
  y.parity = u.parity;
  return y;
}

TorusField invert_unknown(const ConjugationData& data, const TorusField& y, double tol) {
  TorusField g = y;
  TorusField t = paraproduct(data.U, y, Side::left);
  t.shape = g.shape;
  g += t;
  TorusField u = data.pc->invert(g, tol);
  u.parity = y.parity;
  return u;
}

DifferentialSymbol equation_symbol(const HyperbolicProblem& pb, const std::vector<double>& omega,
                                   const ConjugationData& data) {
  DifferentialSymbol p;
  p.velocity = static_cast<cplx>(pb.eps) * data.Y;
  const std::size_t z = p.velocity.zero_index();
  for (int k = 0; k < pb.n; ++k) p.velocity.at(k, z) += omega[k];
  p.velocity.parity = Parity::even;
  TorusField B = static_cast<cplx>(pb.eps) * data.A;
  B.parity = Parity::odd;
  p.zeroth = B;
  return p;
}

TorusField kam_step(const HyperbolicProblem& pb, const std::vector<double>& omega, const KamState& state) {
  const ConjugationData& d = state.data;
  const Shape col = Shape::vec(pb.N);
  TorusField src = pb.f - d.R;
  src *= pb.eps;
  src.parity = Parity::odd;
  TorusField bracket = d.pc->apply(src);
  if (pb.eps != 0.0 && max_abs_coeff(state.u) != 0.0) {
    const DifferentialSymbol p = equation_symbol(pb, omega, d);
    const DifferentialSymbol q = conjugation_symbol(p, d.eta);
    TorusField rc = conj_defect_apply(p, q, *d.pc, state.u);
    rc.shape = col;
    bracket -= rc;
    TorusField rcm = cm_remainder_apply(d.Aeta, d.U, state.y, Side::left);
    rcm.shape = col;
    rcm *= pb.eps;
    bracket -= rcm;
  }
  bracket.parity = Parity::odd;
  TorusField g = neumann_inverse(Paraproduct(d.U), bracket);
  g.parity = Parity::odd;
  const ExtendedInverse L(pb.spec(), shifted(omega, d.h), pb.params);
  TorusField y = L.apply(g);
  y.parity = Parity::even;
  return y;
}

DefectMonitor defect_monitor(const HyperbolicProblem& pb, const std::vector<double>& omega, const KamState& state) {
  const ConjugationData& d = state.data;
  DefectMonitor m;
  const std::vector<double> wh = shifted(omega, d.h);
  const DifferentialSymbol p = equation_symbol(pb, omega, d);
  const DifferentialSymbol q = conjugation_symbol(p, d.eta);
  TorusField dv = q.velocity;
  const std::size_t z = dv.zero_index();
  for (int k = 0; k < pb.n; ++k) dv.at(k, z) -= wh[k];
  m.q_defect = l1_coeff_bound(dv);
  TorusField rhs = static_cast<cplx>(-pb.eps) * d.Aeta;
  m.u_defect = matred_residual(wh, rhs, d.U, 5.1);
  return m;
}

double pde_residual_at(const HyperbolicProblem& pb, const std::vector<double>& omega, const TorusField& u,
                       double index) {
  const Shape col = Shape::vec(pb.N);
  TorusField r = directional_derivative(u, omega);
  r.shape = col;
  TorusField Y = apply_map(pb.X, u);
  Y.shape = Shape::vec(pb.n);
  TorusField nl = multiply(jacobian(u), Y);
  nl.shape = col;
  TorusField Fu = apply_map(pb.F, u);
  Fu.shape = col;
  nl += Fu;
  nl -= pb.f;
  nl *= pb.eps;
  r += nl;
  return sobolev_norm(r, index);
}

double pde_residual(const HyperbolicProblem& pb, const std::vector<double>& omega, const TorusField& u) {
  return pde_residual_at(pb, omega, u, pb.s - 1.0);
}

KamState kam_solve(const HyperbolicProblem& pb, const std::vector<double>& omega, std::vector<KamTraceRow>* trace) {
  pb.validate();
  if (static_cast<int>(omega.size()) != pb.n) throw ShapeError("kam_solve: omega has wrong length");
  const GridSpec& spec = pb.spec();
  const Shape col = Shape::vec(pb.N);
  const double dist_s = pb.opt.dist_index < 0.0 ? pb.s : pb.opt.dist_index;

  KamState st;
  st.u = zero_field(spec, col, Parity::even);
  std::optional<ConjugationData> prev;
  std::vector<double> res_in;
  std::vector<std::vector<double>> h_in;

  std::function<TorusField(const TorusField&)> map = [&](const TorusField& u) {
    KamState s;
    s.u = u;
    s.data = conjugation_data(pb, omega, u, prev ? &*prev : nullptr, false);
    s.y = change_unknown(s.data, u);
    TorusField y_next = kam_step(pb, omega, s);
    TorusField u_next = invert_unknown(s.data, y_next, pb.opt.inverse_tol);
    if (trace) {
      res_in.push_back(pde_residual(pb, omega, u));
      h_in.push_back(s.data.h);
    }
    prev = std::move(s.data);
    return u_next;
  };
  std::function<double(const TorusField&, const TorusField&)> dist = [dist_s](const TorusField& a,
                                                                             const TorusField& b) {
    return sobolev_distance(a, b, dist_s);
  };
  FixedPointOptions opt;
  opt.tol = pb.opt.tol;
  opt.max_iter = pb.opt.max_iter;
  opt.ratio_guard = pb.opt.ratio_guard;
  opt.noise_floor = pb.opt.noise_floor;
  opt.stage = "outer";
  SolveReport rep;
  st.u = fixed_point_solve<TorusField>(map, st.u, dist, opt, &rep);
  st.u.parity = Parity::even;

  st.data = conjugation_data(pb, omega, st.u, prev ? &*prev : nullptr, pb.opt.compute_chi);
  st.y = change_unknown(st.data, st.u);
  st.report = rep;
  st.report.stage = "outer";
  const std::vector<double> wh = shifted(omega, st.data.h);
  st.feasible = dio_check(wh, pb.params);
  st.report.feasible = st.feasible;

  const double res = pde_residual(pb, omega, st.u);
  const double scale = pb.eps * sobolev_norm(pb.f, pb.s - 1.0);
  st.report.residuals["pde_residual"] = res;
  st.report.residuals["pde_residual_relative"] = scale > 0.0 ? res / scale : res;
  st.report.residuals["pde_residual_h1"] = pde_residual_at(pb, omega, st.u, 1.0);
  const DefectMonitor dm = defect_monitor(pb, omega, st);
  st.report.residuals["q_defect"] = dm.q_defect;
  st.report.residuals["u_defect"] = dm.u_defect;
  st.report.residuals["parity_defect_u"] = parity_defect(st.u);
  st.report.residuals["parity_defect_y"] = parity_defect(st.y);
  st.report.residuals["shift_norm"] = sample_norm(st.data.h);
  const auto& sr = st.data.straighten_report.residuals;
  if (auto it = sr.find("conjugacy"); it != sr.end()) st.report.residuals["straighten_conjugacy"] = it->second;
  if (st.data.chi) st.report.residuals["eta_chi"] = st.data.eta.inverse_residual();
  const auto& mr = st.data.matred_report.residuals;
  if (auto it = mr.find("equation"); it != mr.end()) st.report.residuals["matred_equation"] = it->second;

  if (trace) {
    trace->clear();
    for (std::size_t k = 0; k < rep.steps.size(); ++k) {
      KamTraceRow row;
      row.iteration = static_cast<int>(k) + 1;
      row.step = rep.steps[k];
      row.ratio = k > 0 ? rep.ratios[k - 1] : 0.0;
      row.residual = k < res_in.size() ? res_in[k] : 0.0;
      row.h = k < h_in.size() ? h_in[k] : std::vector<double>(pb.n, 0.0);
      trace->push_back(row);
    }
  }
  return st;
}

double ScanTable::excluded_fraction() const {
  if (rows.empty()) return 0.0;
  std::size_t bad = 0;
  for (const ScanRow& r : rows)
    if (!r.feasible) ++bad;
  return static_cast<double>(bad) / static_cast<double>(rows.size());
}

ScanTable feasible_set_scan(const HyperbolicProblem& pb, double R, std::size_t samples, std::uint64_t seed) {
  pb.validate();
  ScanTable table;
  table.eps = pb.eps;
  table.gamma = pb.params.gamma;
  const std::vector<std::vector<double>> omegas = ball_samples(pb.n, R, samples, seed);
  table.rows.resize(samples);
  HyperbolicProblem local = pb;
  local.opt.compute_chi = false;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < samples; ++i) {
    ScanRow& row = table.rows[i];
    row.omega = omegas[i];
    row.h.assign(pb.n, NAN);
    row.residual = NAN;
    try {
      KamState s = kam_solve(local, row.omega);
      row.h = s.data.h;
      row.feasible = s.feasible;
      row.residual = s.report.residuals.at("pde_residual");
    } catch (const SolverError& e) {
      row.failure = e.stage.empty() ? "solver" : e.stage;
    } catch (const DomainError&) {
      row.failure = "domain";
    } catch (const std::exception&) {
      row.failure = "error";
    }
  }
  return table;
}

LadderScan feasible_ladder(const HyperbolicProblem& pb, const std::vector<double>& ladder, double a, double R,
                           std::size_t samples, std::uint64_t seed) {
  for (std::size_t k = 1; k < ladder.size(); ++k)
    if (!(ladder[k] < ladder[k - 1])) throw DomainError("ladder must be strictly decreasing");
  LadderScan out;
  out.a = a;
  std::vector<double> lx, ly;
  for (double e : ladder) {
    HyperbolicProblem p = pb;
    p.eps = e;
    p.params.gamma = std::pow(e, a);
    out.rungs.push_back(feasible_set_scan(p, R, samples, seed));
    const double fr = out.rungs.back().excluded_fraction();
    if (fr > 0.0) {
      lx.push_back(std::log(e));
      ly.push_back(std::log(fr));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      mx += lx[k];
      my += ly[k];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sxy += (lx[k] - mx) * (ly[k] - my);
      sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    out.exponent = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return out;
}

HyperbolicProblem forced_wrapper(int nu, int d, int N, const NonlinearMap& X, const NonlinearMap& F,
                                 const TorusField& f, double eps, const DioParams& params) {
  if (nu < 0 || d < 1) throw DomainError("forced_wrapper: need nu >= 0 and d >= 1");
  if (X.in_dim != N || X.out_dim != d) throw DomainError("forced_wrapper: X must map R^N to R^d");
  const int n = nu + d;
  HyperbolicProblem pb;
  pb.n = n;
  pb.N = N;
  pb.X.in_dim = N;
  pb.X.out_dim = n;
  pb.X.value = [X, nu, d](const double* x, const double* z, double* out) {
    for (int k = 0; k < nu; ++k) out[k] = 0.0;
    X.value(x, z, out + nu);
    (void)d;
  };
  pb.X.jac_z = [X, nu, N](const double* x, const double* z, double* jac) {
    for (int k = 0; k < nu * N; ++k) jac[k] = 0.0;
    X.jac_z(x, z, jac + nu * N);
  };
  pb.F = F;
  pb.f = f;
  pb.eps = eps;
  pb.params = params;
  pb.validate();
  return pb;
}

}  // namespace paratorus
