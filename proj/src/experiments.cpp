#include "paratorus/experiments.hpp"

#include "paratorus/demos.hpp"
#include "paratorus/field_ops.hpp"
#include "paratorus/kam.hpp"
#include "paratorus/lp.hpp"
#include "paratorus/reduce_matrix.hpp"
#include "paratorus/reduce_vector.hpp"
#include "paratorus/snapshot.hpp"
#include "paratorus/symbol.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

namespace paratorus {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& experiment_commands() {
  static const std::vector<std::string> c{"lp-demo",    "calculus-check",   "paracomp-check", "reduce-matrix",
                                          "straighten", "solve-hyperbolic", "scan-feasible",  "measure-dio"};
  return c;
}

double fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
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

double SmoothingFits::max_exponent() const { return std::max({exp_pm, exp_cm, exp_plr, exp_conj}); }

SmoothingFits smoothing_fits(const Diffeo& chi, const Paracomposition& pc, const std::vector<int>& Ks, double s) {
  const GridSpec& spec = chi.theta.spec;
  const int n = spec.n;
  const TorusField a =
      sample(spec, Shape::scalar_shape(), [](const double* x, double* o) { o[0] = 1.0 / (2.0 - std::cos(x[0])); });
  const TorusField b = sample(spec, Shape::scalar_shape(), [](const double* x, double* o) { o[0] = std::exp(std::sin(x[0])); });
  DifferentialSymbol p;
  p.velocity = sample(spec, Shape::vec(n), [n](const double* x, double* o) {
    o[0] = 1.0 + 0.3 * std::cos(x[0]);
    for (int k = 1; k < n; ++k) o[k] = 1.0;
  });
  p.zeroth = a;
  const DifferentialSymbol q = conjugation_symbol(p, chi);

  SmoothingFits out;
  std::vector<double> kx;
  std::vector<int> xi(n, 0);
  for (int K : Ks) {
    TorusField u(spec, Shape::scalar_shape());
    xi[0] = K;
    u.at(0, tables(spec).index_of(xi.data())) = 1.0;
    const double nu = sobolev_norm(u, s);
    out.K.push_back(K);
    kx.push_back(K);
    out.pm.push_back(sobolev_norm(pm_remainder(a, u), s + 1.0) / nu);
    out.cm.push_back(sobolev_norm(cm_remainder_apply(a, b, u), s + 1.0) / nu);
    out.plr.push_back(sobolev_norm(refined_paralin_remainder(u, chi, pc), s + 1.0) / nu);
    out.conj.push_back(sobolev_norm(conj_defect_apply(p, q, pc, u), s) / sobolev_norm(u, s + 1.0));
  }
  out.exp_pm = fit_exponent(kx, out.pm);
  out.exp_cm = fit_exponent(kx, out.cm);
  out.exp_plr = fit_exponent(kx, out.plr);
  out.exp_conj = fit_exponent(kx, out.conj);
  return out;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Artifact writer; the directory is created on the first write.
class Artifacts {
 public:
  explicit Artifacts(std::string dir) : dir_(std::move(dir)) {}

  void text(const std::string& name, const std::string& body) {
    fs::create_directories(dir_);
    const fs::path p = fs::path(dir_) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << body;
    written_.push_back(p.string());
  }

  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
    s += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
      s += "\n";
    }
    text(name, s);
  }

  // gnuplot script plotting columns ys against column x of a CSV file
  void plot(const std::string& name, const std::string& csv_name, int x, const std::vector<int>& ys, bool logy,
            bool logx = false) {
    std::string s = "# gnuplot " + name + "\n";
    s += "set datafile separator ','\nset key autotitle columnhead\n";
    if (logx) s += "set logscale x\n";
    if (logy) s += "set logscale y\n";
    s += "plot ";
    for (std::size_t i = 0; i < ys.size(); ++i)
      s += (i ? ", \\\n     " : "") + std::string("'") + csv_name + "' using " + std::to_string(x) + ":" +
           std::to_string(ys[i]) + " with linespoints";
    s += "\n";
    text(name, s);
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  std::string dir_;
  std::vector<std::string> written_;
};

// The output directory is left out so that reruns elsewhere compare equal.
json header(const std::string& command, const ExperimentConfig& cfg) {
  json c = config_to_json(cfg);
  c.erase("output");
  return json{{"schema_version", 1}, {"command", command}, {"config", c}};
}

KamOptions kam_options(const ExperimentConfig& c, int default_steps) {
  KamOptions o;
  o.tol = c.solver.tol_abs;
  o.max_iter = c.solver.max_iter;
  o.ratio_guard = c.solver.ratio_guard;
  o.steps = c.solver.n_tau > 0 ? c.solver.n_tau : default_steps;
  o.straighten_tol = o.matred_tol = c.solver.inner_tol;
  o.straighten_noise = o.matred_noise = 0.1 * c.solver.inner_tol;
  o.inverse_tol = c.solver.tol_rel;
  return o;
}

HyperbolicProblem build_problem(const ExperimentConfig& c, double eps, int default_steps) {
  HyperbolicProblem pb = demo_family(c.problem).build(c.grid(), eps, c.dio);
  if (c.s > 0.0) pb.s = c.s;
  pb.opt = kam_options(c, default_steps);
  return pb;
}

// ---------------------------------------------------------------- lp-demo

void lp_demo(const ExperimentConfig& c, Artifacts& out, std::ostream& log) {
  const GridSpec spec = c.grid();
  const auto& t = tables(spec);
  const TorusField u = random_field(spec, Shape::scalar_shape(), Parity::none, 1.0, spec.M, 0.3, c.seed);
  std::vector<std::vector<std::string>> rows;
  TorusField sum(spec, u.shape);
  double worst = 0.0;
  for (int j = 0; j <= spec.J; ++j) {
    const TorusField b = lp_block(u, j);
    sum += b;
    const double lo = j == 0 ? 0.0 : std::ldexp(1.0, j - 2), hi = std::ldexp(1.0, j);
    double outside = 0.0, err = 0.0;
    for (std::size_t i = 0; i < u.L(); ++i) {
      const double r = t.norm[i];
      const bool inside = j == 0 ? r <= 1.0 : (r > lo && r <= hi);
      if (!inside) {
        outside = std::max(outside, std::abs(b.at(0, i)));
        continue;
      }
      double acc = 0.0;
      for (int k = 0; k <= spec.J; ++k) acc += lp::block(r, k);
      err = std::max(err, std::abs(acc - 1.0));
    }
    worst = std::max(worst, err);
    rows.push_back({std::to_string(j), num(lo), num(hi), num(sobolev_norm(b, 0.0)), num(outside), num(err)});
  }
  const double norm2 = grid_mean_square(u);
  double coef2 = 0.0;
  for (const cplx& z : u.c) coef2 += std::norm(z);
  json j = header("lp-demo", c);
  j["J"] = spec.J;
  j["lattice_size"] = spec.lattice_size();
  j["max_error"] = worst;
  j["partition_error"] = std::sqrt(grid_mean_square(u - sum));
  j["parseval_error"] = std::abs(norm2 - coef2) / coef2;
  j["roundtrip_error"] = max_abs_coeff(analyze(synthesize(u)) - u);
  out.csv("lp_partition.csv", {"j", "lower", "upper", "block_l2", "outside_support", "max_error"}, rows);
  out.plot("lp_partition.gp", "lp_partition.csv", 1, {4, 6}, true);
  out.json_file("lp_demo.json", j);
  log << "lp-demo: J = " << spec.J << ", max partition error " << worst << "\n";
}

// ---------------------------------------------------------- calculus-check

void calculus_check(const ExperimentConfig& c, int r, Artifacts& out, std::ostream& log) {
  const GridSpec spec = c.grid();
  std::vector<std::vector<std::string>> rows;
  double worst = 0.0;
  for (int k = 0; k < c.checks.symbols; ++k) {
    const std::uint64_t sd = c.seed * 1000003ULL + 2 * k;
    const TorusField a = random_field(spec, Shape::scalar_shape(), Parity::none, 1.0, spec.M, 0.3, sd);
    const TorusField u = random_field(spec, Shape::scalar_shape(), Parity::none, 1.0, spec.M, 0.3, sd + 1);
    const double d = sobolev_norm(paradiff_apply(GridSymbol::from_field(a), u) - paraproduct(a, u), 0.0);
    worst = std::max(worst, d);
    rows.push_back({std::to_string(k), num(d)});
  }

  // calculus on exact cases: xi-independent a # b = ab, (i w.xi) # b = i w.xi b + w.grad b (for r >= 2)
  const TorusField a = random_field(spec, Shape::scalar_shape(), Parity::none, 1.0, 4, 0.3, c.seed + 11);
  const TorusField b = random_field(spec, Shape::scalar_shape(), Parity::none, 1.0, 4, 0.3, c.seed + 12);
  const GridSymbol as = GridSymbol::from_field(a), bs = GridSymbol::from_field(b);
  auto sup = [](const GridSymbol& s) {
    double m = 0.0;
    for (const cplx& z : s.values) m = std::max(m, std::abs(z));
    return m;
  };
  GridSymbol d1 = symbol_sharp(as, bs, r);
  d1 -= GridSymbol::from_field(multiply(a, b));
  const std::vector<double> w = c.frequency();
  const int n = spec.n;
  const GridSymbol p = GridSymbol::from_function(spec, 1.0, [&](const double*, const int* xi) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += w[k] * xi[k];
    return cplx(0.0, s);
  });
  const GridSymbol q = symbol_sharp(p, bs, r);
  const GridValues bv = synthesize(b), dbv = synthesize(directional_derivative(b, w));
  GridSymbol expect(spec, 1.0);
  const auto& t = tables(spec);
  for (std::size_t e = 0; e < spec.lattice_size(); ++e) {
    const int* xi = t.point(e);
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += w[k] * xi[k];
    for (std::size_t g = 0; g < expect.P(); ++g)
      expect.at_freq(e)[g] = cplx(0.0, s) * bv.v[g] + (r >= 1 ? dbv.v[g] : cplx(0.0));
  }
  GridSymbol d2 = q;
  d2 -= expect;
  GridSymbol d3 = symbol_adjoint(as, r);
  d3 -= as;

  // Neumann inverse of I + T_W with the configured cutoff
  const TorusField W = random_field(spec, Shape::mat(2, 2), Parity::none, 0.05, spec.M, 0.3, c.seed + 13);
  const TorusField g = random_field(spec, Shape::vec(2), Parity::none, 1.0, spec.M, 0.3, c.seed + 14);
  const Paraproduct P(W);
  NeumannInfo info;
  const TorusField v = neumann_inverse(P, g, c.solver.neumann_cutoff, 200, &info);

  json j = header("calculus-check", c);
  j["symbolic_r"] = r;
  j["symbols"] = c.checks.symbols;
  j["max_discrepancy_h0"] = worst;
  j["sharp_product_error"] = sup(d1);
  j["sharp_transport_error"] = sup(d2);
  j["adjoint_error"] = sup(d3);
  j["neumann_residual"] = max_abs_coeff(v + P.apply(v) - g);
  j["neumann_terms"] = info.terms;
  out.csv("calculus_symbols.csv", {"symbol", "discrepancy_h0"}, rows);
  out.plot("calculus_symbols.gp", "calculus_symbols.csv", 1, {2}, true);
  out.json_file("calculus_check.json", j);
  // symbol tables grow like lattice x grid; only written on the circle
  if (n == 1) out.json_file("sharp_symbol.json", symbol_to_json(q));
  log << "calculus-check: max paradiff/paraproduct gap " << worst << " over " << c.checks.symbols << " symbols\n";
}

// ---------------------------------------------------------- paracomp-check

struct ParacompInput {
  Diffeo chi;
  TorusField f;
};

ParacompInput paracomp_input(const ExperimentConfig& c) {
  ParacompInput in;
  const GridSpec spec = c.grid();
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (!c.checks.diffeo.empty()) {
    try {
      in.chi = diffeo_from_json(read_json(c.checks.diffeo));
    } catch (const std::exception& e) {
      fail("field 'checks.diffeo': " + std::string(e.what()));
    }
    if (!(in.chi.theta.spec == spec)) fail("field 'checks.diffeo': snapshot grid does not match grid");
    in.chi = Diffeo::make(in.chi.theta);
  } else {
    TorusField th = random_field(spec, Shape::vec(spec.n), Parity::odd, 1.0, 2, 0.0, c.seed);
    th *= c.checks.lip / jacobian_sup(th);
    in.chi = Diffeo::make(th);
  }
  if (!c.checks.field.empty()) {
    try {
      in.f = field_from_json(read_json(c.checks.field));
    } catch (const std::exception& e) {
      fail("field 'checks.field': " + std::string(e.what()));
    }
    if (!(in.f.spec == spec) || !(in.f.shape == Shape::scalar_shape()))
      fail("field 'checks.field': snapshot must be a scalar field on the configured grid");
  } else {
    in.f = random_field(spec, Shape::scalar_shape(), Parity::even, 1.0, spec.M, 0.3, c.seed + 1);
    in.f *= 1.0 / sobolev_norm(in.f, 4.0);
  }
  return in;
}

void paracomp_check(const ExperimentConfig& c, const ParacompInput& in, Artifacts& out, std::ostream& log) {
  const int steps = c.solver.n_tau > 0 ? c.solver.n_tau : min_transport_steps(c.M);
  const Paracomposition pc(in.chi.theta, steps);
  const TorusField g = pc.apply(in.f);
  json bounded = json::object();
  for (int s = 0; s <= 4; ++s) {
    const double nf = sobolev_norm(in.f, s);
    bounded["H" + std::to_string(s)] = nf > 0.0 ? sobolev_norm(g, s) / nf : 0.0;
  }
  const double f4 = std::max(sobolev_norm(in.f, 4.0), 1e-300);
  const double rt = sobolev_distance(pc.apply_backward(g), in.f, 4.0) / f4;
  const Paracomposition half(in.chi.theta, std::max(1, steps / 2));
  const double rt_half = sobolev_distance(half.apply_backward(half.apply(in.f)), in.f, 4.0) / f4;
  int it = 0;
  const TorusField back = pc.invert(g, c.solver.tol_rel, 30, &it);
  const SmoothingFits fit = smoothing_fits(in.chi, pc, c.checks.ks, c.checks.index);

  json j = header("paracomp-check", c);
  j["steps"] = steps;
  j["lip"] = jacobian_sup(in.chi.theta);
  j["boundedness"] = bounded;
  j["roundtrip_error_h4"] = rt;
  j["roundtrip_error_h4_half_steps"] = rt_half;
  j["order_ratio"] = rt > 0.0 ? rt_half / rt : 0.0;
  j["exact_inverse_residual_h4"] = sobolev_distance(back, in.f, 4.0) / f4;
  j["exact_inverse_iterations"] = it;
  j["diffeo_inverse_residual"] = in.chi.inverse_residual();
  j["smoothing_exponents"] = {{"pm_remainder", fit.exp_pm},
                              {"cm_remainder", fit.exp_cm},
                              {"refined_paralin", fit.exp_plr},
                              {"conj_defect", fit.exp_conj}};
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < fit.K.size(); ++i)
    rows.push_back({std::to_string(fit.K[i]), num(fit.pm[i]), num(fit.cm[i]), num(fit.plr[i]), num(fit.conj[i])});
  out.csv("smoothing_fits.csv", {"K", "pm_remainder", "cm_remainder", "refined_paralin", "conj_defect"}, rows);
  out.plot("smoothing_fits.gp", "smoothing_fits.csv", 1, {2, 3, 4, 5}, true, true);
  out.json_file("diffeo.json", diffeo_to_json(in.chi));
  out.json_file("field.json", field_to_json(in.f));
  out.json_file("paracomp_check.json", j);
  log << "paracomp-check: round trip " << rt << " (H^4, relative), largest smoothing exponent " << fit.max_exponent()
      << "\n";
}

// ----------------------------------------------------------- reduce-matrix

std::vector<std::vector<std::string>> trace_rows(const SolveReport& r) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < r.steps.size(); ++k)
    rows.push_back({std::to_string(k + 1), num(r.steps[k]), k == 0 ? std::string("") : num(r.ratios[k - 1])});
  return rows;
}

void reduce_matrix(const ExperimentConfig& c, Artifacts& out, std::ostream& log) {
  const GridSpec spec = c.grid();
  MatrixReductionProblem pb;
  pb.omega = c.frequency();
  pb.params = c.dio;
  pb.s0 = c.s0();
  pb.tol = c.solver.inner_tol;
  pb.max_iter = c.solver.max_iter;
  pb.ratio_guard = c.solver.ratio_guard;
  pb.noise_floor = 0.1 * c.solver.inner_tol;
  TorusField A = random_field(spec, Shape::mat(c.N, c.N), Parity::odd, 1.0, 3, 0.5, c.seed);
  const double na = sobolev_norm(A, pb.s0);
  if (na > 0.0) A *= c.eps / na;
  pb.A = A;
  const MatrixReduction r = matred_solve(pb);
  json j = header("reduce-matrix", c);
  j["s0"] = pb.s0;
  j["report"] = r.report.to_json();
  j["iterations"] = r.report.iterations;
  j["ratios"] = r.report.ratios;
  j["residual"] = matred_residual(pb.omega, pb.A, r.U, pb.s0);
  // dense oracle only while the Galerkin matrix stays small
  const std::size_t dim = (spec.lattice_size() - 1) * c.N;
  if (dim <= 2500)
    j["oracle_gap"] = sobolev_distance(r.U, matred_oracle(pb.omega, pb.A), pb.s0);
  else
    j["oracle_gap"] = nullptr;
  out.csv("reduce_matrix_trace.csv", {"iteration", "step", "ratio"}, trace_rows(r.report));
  out.plot("reduce_matrix_trace.gp", "reduce_matrix_trace.csv", 1, {2}, true);
  out.json_file("matred_U.json", field_to_json(r.U));
  out.json_file("reduce_matrix.json", j);
  log << "reduce-matrix: " << r.report.iterations << " iterations, residual " << j["residual"].get<double>() << "\n";
}

// -------------------------------------------------------------- straighten

void straighten_cmd(const ExperimentConfig& c, Artifacts& out, std::ostream& log) {
  const GridSpec spec = c.grid();
  StraighteningProblem pb;
  pb.omega = c.frequency();
  pb.params = c.dio;
  pb.s1 = c.s1();
  pb.tol = c.solver.inner_tol;
  pb.max_iter = c.solver.max_iter;
  pb.noise_floor = 0.1 * c.solver.inner_tol;
  TorusField X = random_field(spec, Shape::vec(spec.n), Parity::even, 1.0, 3, 0.5, c.seed);
  const double nx = sobolev_norm(X, 0.0);
  if (nx > 0.0) X *= c.eps / nx;
  pb.X = X;
  const StraighteningResult r = straighten(pb);
  std::vector<double> wh(pb.omega);
  for (int k = 0; k < spec.n; ++k) wh[k] += r.h[k];
  json j = header("straighten", c);
  j["s1"] = pb.s1;
  j["h"] = r.h;
  j["omega_plus_h"] = wh;
  j["omega_plus_h_diophantine"] = dio_check(wh, c.dio);
  j["lambda"] = r.lambda;
  j["lambda_path"] = r.lambda_path;
  j["report"] = r.report.to_json();
  j["residual"] = straighten_residual(pb.omega, r.h, r.eta.theta, pb.X, pb.s1);
  out.csv("straighten_trace.csv", {"iteration", "step", "ratio"}, trace_rows(r.report));
  out.plot("straighten_trace.gp", "straighten_trace.csv", 1, {2}, true);
  out.json_file("eta.json", diffeo_to_json(r.eta));
  if (r.chi) out.json_file("chi.json", diffeo_to_json(*r.chi));
  out.json_file("straighten.json", j);
  log << "straighten: h = [";
  for (int k = 0; k < spec.n; ++k) log << (k ? ", " : "") << r.h[k];
  log << "]\n";
}

// -------------------------------------------------------- solve-hyperbolic

void solve_hyperbolic(const ExperimentConfig& c, Artifacts& out, std::ostream& log) {
  const HyperbolicProblem pb = build_problem(c, c.eps, 16);
  const std::vector<double> omega = c.frequency();
  std::vector<KamTraceRow> trace;
  const KamState st = kam_solve(pb, omega, &trace);
  json j = header("solve-hyperbolic", c);
  j["family"] = demo_family(c.problem).description;
  j["s"] = pb.s;
  j["report"] = st.report.to_json();
  j["feasible"] = st.feasible;
  j["h"] = st.data.h;
  j["pde_residual_h1"] = pde_residual_at(pb, omega, st.u, 1.0);
  std::vector<std::string> head{"iteration", "step", "ratio", "residual"};
  for (int k = 0; k < pb.n; ++k) head.push_back("h" + std::to_string(k + 1));
  std::vector<std::vector<std::string>> rows;
  for (const KamTraceRow& r : trace) {
    std::vector<std::string> row{std::to_string(r.iteration), num(r.step), num(r.ratio), num(r.residual)};
    for (double h : r.h) row.push_back(num(h));
    rows.push_back(row);
  }
  out.csv("solve_trace.csv", head, rows);
  out.plot("solve_trace.gp", "solve_trace.csv", 1, {2, 4}, true);
  out.json_file("solution.json", field_to_json(st.u));
  out.json_file("solve_hyperbolic.json", j);
  log << "solve-hyperbolic: " << st.report.iterations << " outer iterations, feasible " << st.feasible << "\n";
}

// ----------------------------------------------------------- scan-feasible

void scan_feasible(const ExperimentConfig& c, Artifacts& out, std::ostream& log) {
  const HyperbolicProblem pb = build_problem(c, c.ladder.eps.front(), 8);
  const LadderScan L = feasible_ladder(pb, c.ladder.eps, c.ladder.exponent, c.ladder.radius, c.ladder.samples, c.seed);
  const int n = pb.n;
  std::vector<std::string> head;
  for (int k = 0; k < n; ++k) head.push_back("omega" + std::to_string(k + 1));
  for (int k = 0; k < n; ++k) head.push_back("h" + std::to_string(k + 1));
  head.insert(head.end(), {"feasible", "residual", "stage_failures"});
  std::vector<std::vector<std::string>> summary;
  json rungs = json::array();
  for (std::size_t i = 0; i < L.rungs.size(); ++i) {
    const ScanTable& t = L.rungs[i];
    std::vector<std::vector<std::string>> rows;
    int failures = 0;
    for (const ScanRow& r : t.rows) {
      std::vector<std::string> row;
      for (double w : r.omega) row.push_back(num(w));
      for (int k = 0; k < n; ++k) row.push_back(k < static_cast<int>(r.h.size()) ? num(r.h[k]) : "");
      row.push_back(r.feasible ? "1" : "0");
      row.push_back(num(r.residual));
      row.push_back(r.failure);
      failures += !r.failure.empty();
      rows.push_back(row);
    }
    const std::string name = "scan_feasible_" + std::to_string(i) + ".csv";
    out.csv(name, head, rows);
    summary.push_back({num(t.eps), num(t.gamma), std::to_string(t.rows.size()), num(t.excluded_fraction()),
                       std::to_string(failures)});
    rungs.push_back({{"eps", t.eps},
                     {"gamma", t.gamma},
                     {"samples", t.rows.size()},
                     {"excluded_fraction", t.excluded_fraction()},
                     {"stage_failures", failures},
                     {"table", name}});
  }
  out.csv("scan_ladder.csv", {"eps", "gamma", "samples", "excluded_fraction", "stage_failures"}, summary);
  out.plot("scan_ladder.gp", "scan_ladder.csv", 1, {4}, true, true);
  json j = header("scan-feasible", c);
  j["rungs"] = rungs;
  j["exponent"] = L.exponent;
  out.json_file("scan_feasible.json", j);
  log << "scan-feasible: " << L.rungs.size() << " rungs, excluded fraction";
  for (const ScanTable& t : L.rungs) log << " " << t.excluded_fraction();
  log << "\n";
}

// ------------------------------------------------------------- measure-dio

void measure_dio(const ExperimentConfig& c, Artifacts& out, std::ostream& log) {
  std::vector<std::vector<std::string>> rows;
  json pts = json::array();
  for (double g : c.measure.gammas) {
    DioParams p = c.dio;
    p.gamma = g;
    const double x = dio_measure_mc(p, c.n, c.measure.radius, c.measure.samples, c.seed);
    rows.push_back({num(g), num(c.measure.radius), std::to_string(c.measure.samples), num(x), std::to_string(c.seed)});
    pts.push_back({{"gamma", g}, {"excluded_fraction", x}, {"ratio_to_gamma", x / g}});
  }
  out.csv("measure_dio.csv", {"gamma", "R", "samples", "excluded_fraction", "seed"}, rows);
  out.plot("measure_dio.gp", "measure_dio.csv", 1, {4}, true, true);
  json j = header("measure-dio", c);
  j["points"] = pts;
  out.json_file("measure_dio.json", j);
  log << "measure-dio: " << rows.size() << " gamma values\n";
}

}  // namespace

int run_experiment(const std::string& command, const ExperimentConfig& cfg_in, const RunOptions& opt,
                   std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = cfg_in;
  if (opt.out_dir) cfg.out_dir = *opt.out_dir;
  if (opt.seed) cfg.seed = *opt.seed;
  Artifacts out(cfg.out_dir);
  std::optional<ParacompInput> pc_in;
  try {
    bool known = false;
    for (const std::string& k : experiment_commands()) known = known || k == command;
    if (!known) throw ConfigError("unknown subcommand '" + command + "'");
    validate_config(cfg, command);
    if (opt.threads < 0) throw ConfigError("--threads must be >= 0");
    if (opt.symbolic_r < 0 || opt.symbolic_r > 4) throw ConfigError("--symbolic-r must be in 0..4");
    cfg.grid();
    if (command == "paracomp-check") pc_in = paracomp_input(cfg);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (opt.threads > 0) omp_set_num_threads(opt.threads);

  try {
    if (command == "lp-demo") lp_demo(cfg, out, log);
    else if (command == "calculus-check") calculus_check(cfg, opt.symbolic_r, out, log);
    else if (command == "paracomp-check") paracomp_check(cfg, *pc_in, out, log);
    else if (command == "reduce-matrix") reduce_matrix(cfg, out, log);
    else if (command == "straighten") straighten_cmd(cfg, out, log);
    else if (command == "solve-hyperbolic") solve_hyperbolic(cfg, out, log);
    else if (command == "scan-feasible") scan_feasible(cfg, out, log);
    else if (command == "measure-dio") measure_dio(cfg, out, log);
  } catch (const SolverError& e) {
    json j = header(command, cfg);
    j["status"] = "non-convergence";
    j["error"] = e.what();
    j["report"] = e.report.to_json();
    std::string base = command;
    for (char& ch : base)
      if (ch == '-') ch = '_';
    out.json_file(base + ".json", j);
    log << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const DomainError& e) {
    // e.g. a generated map that is not a diffeomorphism, or a resonant frequency
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const std::string& f : out.written()) log << "  wrote " << f << "\n";
  log << "  wall time " << secs << " s\n";
  return kExitOk;
}

}  // namespace paratorus
