#include "support.hpp"

#include "paratorus/config.hpp"
#include "paratorus/experiments.hpp"
#include "paratorus/fixed_point.hpp"
#include "paratorus/snapshot.hpp"

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace paratorus;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

using Real = std::function<double(const double&)>;
const std::function<double(const double&, const double&)> absdiff = [](const double& a, const double& b) {
  return std::abs(a - b);
};

fs::path scratch_root() { return fs::temp_directory_path() / ("paratorus_harness_" + std::to_string(::getpid())); }

struct ScratchCleanup {
  ~ScratchCleanup() {
    std::error_code ec;
    fs::remove_all(scratch_root(), ec);
  }
} cleanup;

fs::path scratch(const std::string& name) {
  const fs::path p = scratch_root() / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// every file of a against the same name in b
bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t count = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++count;
    const fs::path other = b / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) return false;
  }
  return count > 0 && count == static_cast<std::size_t>(std::distance(fs::directory_iterator(b), {}));
}

ExperimentConfig small(const std::string& command, const std::string& extra = "") {
  const std::string text = R"({"schema_version": 1, "grid": {"n": 2, "M": 8}, "measure": {"samples": 2000})" +
                           std::string(extra.empty() ? "" : ", ") + extra + "}";
  return parse_config(text, "test", default_config(command));
}

std::string config_error(const std::string& text, const std::string& command = "lp-demo") {
  try {
    const ExperimentConfig c = parse_config(text, "cfg.json", default_config(command));
    validate_config(c, command);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("fixed point: linear contraction") {
  FixedPointOptions opt;
  opt.tol = 1e-12;
  SolveReport rep;
  const double x = fixed_point_solve<double>(Real([](const double& v) { return v / 2.0; }), 1.0, absdiff, opt, &rep);
  CHECK(std::abs(x) <= 1e-12);
  CHECK(rep.converged);
  REQUIRE(rep.ratios.size() + 1 == rep.steps.size());
  for (double q : rep.ratios) CHECK(q == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fixed point: cosine") {
  FixedPointOptions opt;
  opt.tol = 1e-13;
  opt.max_iter = 200;
  SolveReport rep;
  const double x = fixed_point_solve<double>(Real([](const double& v) { return std::cos(v); }), 1.0, absdiff, opt, &rep);
  CHECK(std::abs(x - std::cos(x)) <= 1e-12);
  CHECK(x == doctest::Approx(0.7390851332151607).epsilon(1e-12));
  CHECK(rep.max_ratio() < 0.95);
}

TEST_CASE("fixed point: expansion aborts") {
  FixedPointOptions opt;
  SolveReport rep;
  try {
    fixed_point_solve<double>(Real([](const double& v) { return 2.0 * v; }), 1.0, absdiff, opt, &rep);
    FAIL("expected non-contraction");
  } catch (const NonContractionError& e) {
    CHECK(e.report.iterations <= 3);
  }
  CHECK(rep.iterations <= 3);
  opt.ratio_guard = 1.0;
  CHECK_THROWS_AS(fixed_point_solve<double>(Real([](const double& v) { return v; }), 1.0, absdiff, opt),
                  std::invalid_argument);
  FixedPointOptions slow;
  slow.ratio_guard = 0.999;
  slow.max_iter = 5;
  CHECK_THROWS_AS(fixed_point_solve<double>(Real([](const double& v) { return 0.99 * v; }), 1.0, absdiff, slow),
                  ConvergenceError);
}

TEST_CASE("parameter-lipschitz probe") {
  FixedPointOptions opt;
  opt.tol = 1e-10;
  opt.max_iter = 200;
  const std::function<double(const double&, double)> affine = [](const double& x, double mu) { return 0.5 * x + mu; };
  const LipschitzProbe a = lipschitz_probe<double>(affine, 0.0, 0.1, 0.2, absdiff, opt);
  // f(mu) = 2 mu, q = 1/2, L = 1
  CHECK(a.distance == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(a.q == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(a.L == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.holds());

  const std::function<double(const double&, double)> cosmap = [](const double& x, double mu) {
    return 0.5 * std::cos(x) + mu * x * x / 4.0;
  };
  const LipschitzProbe b = lipschitz_probe<double>(cosmap, 0.5, 0.3, 0.35, absdiff, opt);
  CHECK(b.q < 1.0);
  CHECK(b.distance > 0.0);
  CHECK(b.holds());
}

TEST_CASE("snapshot round trip") {
  const GridSpec s = GridSpec::make(2, 8);
  const TorusField u = rnd(s, Shape::mat(2, 2), Parity::odd, 3);
  const TorusField v = field_from_json(field_to_json(u));
  CHECK(v.c == u.c);
  CHECK(v.parity == u.parity);
  CHECK(v.shape == u.shape);
  CHECK(v.spec == u.spec);

  TorusField th = rnd(s, Shape::vec(2), Parity::odd, 4, 1.0, 2, 0.0);
  th *= 0.2 / jacobian_sup(th);
  const Diffeo d = Diffeo::make(th);
  const fs::path dir = scratch("snap");
  fs::create_directories(dir);
  write_json((dir / "d.json").string(), diffeo_to_json(d));
  const Diffeo e = diffeo_from_json(read_json((dir / "d.json").string()));
  CHECK(e.theta.c == d.theta.c);
  REQUIRE(e.inverse_theta.has_value());
  CHECK(e.inverse_theta->c == d.inverse_theta->c);

  nlohmann::json bad = field_to_json(u);
  bad["schema_version"] = 99;
  CHECK_THROWS_AS(field_from_json(bad), DomainError);
  CHECK_THROWS_AS(diffeo_from_json(field_to_json(u)), DomainError);
}

TEST_CASE("config parsing diagnostics") {
  CHECK(config_error("{\"schema_version\": 1}") == "");
  const std::string syntax = config_error("{\n  \"schema_version\": 1,\n  \"grid\": {\"n\": 2,}\n}");
  CHECK(syntax.rfind("cfg.json:3:", 0) == 0);
  CHECK(syntax.find("parse error") != std::string::npos);
  CHECK(config_error("{\"schema_version\": 1, \"solver\": {\"tolerance\": 1}}").find("'solver.tolerance': unknown key") !=
        std::string::npos);
  CHECK(config_error("{\"schema_version\": 1, \"grid\": {\"M\": 8.5}}").find("'grid.M': expected an integer") !=
        std::string::npos);
  CHECK(config_error("{\"grid\": {\"M\": 8}}").find("'schema_version'") != std::string::npos);
  CHECK(config_error("{\"schema_version\": 2}").find("unsupported version") != std::string::npos);
  CHECK(config_error("{\"schema_version\": 1, \"omega\": [1, \"x\"]}").find("'omega[1]'") != std::string::npos);
  CHECK(config_error("{\"schema_version\": 1, \"seed\": -3}").find("'seed'") != std::string::npos);
  CHECK(config_error("[1, 2]").find("<root>") != std::string::npos);
}

TEST_CASE("config value checks") {
  CHECK(config_error(R"({"schema_version": 1, "solver": {"tol_abs": 0}})").find("'solver.tol_abs'") !=
        std::string::npos);
  CHECK(config_error(R"({"schema_version": 1, "solver": {"inner_tol": -1e-9}})").find("'solver.inner_tol'") !=
        std::string::npos);
  CHECK(config_error(R"({"schema_version": 1, "ladder": {"eps": [1e-3, 1e-2]}})").find("strictly decreasing") !=
        std::string::npos);
  CHECK(config_error(R"({"schema_version": 1, "ladder": {"eps": [1e-2, 1e-2]}})").find("strictly decreasing") !=
        std::string::npos);
  CHECK(config_error(R"({"schema_version": 1, "grid": {"M": 12}})").find("'grid.M'") != std::string::npos);
  CHECK(config_error(R"({"schema_version": 1, "omega": [1, 2, 3]})").find("'omega'") != std::string::npos);
  CHECK(config_error(R"({"schema_version": 1, "dio": {"tau": 0.5}})").find("'dio'") != std::string::npos);
  // families are checked where they are used
  CHECK(config_error(R"({"schema_version": 1, "problem": "nope"})", "lp-demo") == "");
  CHECK(config_error(R"({"schema_version": 1, "problem": "nope"})", "solve-hyperbolic").find("unknown family") !=
        std::string::npos);
  CHECK(config_error(R"({"schema_version": 1, "problem": "burgers", "grid": {"n": 1}})", "solve-hyperbolic")
            .find("needs n = 2") != std::string::npos);
  // transport step rule
  CHECK(config_error(R"({"schema_version": 1, "grid": {"n": 1, "M": 16}, "solver": {"n_tau": 64},
                         "checks": {"ks": [2, 4]}})",
                     "paracomp-check")
            .find("'solver.n_tau'") != std::string::npos);
  CHECK(config_error(R"({"schema_version": 1, "grid": {"n": 1, "M": 16}, "solver": {"n_tau": 64},
                         "checks": {"allow_coarse_steps": true, "ks": [2, 4]}})",
                     "paracomp-check") == "");
}

TEST_CASE("rejected configs leave no artifacts") {
  std::ostringstream log;
  const fs::path dir = scratch("rejected");
  RunOptions opt;
  opt.out_dir = dir.string();
  ExperimentConfig bad = default_config("reduce-matrix");
  bad.solver.max_iter = 0;
  CHECK(run_experiment("reduce-matrix", bad, opt, log) == kExitConfig);
  CHECK_FALSE(fs::exists(dir));
  CHECK(run_experiment("no-such-command", default_config("lp-demo"), opt, log) == kExitConfig);
  opt.symbolic_r = -1;
  CHECK(run_experiment("calculus-check", small("calculus-check"), opt, log) == kExitConfig);
  opt.symbolic_r = 2;
  ExperimentConfig missing = small("paracomp-check", R"("checks": {"diffeo": "/nonexistent/d.json", "ks": [2, 4]})");
  CHECK(run_experiment("paracomp-check", missing, opt, log) == kExitConfig);
  CHECK_FALSE(fs::exists(dir));
  CHECK(log.str().find("checks.diffeo") != std::string::npos);
}

TEST_CASE("non-convergence exits with the solver code") {
  std::ostringstream log;
  const fs::path dir = scratch("diverge");
  RunOptions opt;
  opt.out_dir = dir.string();
  ExperimentConfig c = small("reduce-matrix", R"("omega": [1.0, 0.5], "eps": 5.0, "N": 2)");
  CHECK(run_experiment("reduce-matrix", c, opt, log) == kExitSolver);
  const nlohmann::json j = read_json((dir / "reduce_matrix.json").string());
  CHECK(j.at("status") == "non-convergence");
}

TEST_CASE("artifacts are deterministic") {
  for (const std::string cmd : {"measure-dio", "reduce-matrix", "lp-demo", "straighten"}) {
    std::ostringstream log;
    const fs::path a = scratch(cmd + "_a"), b = scratch(cmd + "_b"), c = scratch(cmd + "_c");
    const ExperimentConfig cfg = small(cmd);
    RunOptions o;
    o.out_dir = a.string();
    REQUIRE(run_experiment(cmd, cfg, o, log) == kExitOk);
    o.out_dir = b.string();
    o.threads = 1;
    REQUIRE(run_experiment(cmd, cfg, o, log) == kExitOk);
    CHECK_MESSAGE(same_tree(a, b), cmd);
    o.out_dir = c.string();
    o.seed = cfg.seed + 1;
    REQUIRE(run_experiment(cmd, cfg, o, log) == kExitOk);
    CHECK_FALSE_MESSAGE(same_tree(a, c), cmd);
  }
}

TEST_CASE("built-in experiment outputs") {
  std::ostringstream log;
  RunOptions o;
  const fs::path lp = scratch("lp");
  o.out_dir = lp.string();
  REQUIRE(run_experiment("lp-demo", small("lp-demo"), o, log) == kExitOk);
  const nlohmann::json j = read_json((lp / "lp_demo.json").string());
  CHECK(j.at("max_error").get<double>() <= 1e-12);
  CHECK(j.at("partition_error").get<double>() <= 1e-12);
  const std::string csv = slurp(lp / "lp_partition.csv");
  CHECK(csv.rfind("j,lower,upper,block_l2,outside_support,max_error\n", 0) == 0);
  CHECK(fs::exists(lp / "lp_partition.gp"));

  const fs::path rm = scratch("rm");
  o.out_dir = rm.string();
  REQUIRE(run_experiment("reduce-matrix", default_config("reduce-matrix"), o, log) == kExitOk);
  const nlohmann::json r = read_json((rm / "reduce_matrix.json").string());
  CHECK(r.at("residual").get<double>() <= 1e-9);
  CHECK(r.at("oracle_gap").get<double>() <= 1e-8);
  CHECK_FALSE(r.at("report").contains("wall_time"));
  CHECK(field_from_json(read_json((rm / "matred_U.json").string())).parity == Parity::even);

  const fs::path md = scratch("md");
  o.out_dir = md.string();
  REQUIRE(run_experiment("measure-dio", small("measure-dio"), o, log) == kExitOk);
  std::istringstream rows(slurp(md / "measure_dio.csv"));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "gamma,R,samples,excluded_fraction,seed");
  int count = 0;
  while (std::getline(rows, line)) ++count;
  CHECK(count == 4);

  // paracomp-check reads back its own snapshots
  const fs::path pc = scratch("pc");
  o.out_dir = pc.string();
  REQUIRE(run_experiment("paracomp-check", small("paracomp-check", R"("checks": {"ks": [2, 4, 8]})"), o, log) ==
          kExitOk);
  ExperimentConfig again = small("paracomp-check", R"("checks": {"ks": [2, 4, 8], "diffeo": ")" +
                                                       (pc / "diffeo.json").string() + R"(", "field": ")" +
                                                       (pc / "field.json").string() + "\"}");
  const fs::path pc2 = scratch("pc2");
  o.out_dir = pc2.string();
  REQUIRE(run_experiment("paracomp-check", again, o, log) == kExitOk);
  CHECK(slurp(pc / "smoothing_fits.csv") == slurp(pc2 / "smoothing_fits.csv"));
}
