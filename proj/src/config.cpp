#include "paratorus/config.hpp"

#include "paratorus/demos.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace paratorus {

using nlohmann::json;

GridSpec ExperimentConfig::grid() const { return GridSpec::make(n, M, G > 0 ? G : 4 * M); }

std::vector<double> ExperimentConfig::frequency() const {
  if (!omega.empty()) return omega;
  for (const DemoFamily& f : demo_registry())
    if (f.key == problem && static_cast<int>(f.omega.size()) == n) return f.omega;
  static const double generic[] = {1.0, std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0)};
  return std::vector<double>(generic, generic + std::min(n, 4));
}

double ExperimentConfig::s0() const { return 2.0 * dio.tau + 1.0 + 0.5 * n + delta; }
double ExperimentConfig::s1() const { return 2.0 * dio.tau + 2.0 + n + delta; }

int min_transport_steps(int M) { return static_cast<int>(std::ceil(8.0 * std::sqrt(1.0 + double(M) * M))); }

ExperimentConfig default_config(const std::string& command) {
  ExperimentConfig c;
  if (command == "lp-demo") {
    c.M = 64;
  } else if (command == "calculus-check") {
    c.M = 8;
  } else if (command == "paracomp-check") {
    c.n = 1;
    c.M = 64;
  } else if (command == "reduce-matrix") {
    c.N = 2;
    c.solver.inner_tol = 1e-12;
  } else if (command == "straighten") {
    c.solver.inner_tol = 1e-12;
  } else if (command == "solve-hyperbolic") {
    c.M = 32;
    c.solver.n_tau = 16;
  } else if (command == "scan-feasible") {
    c.eps = 1e-2;
    c.solver.n_tau = 8;
    c.solver.tol_abs = 1e-9;
    c.solver.inner_tol = 1e-10;
  }
  return c;
}

namespace {

struct Reader {
  std::string source;

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw ConfigError((source.empty() ? "" : source + ": ") + "field '" + path + "': " + msg);
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  void keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(join(path, it.key()), "unknown key");
  }

  void number(const json& obj, const std::string& path, const char* key, double& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(join(path, key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(join(path, key), "must be finite");
  }

  template <class I>
  void integer(const json& obj, const std::string& path, const char* key, I& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    if constexpr (std::is_unsigned_v<I>) {
      if (v.is_number_unsigned()) {
        out = v.get<I>();
        return;
      }
      if (v.get<long long>() < 0) fail(join(path, key), "must be non-negative");
    }
    out = v.get<I>();
  }

  void string(const json& obj, const std::string& path, const char* key, std::string& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    out = v.get<std::string>();
  }

  void boolean(const json& obj, const std::string& path, const char* key, bool& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(join(path, key), "expected true or false");
    out = v.get<bool>();
  }

  void numbers(const json& obj, const std::string& path, const char* key, std::vector<double>& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string p = join(path, key);
    if (!v.is_array()) fail(p, "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(p + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
      if (!std::isfinite(out.back())) fail(p + "[" + std::to_string(i) + "]", "must be finite");
    }
  }

  void integers(const json& obj, const std::string& path, const char* key, std::vector<int>& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string p = join(path, key);
    if (!v.is_array()) fail(p, "expected an array of integers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) fail(p + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back(v[i].get<int>());
    }
  }
};

void line_col(const std::string& text, std::size_t byte, std::size_t& line, std::size_t& col) {
  line = 1;
  col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source, const ExperimentConfig& base) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    std::size_t line, col;
    line_col(text, e.byte, line, col);
    std::string what = e.what();
    // drop the library prefix "[json.exception.parse_error.101] parse error at line .., column ..: "
    const auto pos = what.find(": ");
    if (pos != std::string::npos) what = what.substr(pos + 2);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": parse error: " + what);
  }

  const Reader r{source};
  r.keys(j, "",
         {"schema_version", "problem", "grid", "N", "omega", "eps", "s", "dio", "solver", "ladder", "measure", "checks",
          "output", "seed"});
  if (!j.contains("schema_version")) r.fail("schema_version", "missing (expected " + std::to_string(kConfigSchema) + ")");

  ExperimentConfig c = base;
  r.integer(j, "", "schema_version", c.schema_version);
  if (c.schema_version != kConfigSchema)
    r.fail("schema_version", "unsupported version " + std::to_string(c.schema_version) + " (expected " +
                                 std::to_string(kConfigSchema) + ")");
  r.string(j, "", "problem", c.problem);
  r.integer(j, "", "N", c.N);
  r.numbers(j, "", "omega", c.omega);
  r.number(j, "", "eps", c.eps);
  r.number(j, "", "s", c.s);
  r.integer(j, "", "seed", c.seed);

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    r.keys(g, "grid", {"n", "M", "G"});
    r.integer(g, "grid", "n", c.n);
    r.integer(g, "grid", "M", c.M);
    r.integer(g, "grid", "G", c.G);
  }
  if (j.contains("dio")) {
    const json& d = j.at("dio");
    r.keys(d, "dio", {"gamma", "tau", "delta", "M_dio"});
    r.number(d, "dio", "gamma", c.dio.gamma);
    r.number(d, "dio", "tau", c.dio.tau);
    r.number(d, "dio", "delta", c.delta);
    r.integer(d, "dio", "M_dio", c.dio.M_dio);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    r.keys(s, "solver", {"tol_abs", "tol_rel", "inner_tol", "ratio_guard", "max_iter", "neumann_cutoff", "n_tau"});
    r.number(s, "solver", "tol_abs", c.solver.tol_abs);
    r.number(s, "solver", "tol_rel", c.solver.tol_rel);
    r.number(s, "solver", "inner_tol", c.solver.inner_tol);
    r.number(s, "solver", "ratio_guard", c.solver.ratio_guard);
    r.integer(s, "solver", "max_iter", c.solver.max_iter);
    r.number(s, "solver", "neumann_cutoff", c.solver.neumann_cutoff);
    r.integer(s, "solver", "n_tau", c.solver.n_tau);
  }
  if (j.contains("ladder")) {
    const json& l = j.at("ladder");
    r.keys(l, "ladder", {"eps", "exponent", "radius", "samples"});
    r.numbers(l, "ladder", "eps", c.ladder.eps);
    r.number(l, "ladder", "exponent", c.ladder.exponent);
    r.number(l, "ladder", "radius", c.ladder.radius);
    r.integer(l, "ladder", "samples", c.ladder.samples);
  }
  if (j.contains("measure")) {
    const json& m = j.at("measure");
    r.keys(m, "measure", {"gammas", "radius", "samples"});
    r.numbers(m, "measure", "gammas", c.measure.gammas);
    r.number(m, "measure", "radius", c.measure.radius);
    r.integer(m, "measure", "samples", c.measure.samples);
  }
  if (j.contains("checks")) {
    const json& k = j.at("checks");
    r.keys(k, "checks", {"symbols", "lip", "ks", "index", "diffeo", "field", "allow_coarse_steps"});
    r.integer(k, "checks", "symbols", c.checks.symbols);
    r.number(k, "checks", "lip", c.checks.lip);
    r.integers(k, "checks", "ks", c.checks.ks);
    r.number(k, "checks", "index", c.checks.index);
    r.string(k, "checks", "diffeo", c.checks.diffeo);
    r.string(k, "checks", "field", c.checks.field);
    r.boolean(k, "checks", "allow_coarse_steps", c.checks.allow_coarse_steps);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    r.keys(o, "output", {"dir"});
    r.string(o, "output", "dir", c.out_dir);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, base);
}

void validate_config(const ExperimentConfig& c, const std::string& command) {
  const Reader r{""};
  auto positive = [&](const char* path, double v) {
    if (!(v > 0.0)) r.fail(path, "must be > 0");
  };
  if (c.n < 1 || c.n > 3) r.fail("grid.n", "must be 1, 2 or 3");
  if (c.M < 4 || (c.M & (c.M - 1)) != 0) r.fail("grid.M", "must be a power of two >= 4");
  if (c.G != 0 && c.G < 4 * c.M) r.fail("grid.G", "must be >= 4 M (or 0 for the default)");
  if (c.N < 1 || c.N > 4) r.fail("N", "must be in 1..4");
  if (!c.omega.empty() && static_cast<int>(c.omega.size()) != c.n)
    r.fail("omega", "needs " + std::to_string(c.n) + " components");
  if (!(c.eps >= 0.0)) r.fail("eps", "must be >= 0");
  if (c.s < 0.0) r.fail("s", "must be >= 0 (0 picks the family default)");
  try {
    c.dio.validate(c.n);
  } catch (const std::exception& e) {
    r.fail("dio", e.what());
  }
  if (!(c.delta > 0.0)) r.fail("dio.delta", "must be > 0");

  positive("solver.tol_abs", c.solver.tol_abs);
  positive("solver.tol_rel", c.solver.tol_rel);
  positive("solver.inner_tol", c.solver.inner_tol);
  positive("solver.neumann_cutoff", c.solver.neumann_cutoff);
  if (!(c.solver.ratio_guard > 0.0 && c.solver.ratio_guard < 1.0)) r.fail("solver.ratio_guard", "must be in (0, 1)");
  if (c.solver.max_iter < 1) r.fail("solver.max_iter", "must be >= 1");
  if (c.solver.n_tau < 0) r.fail("solver.n_tau", "must be >= 0");

  if (c.ladder.eps.empty()) r.fail("ladder.eps", "must not be empty");
  for (std::size_t i = 0; i < c.ladder.eps.size(); ++i) {
    if (!(c.ladder.eps[i] > 0.0)) r.fail("ladder.eps[" + std::to_string(i) + "]", "must be > 0");
    if (i > 0 && !(c.ladder.eps[i] < c.ladder.eps[i - 1]))
      r.fail("ladder.eps[" + std::to_string(i) + "]", "ladder must be strictly decreasing");
  }
  positive("ladder.exponent", c.ladder.exponent);
  positive("ladder.radius", c.ladder.radius);
  if (c.ladder.samples < 1) r.fail("ladder.samples", "must be >= 1");

  if (c.measure.gammas.empty()) r.fail("measure.gammas", "must not be empty");
  for (std::size_t i = 0; i < c.measure.gammas.size(); ++i)
    if (!(c.measure.gammas[i] > 0.0)) r.fail("measure.gammas[" + std::to_string(i) + "]", "must be > 0");
  positive("measure.radius", c.measure.radius);
  if (c.measure.samples < 1) r.fail("measure.samples", "must be >= 1");

  if (c.checks.symbols < 1) r.fail("checks.symbols", "must be >= 1");
  if (!(c.checks.lip > 0.0 && c.checks.lip < 1.0)) r.fail("checks.lip", "must be in (0, 1)");
  if (c.checks.ks.size() < 2) r.fail("checks.ks", "needs at least two frequencies");
  if (command == "paracomp-check")
    for (std::size_t i = 0; i < c.checks.ks.size(); ++i)
      if (c.checks.ks[i] < 1 || c.checks.ks[i] > c.M)
        r.fail("checks.ks[" + std::to_string(i) + "]", "must be in 1..M");
  if (c.out_dir.empty()) r.fail("output.dir", "must not be empty");

  const bool needs_family = command == "solve-hyperbolic" || command == "scan-feasible";
  if (needs_family) {
    const DemoFamily* fam = nullptr;
    for (const DemoFamily& f : demo_registry())
      if (f.key == c.problem) fam = &f;
    if (!fam) {
      std::string keys;
      for (const DemoFamily& f : demo_registry()) keys += (keys.empty() ? "" : ", ") + f.key;
      r.fail("problem", "unknown family '" + c.problem + "' (known: " + keys + ")");
    }
    if (fam->n != 0 && fam->n != c.n) r.fail("grid.n", "family '" + c.problem + "' needs n = " + std::to_string(fam->n));
  }
  if (command == "paracomp-check" && c.solver.n_tau > 0 && !c.checks.allow_coarse_steps &&
      c.solver.n_tau < min_transport_steps(c.M))
    r.fail("solver.n_tau", "must be >= 8 <M> = " + std::to_string(min_transport_steps(c.M)) +
                               " (set checks.allow_coarse_steps to override)");
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["problem"] = c.problem;
  j["grid"] = {{"n", c.n}, {"M", c.M}, {"G", c.G > 0 ? c.G : 4 * c.M}};
  j["N"] = c.N;
  j["omega"] = c.frequency();
  j["eps"] = c.eps;
  j["s"] = c.s;
  j["dio"] = {{"gamma", c.dio.gamma}, {"tau", c.dio.tau}, {"delta", c.delta}, {"M_dio", c.dio.M_dio}};
  j["solver"] = {{"tol_abs", c.solver.tol_abs},       {"tol_rel", c.solver.tol_rel},
                 {"inner_tol", c.solver.inner_tol},   {"ratio_guard", c.solver.ratio_guard},
                 {"max_iter", c.solver.max_iter},     {"neumann_cutoff", c.solver.neumann_cutoff},
                 {"n_tau", c.solver.n_tau}};
  j["ladder"] = {{"eps", c.ladder.eps},
                 {"exponent", c.ladder.exponent},
                 {"radius", c.ladder.radius},
                 {"samples", c.ladder.samples}};
  j["measure"] = {{"gammas", c.measure.gammas}, {"radius", c.measure.radius}, {"samples", c.measure.samples}};
  j["checks"] = {{"symbols", c.checks.symbols},
                 {"lip", c.checks.lip},
                 {"ks", c.checks.ks},
                 {"index", c.checks.index},
                 {"diffeo", c.checks.diffeo},
                 {"field", c.checks.field},
                 {"allow_coarse_steps", c.checks.allow_coarse_steps}};
  j["output"] = {{"dir", c.out_dir}};
  j["seed"] = c.seed;
  return j;
}

}  // namespace paratorus
