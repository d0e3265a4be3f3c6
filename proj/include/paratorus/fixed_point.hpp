#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace paratorus {

struct SolveReport {
  int iterations = 0;
  std::vector<double> ratios;  // |x_{k+1} - x_k| / |x_k - x_{k-1}|
  std::vector<double> steps;   // |x_{k+1} - x_k|
  std::map<std::string, double> residuals;
  double wall_time = 0.0;
  std::optional<bool> feasible;
  std::string stage;
  bool converged = false;

  double max_ratio() const;
  // wall_time is left out unless asked for, keeping artifacts byte-stable.
  nlohmann::json to_json(bool with_timing = false) const;
};

struct SolverError : std::runtime_error {
  SolverError(const std::string& what, std::string stage_, SolveReport rep)
      : std::runtime_error(stage_.empty() ? what : stage_ + ": " + what), stage(std::move(stage_)),
        report(std::move(rep)) {}
  std::string stage;
  SolveReport report;
};
struct NonContractionError : SolverError {
  using SolverError::SolverError;
};
struct ConvergenceError : SolverError {
  using SolverError::SolverError;
};

struct FixedPointOptions {
  double tol = 1e-12;
  int max_iter = 100;
  double ratio_guard = 0.95;
  // Steps below this size are round-off; their ratios are not judged.
  double noise_floor = 0.0;
  std::string stage;
};

// Picard iteration x <- map(x).  dist(a, b) measures |a - b|.  Aborts when
// the step ratio reaches ratio_guard twice in a row.  On success the last
// step |map(x_k) - x_k| is <= tol and map(x_k) is returned.
template <class T>
T fixed_point_solve(const std::function<T(const T&)>& map, T x0, const std::function<double(const T&, const T&)>& dist,
                    const FixedPointOptions& opt, SolveReport* report = nullptr) {
  if (!(opt.ratio_guard > 0.0 && opt.ratio_guard < 1.0)) throw std::invalid_argument("ratio_guard must be in (0,1)");
  SolveReport rep;
  rep.stage = opt.stage;
  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&]() {
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (report) *report = rep;
  };
  T x = std::move(x0);
  double prev = -1.0;
  int breaches = 0;
  for (int k = 0; k < opt.max_iter; ++k) {
    T next = map(x);
    const double d = dist(next, x);
    rep.iterations = k + 1;
    rep.steps.push_back(d);
    if (!std::isfinite(d)) {
      finish();
      throw NonContractionError("iterate is not finite", opt.stage, rep);
    }
    if (prev >= 0.0) {
      const double r = prev > 0.0 ? d / prev : (d > 0.0 ? INFINITY : 0.0);
      rep.ratios.push_back(r);
      const bool judged = d > opt.noise_floor && d > opt.tol;
      breaches = (judged && r >= opt.ratio_guard) ? breaches + 1 : 0;
      if (breaches >= 2) {
        finish();
        throw NonContractionError("contraction ratio above guard", opt.stage, rep);
      }
    }
    x = std::move(next);
    if (d <= opt.tol) {
      rep.converged = true;
      rep.residuals["fixed_point_step"] = d;
      finish();
      return x;
    }
    prev = d;
  }
  finish();
  throw ConvergenceError("maximum iterations reached", opt.stage, rep);
}

// Parameter-Lipschitz probe for a family map(x, mu): solves at mu1 and mu2
// and compares |f(mu1) - f(mu2)| with L / (1 - q) |mu1 - mu2|, where q is the
// largest observed ratio and L the largest |map(x, mu1) - map(x, mu2)| / |mu1 - mu2|
// over the points visited.
struct LipschitzProbe {
  double distance = 0.0;
  double bound = 0.0;
  double q = 0.0;
  double L = 0.0;
  bool holds() const { return distance <= bound * (1.0 + 1e-12) + 1e-300; }
};

template <class T>
LipschitzProbe lipschitz_probe(const std::function<T(const T&, double)>& map, const T& x0, double mu1, double mu2,
                               const std::function<double(const T&, const T&)>& dist, const FixedPointOptions& opt) {
  LipschitzProbe out;
  std::vector<T> visited;
  auto run = [&](double mu) {
    SolveReport r;
    std::function<T(const T&)> m = [&](const T& x) {
      visited.push_back(x);
      return map(x, mu);
    };
    T f = fixed_point_solve<T>(m, x0, dist, opt, &r);
    for (double q : r.ratios)
      if (std::isfinite(q)) out.q = std::max(out.q, q);
    return f;
  };
  const T f1 = run(mu1);
  const T f2 = run(mu2);
  const double dmu = std::abs(mu1 - mu2);
  for (const T& x : visited) out.L = std::max(out.L, dist(map(x, mu1), map(x, mu2)) / dmu);
  out.distance = dist(f1, f2);
  out.bound = out.q < 1.0 ? out.L / (1.0 - out.q) * dmu : INFINITY;
  return out;
}

}  // namespace paratorus
