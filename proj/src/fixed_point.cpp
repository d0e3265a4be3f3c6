#include "paratorus/fixed_point.hpp"

#include <algorithm>

namespace paratorus {

double SolveReport::max_ratio() const {
  double m = 0.0;
  for (double r : ratios)
    if (std::isfinite(r)) m = std::max(m, r);
  return m;
}

nlohmann::json SolveReport::to_json(bool with_timing) const {
  nlohmann::json j;
  j["iterations"] = iterations;
  j["contraction_ratios"] = ratios;
  j["steps"] = steps;
  j["residual_norms"] = residuals;
  if (with_timing) j["wall_time"] = wall_time;
  j["feasible"] = feasible ? nlohmann::json(*feasible) : nlohmann::json(nullptr);
  j["stage"] = stage;
  j["converged"] = converged;
  return j;
}

}  // namespace paratorus
