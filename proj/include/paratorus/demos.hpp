#pragma once

#include "paratorus/grid.hpp"
#include "paratorus/kam.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace paratorus {

// Seeded smooth random field: coefficients on |xi|_inf <= max_mode with
// magnitude amplitude * e^{-decay |xi|}, projected to the requested parity
// and made real-valued (conjugate symmetric).  The mean is set to zero for
// odd fields and kept for the others.
TorusField random_field(const GridSpec& spec, Shape shape, Parity parity, double amplitude, int max_mode,
                        double decay, std::uint64_t seed);

// Built-in problem families for the hyperbolic solver, selected by key.
struct DemoFamily {
  std::string key;
  std::string description;
  int n = 2;  // torus dimension the family is written for (0: any)
  int N = 1;
  std::vector<double> omega;  // default frequency
  std::function<HyperbolicProblem(const GridSpec&, double eps, const DioParams&)> build;
};

const std::vector<DemoFamily>& demo_registry();
const DemoFamily& demo_family(const std::string& key);  // throws DomainError for unknown keys

// Sum of sin(x_k) placed in every component of an N-vector field.
TorusField sine_forcing(const GridSpec& spec, int N);

}  // namespace paratorus
