#pragma once

#include "paratorus/grid.hpp"

#include <cstdint>
#include <vector>

namespace paratorus {

struct DioParams {
  double gamma = 0.1;
  double tau = 1.5;
  int M_dio = 200;  // lattice range |xi|_inf <= M_dio for membership checks

  void validate(int n) const;  // throws DomainError
};

// |omega . xi| >= gamma |xi|^-tau for all 0 < |xi|_inf <= M_dio (Euclidean |xi|).
bool dio_check(const std::vector<double>& omega, const DioParams& params);
// Plain scan over the whole lattice; reference for dio_check.
bool dio_check_bruteforce(const std::vector<double>& omega, const DioParams& params);

// Lexicographic half lattice: first nonzero component positive.
bool in_upper_half(const int* xi, int n);

// omega . xi pushed away from zero: t if |t| >= gamma |xi|^-tau, otherwise
// sign(t) gamma |xi|^-tau with sign(0) fixed by the half lattice.
double clamped_divisor(const std::vector<double>& omega, const int* xi, int n, const DioParams& params);

// Fourier multiplier 1 / (i clamp(omega . xi)) on one lattice, zero at xi = 0.
class ExtendedInverse {
 public:
  ExtendedInverse(const GridSpec& spec, const std::vector<double>& omega, const DioParams& params);

  // Requires a zero-mean input (relative tolerance avg_tol); output parity flipped.
  TorusField apply(const TorusField& u, double avg_tol = 1e-12) const;
  cplx value(std::size_t idx) const { return div_[idx] == 0.0 ? cplx(0.0) : cplx(0.0, -1.0 / div_[idx]); }
  double divisor(std::size_t idx) const { return div_[idx]; }  // clamp(omega . xi), 0 at xi = 0
  // True when no lattice frequency needed the clamp.
  bool exact() const { return clamped_ == 0; }
  std::size_t clamped_count() const { return clamped_; }
  const std::vector<double>& omega() const { return omega_; }

 private:
  GridSpec spec_;
  std::vector<double> omega_;
  DioParams params_;
  std::vector<double> div_;
  std::size_t clamped_ = 0;
};

TorusField extended_multiplier_apply(const std::vector<double>& omega, const DioParams& params,
                                     const TorusField& u);

// Fraction of uniform samples in the ball B(0, R) of R^n failing dio_check.
// Samples are drawn in fixed chunks with per-chunk seeds, so the result
// does not depend on the thread count.
double dio_measure_mc(const DioParams& params, int n, double R, std::size_t samples, std::uint64_t seed);
double dio_measure_mc_serial(const DioParams& params, int n, double R, std::size_t samples, std::uint64_t seed);

// Uniform point of B(0, R) for sample k of a seeded stream (same draw as the MC).
std::vector<std::vector<double>> ball_samples(int n, double R, std::size_t samples, std::uint64_t seed);

}  // namespace paratorus
