#include "paratorus/small_divisor.hpp"

#include "paratorus/field_ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace paratorus {

void DioParams::validate(int n) const {
  if (!(gamma > 0.0)) throw DomainError("DioParams: gamma must be positive");
  if (!(tau > n - 1)) throw DomainError("DioParams: tau must exceed n - 1");
  if (M_dio < 1) throw DomainError("DioParams: M_dio must be >= 1");
}

namespace {

double euclid(const int* xi, int n) {
  double s = 0.0;
  for (int d = 0; d < n; ++d) s += static_cast<double>(xi[d]) * xi[d];
  return std::sqrt(s);
}

bool violates(const std::vector<double>& omega, const int* xi, int n, const DioParams& p) {
  double t = 0.0;
  for (int d = 0; d < n; ++d) t += omega[d] * xi[d];
  return std::abs(t) < p.gamma * std::pow(euclid(xi, n), -p.tau);
}

}  // namespace

bool dio_check_bruteforce(const std::vector<double>& omega, const DioParams& params) {
  const int n = static_cast<int>(omega.size());
  const int M = params.M_dio;
  std::vector<int> xi(n, -M);
  while (true) {
    bool zero = true;
    for (int v : xi) zero = zero && v == 0;
    if (!zero && violates(omega, xi.data(), n, params)) return false;
    int d = n - 1;
    while (d >= 0 && xi[d] == M) xi[d--] = -M;
    if (d < 0) break;
    ++xi[d];
  }
  return true;
}

// For every choice of the other coordinates only a short integer range of
// the coordinate along the largest |omega_a| can come close to resonance.
bool dio_check(const std::vector<double>& omega, const DioParams& params) {
  const int n = static_cast<int>(omega.size());
  if (n < 1) throw ShapeError("dio_check: empty frequency");
  const int M = params.M_dio;
  int a = 0;
  for (int d = 1; d < n; ++d)
    if (std::abs(omega[d]) > std::abs(omega[a])) a = d;
  const double wa = omega[a];
  if (wa == 0.0) return false;
  std::vector<int> xi(n, 0);
  std::vector<int> others;
  for (int d = 0; d < n; ++d)
    if (d != a) {
      others.push_back(d);
      xi[d] = -M;
    }
  while (true) {
    double s = 0.0, r2 = 0.0;
    for (int d : others) {
      s += omega[d] * xi[d];
      r2 += static_cast<double>(xi[d]) * xi[d];
    }
    // |xi| >= max(|xi'|, 1), so the threshold is at most this.
    const double T = params.gamma * std::pow(std::max(1.0, std::sqrt(r2)), -params.tau);
    double lo = (-s - T) / wa, hi = (-s + T) / wa;
    if (lo > hi) std::swap(lo, hi);
    const long klo = std::max<long>(-M, static_cast<long>(std::ceil(lo)) - 1);
    const long khi = std::min<long>(M, static_cast<long>(std::floor(hi)) + 1);
    for (long k = klo; k <= khi; ++k) {
      xi[a] = static_cast<int>(k);
      bool zero = true;
      for (int v : xi) zero = zero && v == 0;
      if (!zero && violates(omega, xi.data(), n, params)) return false;
    }
    xi[a] = 0;
    std::size_t i = others.size();
    while (i > 0 && xi[others[i - 1]] == M) xi[others[--i]] = -M;
    if (i == 0) break;
    ++xi[others[i - 1]];
  }
  return true;
}

bool in_upper_half(const int* xi, int n) {
  for (int d = 0; d < n; ++d)
    if (xi[d] != 0) return xi[d] > 0;
  return false;
}

double clamped_divisor(const std::vector<double>& omega, const int* xi, int n, const DioParams& params) {
  double t = 0.0;
  for (int d = 0; d < n; ++d) t += omega[d] * xi[d];
  const double thr = params.gamma * std::pow(euclid(xi, n), -params.tau);
  if (std::abs(t) >= thr) return t;
  const double sgn = t > 0 ? 1.0 : (t < 0 ? -1.0 : (in_upper_half(xi, n) ? 1.0 : -1.0));
  return sgn * thr;
}

ExtendedInverse::ExtendedInverse(const GridSpec& spec, const std::vector<double>& omega, const DioParams& params)
    : spec_(spec), omega_(omega), params_(params) {
  if (static_cast<int>(omega.size()) != spec.n) throw ShapeError("ExtendedInverse: omega has wrong length");
  params.validate(spec.n);
  const auto& t = tables(spec);
  const std::size_t L = spec.lattice_size();
  div_.assign(L, 0.0);
  // Fill the upper half and mirror, so L^{-xi} = -L^{xi} holds bit for bit.
  for (std::size_t i = 0; i < L; ++i) {
    const int* xi = t.point(i);
    if (!in_upper_half(xi, spec.n)) continue;
    double tt = 0.0;
    for (int d = 0; d < spec.n; ++d) tt += omega[d] * xi[d];
    const double c = clamped_divisor(omega, xi, spec.n, params);
    if (c != tt) clamped_ += 2;
    div_[i] = c;
    div_[t.negate(i)] = -c;
  }
}

TorusField ExtendedInverse::apply(const TorusField& u, double avg_tol) const {
  if (u.spec != spec_) throw ShapeError("ExtendedInverse: spec mismatch");
  const std::size_t z = u.zero_index();
  const double scale = std::max(1e-300, max_abs_coeff(u));
  for (int c = 0; c < u.comps(); ++c)
    if (std::abs(u.at(c, z)) > avg_tol * scale)
      throw DomainError("extended multiplier: input average is not zero");
  TorusField out(u.spec, u.shape, parity_flip(u.parity));
  const std::size_t L = u.L();
  for (int c = 0; c < u.comps(); ++c)
    for (std::size_t i = 0; i < L; ++i) {
      if (i == z) continue;
      // (a + ib) / (i d), written out so it is a plain correctly rounded division
      const cplx v = u.at(c, i);
      out.at(c, i) = cplx(v.imag() / div_[i], -v.real() / div_[i]);
    }
  return out;
}

TorusField extended_multiplier_apply(const std::vector<double>& omega, const DioParams& params, const TorusField& u) {
  return ExtendedInverse(u.spec, omega, params).apply(u);
}

namespace {

constexpr std::size_t kChunk = 256;

std::vector<double> draw_in_ball(std::mt19937_64& rng, int n, double R) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(n);
  double r2 = 0.0;
  do {
    r2 = 0.0;
    for (int d = 0; d < n; ++d) {
      x[d] = gauss(rng);
      r2 += x[d] * x[d];
    }
  } while (r2 == 0.0);
  const double scale = R * std::pow(unif(rng), 1.0 / n) / std::sqrt(r2);
  for (double& v : x) v *= scale;
  return x;
}

std::mt19937_64 chunk_rng(std::uint64_t seed, std::size_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  return std::mt19937_64(seq);
}

std::size_t count_chunk(const DioParams& params, int n, double R, std::size_t samples, std::uint64_t seed,
                        std::size_t c) {
  auto rng = chunk_rng(seed, c);
  const std::size_t end = std::min(samples, (c + 1) * kChunk);
  std::size_t bad = 0;
  for (std::size_t k = c * kChunk; k < end; ++k)
    if (!dio_check(draw_in_ball(rng, n, R), params)) ++bad;
  return bad;
}

}  // namespace

std::vector<std::vector<double>> ball_samples(int n, double R, std::size_t samples, std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  out.reserve(samples);
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  for (std::size_t c = 0; c < chunks; ++c) {
    auto rng = chunk_rng(seed, c);
    const std::size_t end = std::min(samples, (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) out.push_back(draw_in_ball(rng, n, R));
  }
  return out;
}

double dio_measure_mc(const DioParams& params, int n, double R, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw DomainError("dio_measure_mc: samples must be >= 1");
  params.validate(n);
  const long chunks = static_cast<long>((samples + kChunk - 1) / kChunk);
  std::size_t bad = 0;
#pragma omp parallel for reduction(+ : bad) schedule(dynamic)
  for (long c = 0; c < chunks; ++c) bad += count_chunk(params, n, R, samples, seed, static_cast<std::size_t>(c));
  return static_cast<double>(bad) / static_cast<double>(samples);
}

double dio_measure_mc_serial(const DioParams& params, int n, double R, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw DomainError("dio_measure_mc: samples must be >= 1");
  params.validate(n);
  std::size_t bad = 0;
  for (const auto& w : ball_samples(n, R, samples, seed))
    if (!dio_check(w, params)) ++bad;
  return static_cast<double>(bad) / static_cast<double>(samples);
}

}  // namespace paratorus
