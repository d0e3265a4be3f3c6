#include "paratorus/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace paratorus {

namespace {
std::mutex& plan_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

FftEngine::FftEngine(int n, int G) {
  std::vector<int> dims(n, G);
  std::size_t P = 1;
  for (int d = 0; d < n; ++d) P *= G;
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * P));
  const unsigned flags = P <= (1u << 16) ? FFTW_MEASURE : FFTW_ESTIMATE;
  fwd_ = fftw_plan_dft(n, dims.data(), buf, buf, FFTW_FORWARD, flags);
  bwd_ = fftw_plan_dft(n, dims.data(), buf, buf, FFTW_BACKWARD, flags);
  fftw_free(buf);
  if (!fwd_ || !bwd_) throw std::runtime_error("fft: planning failed");
}

FftEngine::~FftEngine() {
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

const FftEngine& FftEngine::get(int n, int G) {
  static std::map<std::pair<int, int>, std::unique_ptr<FftEngine>> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto key = std::make_pair(n, G);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::unique_ptr<FftEngine>(new FftEngine(n, G))).first;
  return *it->second;
}

void FftEngine::forward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void FftEngine::backward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), p, p);
}

void synthesize_component(const GridSpec& spec, const cplx* coeffs, cplx* grid) {
  const auto& t = tables(spec);
  const std::size_t P = spec.grid_size(), L = spec.lattice_size();
  std::fill(grid, grid + P, cplx(0.0));
  for (std::size_t i = 0; i < L; ++i) grid[t.fft_at[i]] = coeffs[i];
  FftEngine::get(spec.n, spec.G).backward(grid);
}

void analyze_component(const GridSpec& spec, cplx* grid, cplx* coeffs) {
  const auto& t = tables(spec);
  const std::size_t P = spec.grid_size(), L = spec.lattice_size();
  FftEngine::get(spec.n, spec.G).forward(grid);
  const double scale = 1.0 / static_cast<double>(P);
  for (std::size_t i = 0; i < L; ++i) coeffs[i] = grid[t.fft_at[i]] * scale;
}

GridValues synthesize(const TorusField& u) {
  GridValues g(u.spec, u.shape);
  for (int k = 0; k < u.comps(); ++k) synthesize_component(u.spec, u.comp(k), g.comp(k));
  return g;
}

TorusField analyze(const GridValues& g, Parity parity) {
  TorusField u(g.spec, g.shape, parity);
  cvec scratch(g.P());
  for (int k = 0; k < g.shape.comps(); ++k) {
    std::copy(g.comp(k), g.comp(k) + g.P(), scratch.begin());
    analyze_component(g.spec, scratch.data(), u.comp(k));
  }
  return u;
}

void grid_point(const GridSpec& spec, std::size_t p, double* x) {
  const double h = 2.0 * std::numbers::pi / spec.G;
  for (int d = spec.n - 1; d >= 0; --d) {
    x[d] = h * static_cast<double>(p % spec.G);
    p /= spec.G;
  }
}

}  // namespace paratorus
