#pragma once

#include "paratorus/grid.hpp"

#include <cstdlib>
#include <new>
#include <vector>

namespace paratorus {

// Allocator returning memory aligned for SIMD FFT kernels.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) {
    void* p = std::aligned_alloc(64, ((n * sizeof(T) + 63) / 64) * 64);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) { std::free(p); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
  template <class U>
  bool operator!=(const AlignedAllocator<U>&) const { return false; }
};

using cvec = std::vector<cplx, AlignedAllocator<cplx>>;

// In-place complex DFTs of size G^n (unnormalized, FFTW sign convention).
// Plans are created once per (n, G) and shared; execution is thread safe.
class FftEngine {
 public:
  static const FftEngine& get(int n, int G);
  void forward(cplx* data) const;   // sum_x u(x) e^{-i k x}
  void backward(cplx* data) const;  // sum_k c(k) e^{+i k x}
  ~FftEngine();

 private:
  FftEngine(int n, int G);
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

// Samples of a field on the G^n grid, component-major.
struct GridValues {
  GridSpec spec;
  Shape shape;
  cvec v;

  GridValues() = default;
  GridValues(const GridSpec& s, Shape sh) : spec(s), shape(sh), v(s.grid_size() * sh.comps()) {}
  std::size_t P() const { return spec.grid_size(); }
  cplx* comp(int k) { return v.data() + static_cast<std::size_t>(k) * P(); }
  const cplx* comp(int k) const { return v.data() + static_cast<std::size_t>(k) * P(); }
};

GridValues synthesize(const TorusField& u);
TorusField analyze(const GridValues& g, Parity parity = Parity::none);

// Single-component helpers on raw buffers of length G^n.
void synthesize_component(const GridSpec& spec, const cplx* coeffs, cplx* grid);
void analyze_component(const GridSpec& spec, cplx* grid, cplx* coeffs);  // grid is clobbered

// Grid coordinate of point p along each axis: x_d = 2 pi i_d / G.
void grid_point(const GridSpec& spec, std::size_t p, double* x);

}  // namespace paratorus
