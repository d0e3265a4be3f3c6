#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace paratorus {

using cplx = std::complex<double>;

// Error raised for malformed inputs (shape mismatch, bad grid, ...).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Truncation and quadrature layout on T^n.  Coefficients live on the
// lattice [-M, M]^n, products are formed on a G^n grid with G >= 4M.
struct GridSpec {
  int n = 1;
  int M = 8;
  int G = 32;
  int J = 0;  // largest Littlewood-Paley index in use

  static GridSpec make(int n, int M, int G = 0);

  int side() const { return 2 * M + 1; }
  std::size_t lattice_size() const;
  std::size_t grid_size() const;

  bool operator==(const GridSpec& o) const {
    return n == o.n && M == o.M && G == o.G;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

enum class Parity { even, odd, none };

Parity parity_product(Parity a, Parity b);
Parity parity_sum(Parity a, Parity b);
Parity parity_flip(Parity a);
const char* parity_name(Parity p);
Parity parity_from_name(const std::string& s);

// Value dimensions of a field: scalar 1x1, column vector Nx1, matrix NxN.
struct Shape {
  int rows = 1;
  int cols = 1;
  int comps() const { return rows * cols; }
  bool scalar() const { return rows == 1 && cols == 1; }
  bool square() const { return rows == cols; }
  bool operator==(const Shape& o) const { return rows == o.rows && cols == o.cols; }
  bool operator!=(const Shape& o) const { return !(*this == o); }
  static Shape scalar_shape() { return {1, 1}; }
  static Shape vec(int d) { return {d, 1}; }
  static Shape mat(int r, int c) { return {r, c}; }
};

// Shape of the pointwise product a*b (matrix product, scalars broadcast).
Shape product_shape(Shape a, Shape b);

// Precomputed lattice data shared by all fields on one GridSpec.
struct LatticeTables {
  GridSpec spec;
  std::vector<int> xi;              // L x n integer frequencies
  std::vector<double> norm;         // Euclidean |xi|
  std::vector<std::size_t> fft_at;  // position of xi inside the G^n FFT array
  std::vector<std::vector<double>> block;  // phi_j(xi), j = 0..J (j = 0 is the mean block)
  std::vector<std::vector<double>> low;    // S_j weights psi(2^-j xi), j = 0..J
  std::vector<std::vector<std::size_t>> block_support;  // indices where block[j] != 0

  const int* point(std::size_t idx) const { return xi.data() + idx * spec.n; }
  std::size_t index_of(const int* k) const;  // caller guarantees |k|_inf <= M
  bool in_lattice(const int* k) const;
  std::size_t negate(std::size_t idx) const { return norm.size() - 1 - idx; }
  // S_j for any integer j (j <= 0 gives the mean block).
  const std::vector<double>& low_weights(int j) const;
};

const LatticeTables& tables(const GridSpec& spec);

// Truncated Fourier representation u = sum_xi c(xi) e^{i xi.x}, stored
// component-major: comps() blocks of lattice_size() coefficients.
class TorusField {
 public:
  GridSpec spec;
  Shape shape;
  Parity parity = Parity::none;
  std::vector<cplx> c;

  TorusField() = default;
  TorusField(const GridSpec& s, Shape sh, Parity p = Parity::none);

  static TorusField constant(const GridSpec& s, Shape sh, const std::vector<cplx>& values);
  static TorusField identity(const GridSpec& s, int N);

  std::size_t L() const { return c.size() / static_cast<std::size_t>(shape.comps()); }
  int comps() const { return shape.comps(); }
  cplx* comp(int k) { return c.data() + static_cast<std::size_t>(k) * L(); }
  const cplx* comp(int k) const { return c.data() + static_cast<std::size_t>(k) * L(); }
  cplx& at(int k, std::size_t idx) { return c[static_cast<std::size_t>(k) * L() + idx]; }
  const cplx& at(int k, std::size_t idx) const { return c[static_cast<std::size_t>(k) * L() + idx]; }
  std::size_t zero_index() const { return L() / 2; }

  // Extract one component as a scalar field.
  TorusField component(int k) const;
  void set_component(int k, const TorusField& s);

  TorusField& operator+=(const TorusField& o);
  TorusField& operator-=(const TorusField& o);
  TorusField& operator*=(cplx s);
  TorusField& add_identity(cplx s = 1.0);
};

TorusField operator+(TorusField a, const TorusField& b);
TorusField operator-(TorusField a, const TorusField& b);
TorusField operator*(cplx s, TorusField a);
TorusField operator-(TorusField a);

void require_same_spec(const TorusField& a, const TorusField& b, const char* where);

}  // namespace paratorus
