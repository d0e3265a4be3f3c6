#include "paratorus/grid.hpp"
#include "paratorus/lp.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace paratorus {

GridSpec GridSpec::make(int n, int M, int G) {
  if (n < 1) throw ShapeError("grid: n must be >= 1");
  if (M < 1 || (M & (M - 1)) != 0) throw ShapeError("grid: M must be a power of two");
  if (G == 0) G = 4 * M;
  if (G < 4 * M) throw ShapeError("grid: G must be >= 4M");
  GridSpec s;
  s.n = n;
  s.M = M;
  s.G = G;
  // Smallest J with psi(2^-J xi) = 1 on the whole truncated lattice, i.e.
  // 2^(J-1) >= sqrt(n) * M, so that the blocks 0..J partition exactly.
  const double rmax = std::sqrt(static_cast<double>(n)) * M;
  int J = 1;
  while (std::ldexp(1.0, J - 1) < rmax) ++J;
  s.J = J;
  return s;
}

std::size_t GridSpec::lattice_size() const {
  std::size_t L = 1;
  for (int d = 0; d < n; ++d) L *= static_cast<std::size_t>(side());
  return L;
}

std::size_t GridSpec::grid_size() const {
  std::size_t P = 1;
  for (int d = 0; d < n; ++d) P *= static_cast<std::size_t>(G);
  return P;
}

Parity parity_product(Parity a, Parity b) {
  if (a == Parity::none || b == Parity::none) return Parity::none;
  return a == b ? Parity::even : Parity::odd;
}

Parity parity_sum(Parity a, Parity b) { return a == b ? a : Parity::none; }

Parity parity_flip(Parity a) {
  if (a == Parity::even) return Parity::odd;
  if (a == Parity::odd) return Parity::even;
  return Parity::none;
}

const char* parity_name(Parity p) {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    default: return "none";
  }
}

Parity parity_from_name(const std::string& s) {
  if (s == "even") return Parity::even;
  if (s == "odd") return Parity::odd;
  if (s == "none") return Parity::none;
  throw ShapeError("unknown parity '" + s + "'");
}

Shape product_shape(Shape a, Shape b) {
  if (a.scalar()) return b;
  if (b.scalar()) return a;
  if (a.cols != b.rows)
    throw ShapeError("shape mismatch: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                     " times " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  return {a.rows, b.cols};
}

std::size_t LatticeTables::index_of(const int* k) const {
  const int S = spec.side();
  std::size_t idx = 0;
  for (int d = 0; d < spec.n; ++d) idx = idx * S + static_cast<std::size_t>(k[d] + spec.M);
  return idx;
}

bool LatticeTables::in_lattice(const int* k) const {
  for (int d = 0; d < spec.n; ++d)
    if (k[d] < -spec.M || k[d] > spec.M) return false;
  return true;
}

const std::vector<double>& LatticeTables::low_weights(int j) const {
  if (j <= 0) return low[0];
  if (j >= static_cast<int>(low.size())) return low.back();
  return low[j];
}

namespace {

std::unique_ptr<LatticeTables> build_tables(const GridSpec& spec) {
  auto t = std::make_unique<LatticeTables>();
  t->spec = spec;
  const std::size_t L = spec.lattice_size();
  const int n = spec.n, S = spec.side();
  t->xi.resize(L * n);
  t->norm.resize(L);
  t->fft_at.resize(L);
  for (std::size_t idx = 0; idx < L; ++idx) {
    std::size_t r = idx;
    double s2 = 0.0;
    std::size_t pos = 0;
    for (int d = n - 1; d >= 0; --d) {
      const int k = static_cast<int>(r % S) - spec.M;
      r /= S;
      t->xi[idx * n + d] = k;
      s2 += static_cast<double>(k) * k;
    }
    for (int d = 0; d < n; ++d) {
      const int k = t->xi[idx * n + d];
      pos = pos * spec.G + static_cast<std::size_t>((k % spec.G + spec.G) % spec.G);
    }
    t->norm[idx] = std::sqrt(s2);
    t->fft_at[idx] = pos;
  }
  t->block.assign(spec.J + 1, std::vector<double>(L, 0.0));
  t->low.assign(spec.J + 1, std::vector<double>(L, 0.0));
  t->block_support.resize(spec.J + 1);
  for (std::size_t idx = 0; idx < L; ++idx) {
    const double r = t->norm[idx];
    for (int j = 0; j <= spec.J; ++j) {
      t->low[j][idx] = lp::low_pass(r, j);
      t->block[j][idx] = lp::block(r, j);
      if (t->block[j][idx] != 0.0) t->block_support[j].push_back(idx);
    }
  }
  return t;
}

}  // namespace

const LatticeTables& tables(const GridSpec& spec) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<LatticeTables>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(spec.n, spec.M, spec.G);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_tables(spec)).first;
  return *it->second;
}

TorusField::TorusField(const GridSpec& s, Shape sh, Parity p)
    : spec(s), shape(sh), parity(p), c(s.lattice_size() * static_cast<std::size_t>(sh.comps())) {}

TorusField TorusField::constant(const GridSpec& s, Shape sh, const std::vector<cplx>& values) {
  if (static_cast<int>(values.size()) != sh.comps()) throw ShapeError("constant: wrong value count");
  TorusField f(s, sh, Parity::even);
  for (int k = 0; k < sh.comps(); ++k) f.at(k, f.zero_index()) = values[k];
  return f;
}

TorusField TorusField::identity(const GridSpec& s, int N) {
  TorusField f(s, Shape::mat(N, N), Parity::even);
  f.add_identity(1.0);
  return f;
}

TorusField TorusField::component(int k) const {
  TorusField out(spec, Shape::scalar_shape(), parity);
  std::copy(comp(k), comp(k) + L(), out.c.begin());
  return out;
}

void TorusField::set_component(int k, const TorusField& s) {
  if (s.L() != L() || !s.shape.scalar()) throw ShapeError("set_component: expected scalar field");
  std::copy(s.c.begin(), s.c.end(), comp(k));
}

void require_same_spec(const TorusField& a, const TorusField& b, const char* where) {
  if (a.spec != b.spec) throw ShapeError(std::string(where) + ": grid specs differ");
}

TorusField& TorusField::operator+=(const TorusField& o) {
  require_same_spec(*this, o, "add");
  if (shape != o.shape) throw ShapeError("add: shapes differ");
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
  parity = parity_sum(parity, o.parity);
  return *this;
}

TorusField& TorusField::operator-=(const TorusField& o) {
  require_same_spec(*this, o, "subtract");
  if (shape != o.shape) throw ShapeError("subtract: shapes differ");
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
  parity = parity_sum(parity, o.parity);
  return *this;
}

TorusField& TorusField::operator*=(cplx s) {
  for (auto& v : c) v *= s;
  return *this;
}

TorusField& TorusField::add_identity(cplx s) {
  if (!shape.square()) throw ShapeError("add_identity: field is not square");
  const std::size_t z = zero_index();
  for (int r = 0; r < shape.rows; ++r) at(r * shape.cols + r, z) += s;
  if (parity == Parity::odd) parity = Parity::none;
  return *this;
}

TorusField operator+(TorusField a, const TorusField& b) { return a += b; }
TorusField operator-(TorusField a, const TorusField& b) { return a -= b; }
TorusField operator*(cplx s, TorusField a) { return a *= s; }
TorusField operator-(TorusField a) { return a *= -1.0; }

}  // namespace paratorus
