#include "ranklab/random.hpp"

#include <cmath>
#include <numbers>

namespace ranklab {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ stream;
  h = splitmix64(s);
  s = h ^ counter;
  state_ = splitmix64(s);
}

std::uint64_t CounterRng::next() { return splitmix64(state_); }

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  // Box-Muller; the second variate is discarded to keep the generator stateless
  // beyond its counter.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t stream_id(const char* name) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* p = name; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ULL;
  }
  return h;
}

SymMatrix random_symmetric(int n, CounterRng& rng, double scale) {
  SymMatrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a.set(i, j, scale * rng.normal());
  return a;
}

Matrix random_orthogonal(int n, CounterRng& rng) {
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

SymMatrix random_spd(int n, CounterRng& rng, double lo, double hi) {
  const Matrix q = random_orthogonal(n, rng);
  Vector mu(n);
  for (int i = 0; i < n; ++i) mu(i) = rng.uniform(lo, hi);
  return SymMatrix::symmetrized(q * mu.asDiagonal() * q.transpose());
}

Vector random_vector(int n, CounterRng& rng, double lo, double hi) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

}  // namespace ranklab
