#pragma once

#include "ranklab/symmat.hpp"

#include <cstdint>

namespace ranklab {

/// Counter-based generator: the stream for (seed, stream, counter) is fixed, so
/// trial i draws the same numbers no matter which thread runs it or in what order.
/// Built on splitmix64 with explicit uniform/normal conversions, so results do
/// not depend on the standard library's distribution implementations.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

  std::uint64_t next();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::uint64_t state_;
};

/// Stable 64-bit tag for a stream name, used to separate random streams.
std::uint64_t stream_id(const char* name);

/// Symmetric matrix with i.i.d. normal entries (upper triangle) times scale.
SymMatrix random_symmetric(int n, CounterRng& rng, double scale = 1.0);
/// Haar-ish orthogonal matrix: Q factor of a Gaussian matrix with sign fix.
Matrix random_orthogonal(int n, CounterRng& rng);
/// Q diag(mu) Q^T with mu uniform in [lo, hi].
SymMatrix random_spd(int n, CounterRng& rng, double lo, double hi);
Vector random_vector(int n, CounterRng& rng, double lo, double hi);

}  // namespace ranklab
