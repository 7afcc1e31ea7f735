#pragma once

#include "ranklab/symmat.hpp"

namespace ranklab {

/// Value and derivatives up to order four of a scalar field at a point.
struct Jet4 {
  Vector x;
  double u = 0.0;
  Vector du;
  SymMatrix d2u;
  Tensor3 d3u;
  Tensor4 d4u;

  int dim() const { return static_cast<int>(x.size()); }
  bool all_finite() const;

  static Jet4 zero(const Vector& x);
};

/// Componentwise maxima of |a - b| per derivative order, m = 0..4.
struct JetDeviation {
  double order[5] = {0, 0, 0, 0, 0};
};
JetDeviation jet_deviation(const Jet4& a, const Jet4& b);

}  // namespace ranklab
