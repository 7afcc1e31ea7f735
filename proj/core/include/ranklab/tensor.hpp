#pragma once

#include <Eigen/Dense>

#include <vector>

namespace ranklab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense n x n x n array. Derivative tensors D^3u are stored fully symmetric;
/// mixed operator derivatives such as F^{ab,x_r} are symmetric in (a,b) only.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n, 0.0) {}

  int dim() const { return n_; }

  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

  /// Writes v into every index permutation of (i,j,k).
  void set_symmetric(int i, int j, int k, double v);

  /// Returns T'_{abc} = V_{ia} V_{jb} V_{kc} T_{ijk}; with V an eigenframe this
  /// expresses the tensor in eigenvector coordinates.
  Tensor3 rotated(const Matrix& V) const;

  double max_abs() const;
  double frobenius() const;
  /// Largest |T_{ijk} - T_{perm}| over all permutations.
  double symmetry_defect() const;

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double s);

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }

  int n_ = 0;
  std::vector<double> data_;
};

class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  int dim() const { return n_; }

  double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }

  void set_symmetric(int i, int j, int k, int l, double v);
  /// Writes v into the 8 slots related by a<->b, r<->s and (ab)<->(rs).
  void set_pair_symmetric(int a, int b, int r, int s, double v);

  Tensor4 rotated(const Matrix& V) const;

  double max_abs() const;
  double frobenius() const;
  double symmetry_defect() const;
  /// Largest deviation from the pair symmetries of F^{ab,rs}.
  double pair_symmetry_defect() const;

  Tensor4& operator+=(const Tensor4& other);
  Tensor4& operator-=(const Tensor4& other);
  Tensor4& operator*=(double s);

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l;
  }

  int n_ = 0;
  std::vector<double> data_;
};

}  // namespace ranklab
