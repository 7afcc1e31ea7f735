#include "ranklab/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ranklab {

void Tensor3::set_symmetric(int i, int j, int k, double v) {
  std::array<int, 3> idx{i, j, k};
  std::sort(idx.begin(), idx.end());
  do {
    (*this)(idx[0], idx[1], idx[2]) = v;
  } while (std::next_permutation(idx.begin(), idx.end()));
}

Tensor3 Tensor3::rotated(const Matrix& V) const {
  // Three successive mode products, O(n^4) instead of O(n^6).
  Tensor3 a(n_), b(n_), c(n_);
  for (int p = 0; p < n_; ++p)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += V(i, p) * (*this)(i, j, k);
        a(p, j, k) = s;
      }
  for (int p = 0; p < n_; ++p)
    for (int q = 0; q < n_; ++q)
      for (int k = 0; k < n_; ++k) {
        double s = 0.0;
        for (int j = 0; j < n_; ++j) s += V(j, q) * a(p, j, k);
        b(p, q, k) = s;
      }
  for (int p = 0; p < n_; ++p)
    for (int q = 0; q < n_; ++q)
      for (int r = 0; r < n_; ++r) {
        double s = 0.0;
        for (int k = 0; k < n_; ++k) s += V(k, r) * b(p, q, k);
        c(p, q, r) = s;
      }
  return c;
}

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Tensor3::frobenius() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Tensor3::symmetry_defect() const {
  double d = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        const double v = (*this)(i, j, k);
        d = std::max({d, std::abs(v - (*this)(j, i, k)), std::abs(v - (*this)(i, k, j)),
                      std::abs(v - (*this)(k, j, i))});
      }
  return d;
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

void Tensor4::set_symmetric(int i, int j, int k, int l, double v) {
  std::array<int, 4> idx{i, j, k, l};
  std::sort(idx.begin(), idx.end());
  do {
    (*this)(idx[0], idx[1], idx[2], idx[3]) = v;
  } while (std::next_permutation(idx.begin(), idx.end()));
}

void Tensor4::set_pair_symmetric(int a, int b, int r, int s, double v) {
  (*this)(a, b, r, s) = v;
  (*this)(b, a, r, s) = v;
  (*this)(a, b, s, r) = v;
  (*this)(b, a, s, r) = v;
  (*this)(r, s, a, b) = v;
  (*this)(s, r, a, b) = v;
  (*this)(r, s, b, a) = v;
  (*this)(s, r, b, a) = v;
}

Tensor4 Tensor4::rotated(const Matrix& V) const {
  Tensor4 cur = *this;
  // Contract one index at a time; each pass moves index `mode` into the frame.
  for (int mode = 0; mode < 4; ++mode) {
    Tensor4 next(n_);
    for (int i0 = 0; i0 < n_; ++i0)
      for (int i1 = 0; i1 < n_; ++i1)
        for (int i2 = 0; i2 < n_; ++i2)
          for (int i3 = 0; i3 < n_; ++i3) {
            std::array<int, 4> out{i0, i1, i2, i3};
            double s = 0.0;
            for (int m = 0; m < n_; ++m) {
              std::array<int, 4> in = out;
              in[mode] = m;
              s += V(m, out[mode]) * cur(in[0], in[1], in[2], in[3]);
            }
            next(i0, i1, i2, i3) = s;
          }
    cur = std::move(next);
  }
  return cur;
}

double Tensor4::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Tensor4::frobenius() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Tensor4::symmetry_defect() const {
  double d = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          const double v = (*this)(i, j, k, l);
          d = std::max({d, std::abs(v - (*this)(j, i, k, l)), std::abs(v - (*this)(i, k, j, l)),
                        std::abs(v - (*this)(i, j, l, k)), std::abs(v - (*this)(l, j, k, i))});
        }
  return d;
}

double Tensor4::pair_symmetry_defect() const {
  double d = 0.0;
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      for (int r = 0; r < n_; ++r)
        for (int s = 0; s < n_; ++s) {
          const double v = (*this)(a, b, r, s);
          d = std::max({d, std::abs(v - (*this)(b, a, r, s)), std::abs(v - (*this)(a, b, s, r)),
                        std::abs(v - (*this)(r, s, a, b))});
        }
  return d;
}

Tensor4& Tensor4::operator+=(const Tensor4& other) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor4& Tensor4::operator-=(const Tensor4& other) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor4& Tensor4::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

}  // namespace ranklab
