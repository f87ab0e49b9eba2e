#pragma once

/// \file
/// Small dense vectors, matrices and rank-3 arrays, plus an LU factorization
/// with partial pivoting that works for any field-like scalar (double or Jet).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "finslerlab/error.hpp"

namespace finslerlab {

inline double magnitude(double v) { return std::abs(v); }

using Vec = std::vector<double>;

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, const T& fill)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {}

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }

  T& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
  const T& operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i * cols_ + j)];
  }

  [[nodiscard]] const std::vector<T>& data() const { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Mat = Matrix<double>;

inline Mat zeros(int rows, int cols) { return Mat(rows, cols, 0.0); }

inline Mat identity(int n) {
  Mat m = zeros(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

/// Rank-3 array T(i, j, k) of doubles.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int d0, int d1, int d2, double fill = 0.0)
      : d0_(d0), d1_(d1), d2_(d2), data_(static_cast<std::size_t>(d0 * d1 * d2), fill) {}
  explicit Tensor3(int n) : Tensor3(n, n, n) {}

  [[nodiscard]] int dim(int axis) const { return axis == 0 ? d0_ : axis == 1 ? d1_ : d2_; }

  double& operator()(int i, int j, int k) {
    return data_[static_cast<std::size_t>((i * d1_ + j) * d2_ + k)];
  }
  double operator()(int i, int j, int k) const {
    return data_[static_cast<std::size_t>((i * d1_ + j) * d2_ + k)];
  }

  [[nodiscard]] const std::vector<double>& data() const { return data_; }

 private:
  int d0_ = 0;
  int d1_ = 0;
  int d2_ = 0;
  std::vector<double> data_;
};

// ---- norms ---------------------------------------------------------------

inline double norm_inf(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double norm_inf(const Mat& a) { return norm_inf(a.data()); }
inline double norm_inf(const Tensor3& t) { return norm_inf(t.data()); }
inline double norm_inf(double s) { return std::abs(s); }

inline double max_abs_diff(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionMismatchError("vector size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
inline double max_abs_diff(const Mat& a, const Mat& b) { return max_abs_diff(a.data(), b.data()); }
inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  return max_abs_diff(a.data(), b.data());
}

// ---- basic algebra -------------------------------------------------------

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionMismatchError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec operator+(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}
inline Vec operator-(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}
inline Vec operator*(double s, Vec a) {
  for (double& x : a) x *= s;
  return a;
}

inline Mat operator+(Mat a, const Mat& b) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) a(i, j) += b(i, j);
  return a;
}
inline Mat operator-(Mat a, const Mat& b) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) a(i, j) -= b(i, j);
  return a;
}
inline Mat operator*(double s, Mat a) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) a(i, j) *= s;
  return a;
}

inline Tensor3 operator+(Tensor3 a, const Tensor3& b) {
  for (int i = 0; i < a.dim(0); ++i)
    for (int j = 0; j < a.dim(1); ++j)
      for (int k = 0; k < a.dim(2); ++k) a(i, j, k) += b(i, j, k);
  return a;
}
inline Tensor3 operator-(Tensor3 a, const Tensor3& b) {
  for (int i = 0; i < a.dim(0); ++i)
    for (int j = 0; j < a.dim(1); ++j)
      for (int k = 0; k < a.dim(2); ++k) a(i, j, k) -= b(i, j, k);
  return a;
}
inline Tensor3 operator*(double s, Tensor3 a) {
  for (int i = 0; i < a.dim(0); ++i)
    for (int j = 0; j < a.dim(1); ++j)
      for (int k = 0; k < a.dim(2); ++k) a(i, j, k) *= s;
  return a;
}

inline Vec matvec(const Mat& a, const Vec& v) {
  if (a.cols() != static_cast<int>(v.size())) throw DimensionMismatchError("matvec: size mismatch");
  Vec out(static_cast<std::size_t>(a.rows()), 0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out[static_cast<std::size_t>(i)] += a(i, j) * v[static_cast<std::size_t>(j)];
  return out;
}

/// v^T A
inline Vec vecmat(const Vec& v, const Mat& a) {
  if (a.rows() != static_cast<int>(v.size())) throw DimensionMismatchError("vecmat: size mismatch");
  Vec out(static_cast<std::size_t>(a.cols()), 0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out[static_cast<std::size_t>(j)] += v[static_cast<std::size_t>(i)] * a(i, j);
  return out;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw DimensionMismatchError("matmul: size mismatch");
  Mat out = zeros(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k)
      for (int j = 0; j < b.cols(); ++j) out(i, j) += a(i, k) * b(k, j);
  return out;
}

inline Mat transpose(const Mat& a) {
  Mat out = zeros(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

inline Mat outer(const Vec& a, const Vec& b) {
  Mat out = zeros(static_cast<int>(a.size()), static_cast<int>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out(static_cast<int>(i), static_cast<int>(j)) = a[i] * b[j];
  return out;
}

/// u^T A v
inline double bilinear(const Vec& u, const Mat& a, const Vec& v) { return dot(u, matvec(a, v)); }

// ---- LU with partial pivoting ------------------------------------------

template <class T>
struct LuFactorization {
  Matrix<T> lu;
  std::vector<int> perm;
  int sign = 1;
};

/// Factorizes PA = LU. Pivots are chosen by `magnitude` of the scalar, which
/// for jets is the magnitude of the value part. Throws RankDeficiencyError
/// when a pivot magnitude falls below `pivot_tol`.
template <class T>
LuFactorization<T> lu_factor(Matrix<T> a, double pivot_tol = 1e-300) {
  const int n = a.rows();
  if (a.cols() != n) throw DimensionMismatchError("lu_factor: matrix is not square");
  LuFactorization<T> f{std::move(a), std::vector<int>(static_cast<std::size_t>(n)), 1};
  for (int i = 0; i < n; ++i) f.perm[static_cast<std::size_t>(i)] = i;
  auto& m = f.lu;
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = magnitude(m(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = magnitude(m(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (!(best > pivot_tol)) throw RankDeficiencyError("lu_factor: singular matrix");
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      std::swap(f.perm[static_cast<std::size_t>(k)], f.perm[static_cast<std::size_t>(p)]);
      f.sign = -f.sign;
    }
    for (int i = k + 1; i < n; ++i) {
      m(i, k) = m(i, k) / m(k, k);
      for (int j = k + 1; j < n; ++j) m(i, j) -= m(i, k) * m(k, j);
    }
  }
  return f;
}

template <class T>
std::vector<T> lu_solve(const LuFactorization<T>& f, const std::vector<T>& b) {
  const int n = f.lu.rows();
  if (static_cast<int>(b.size()) != n) throw DimensionMismatchError("lu_solve: size mismatch");
  std::vector<T> x;
  x.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x.push_back(b[static_cast<std::size_t>(f.perm[static_cast<std::size_t>(i)])]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) x[static_cast<std::size_t>(i)] -= f.lu(i, j) * x[static_cast<std::size_t>(j)];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[static_cast<std::size_t>(i)] -= f.lu(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] / f.lu(i, i);
  }
  return x;
}

template <class T>
Matrix<T> inverse(const Matrix<T>& a) {
  const int n = a.rows();
  const auto f = lu_factor(a);
  const T zero = a(0, 0) * 0.0;
  Matrix<T> inv(n, n, zero);
  for (int j = 0; j < n; ++j) {
    std::vector<T> e(static_cast<std::size_t>(n), zero);
    e[static_cast<std::size_t>(j)] += 1.0;
    const auto col = lu_solve(f, e);
    for (int i = 0; i < n; ++i) inv(i, j) = col[static_cast<std::size_t>(i)];
  }
  return inv;
}

template <class T>
T determinant(const Matrix<T>& a) {
  LuFactorization<T> f;
  try {
    f = lu_factor(a, 0.0);
  } catch (const RankDeficiencyError&) {
    return a(0, 0) * 0.0;
  }
  T d = f.lu(0, 0) * static_cast<double>(f.sign);
  for (int i = 1; i < a.rows(); ++i) d = d * f.lu(i, i);
  return d;
}

inline Vec solve(const Mat& a, const Vec& b) { return lu_solve(lu_factor(a), b); }

}  // namespace finslerlab
