#pragma once

// Small dense vectors and square matrices (n <= 8) with the k-trace algebra
// needed by the k-Hessian operator.

#include <algorithm>
#include <cmath>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "ngt/error.hpp"

namespace ngt {

inline constexpr int kMaxDim = 8;

inline void check_dim(int n) {
  if (n < 1 || n > kMaxDim)
    throw DimensionError("dimension " + std::to_string(n) + " outside [1, " + std::to_string(kMaxDim) + "]");
}

class Vec {
 public:
  Vec() = default;
  explicit Vec(int n) : v_(static_cast<std::size_t>(n), 0.0) { check_dim(n); }
  Vec(std::initializer_list<double> xs) : v_(xs) { check_dim(dim()); }
  explicit Vec(std::span<const double> xs) : v_(xs.begin(), xs.end()) { check_dim(dim()); }

  int dim() const noexcept { return static_cast<int>(v_.size()); }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
  std::span<const double> values() const noexcept { return v_; }

  Vec& operator*=(double s) {
    for (auto& x : v_) x *= s;
    return *this;
  }

 private:
  std::vector<double> v_;
};

inline Vec operator*(double s, Vec v) { return v *= s; }

/// Square n x n matrix, row-major. Values built from symmetric data stay
/// symmetric; the entrywise finite differences of the operator catalog are the
/// one place a general (non-symmetric) square is formed.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int n) : n_(n), a_(static_cast<std::size_t>(n * n), 0.0) { check_dim(n); }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    n_ = static_cast<int>(rows.size());
    check_dim(n_);
    a_.reserve(static_cast<std::size_t>(n_ * n_));
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != n_) throw DimensionError("Matrix: ragged initializer");
      a_.insert(a_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diag(std::initializer_list<double> d) {
    Matrix m(static_cast<int>(d.size()));
    int i = 0;
    for (double x : d) {
      m(i, i) = x;
      ++i;
    }
    return m;
  }

  int dim() const noexcept { return n_; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * n_ + j)]; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * n_ + j)]; }

  double trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::fabs(x));
    return m;
  }

  bool is_symmetric(double tol = 0.0) const {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (std::fabs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
  }

  Matrix& operator+=(const Matrix& o) {
    same_dim(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    same_dim(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

 private:
  int n_ = 0;
  std::vector<double> a_;

  void same_dim(const Matrix& o) const {
    if (o.n_ != n_) throw DimensionError("matrix dimension mismatch");
  }
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(double s, Matrix a) { return a *= s; }

inline void require_same_dim(int a, int b, const char* what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
}

inline double dot(const Vec& p, const Vec& q) {
  require_same_dim(p.dim(), q.dim(), "dot");
  double s = 0.0;
  for (int i = 0; i < p.dim(); ++i) s += p[i] * q[i];
  return s;
}

inline double norm_sq(const Vec& p) { return dot(p, p); }
inline double norm(const Vec& p) { return std::sqrt(norm_sq(p)); }

inline Vec operator*(const Matrix& X, const Vec& p) {
  require_same_dim(X.dim(), p.dim(), "matrix-vector product");
  Vec r(p.dim());
  for (int i = 0; i < X.dim(); ++i) {
    double s = 0.0;
    for (int j = 0; j < X.dim(); ++j) s += X(i, j) * p[j];
    r[i] = s;
  }
  return r;
}

/// <X p, p>
inline double quad_form(const Matrix& X, const Vec& p) { return dot(X * p, p); }

/// p (x) q with entry (i, j) = q_i p_j.
inline Matrix tensor(const Vec& p, const Vec& q) {
  require_same_dim(p.dim(), q.dim(), "tensor");
  Matrix m(p.dim());
  for (int i = 0; i < p.dim(); ++i)
    for (int j = 0; j < p.dim(); ++j) m(i, j) = q[i] * p[j];
  return m;
}

namespace detail {

// Determinant of the submatrix of X picked by row/col index lists (same
// length), LU with partial pivoting on a local copy.
inline double sub_det(const Matrix& X, std::span<const int> rows, std::span<const int> cols) {
  const int k = static_cast<int>(rows.size());
  if (k == 0) return 1.0;
  double a[kMaxDim][kMaxDim];
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a[i][j] = X(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
  double det = 1.0;
  for (int c = 0; c < k; ++c) {
    int piv = c;
    for (int r = c + 1; r < k; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      for (int j = 0; j < k; ++j) std::swap(a[piv][j], a[c][j]);
      det = -det;
    }
    det *= a[c][c];
    for (int r = c + 1; r < k; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int j = c + 1; j < k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return det;
}

inline int subset_members(unsigned mask, int n, int* out) {
  int m = 0;
  for (int i = 0; i < n; ++i)
    if (mask & (1u << i)) out[m++] = i;
  return m;
}

inline void check_k(int k, int n) {
  if (k < 1 || k > n)
    throw RangeError("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
}

}  // namespace detail

inline double determinant(const Matrix& X) {
  int idx[kMaxDim];
  for (int i = 0; i < X.dim(); ++i) idx[i] = i;
  std::span<const int> s(idx, static_cast<std::size_t>(X.dim()));
  return detail::sub_det(X, s, s);
}

/// Sum of all k x k principal minors; k = 1 is the trace, k = n the determinant.
inline double ktrace(const Matrix& X, int k) {
  const int n = X.dim();
  detail::check_k(k, n);
  double sum = 0.0;
  int idx[kMaxDim];
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    const int m = detail::subset_members(mask, n, idx);
    std::span<const int> s(idx, static_cast<std::size_t>(m));
    sum += detail::sub_det(X, s, s);
  }
  return sum;
}

/// Matrix of partials d tr_k(X) / d X_ij, every entry perturbed on its own
/// (no symmetrization). Each principal minor contributes its cofactors.
inline Matrix ktrace_gradient(const Matrix& X, int k) {
  const int n = X.dim();
  detail::check_k(k, n);
  Matrix S(n);
  int idx[kMaxDim];
  int rows[kMaxDim];
  int cols[kMaxDim];
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    const int m = detail::subset_members(mask, n, idx);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        int r = 0;
        int c = 0;
        for (int t = 0; t < m; ++t) {
          if (t != a) rows[r++] = idx[t];
          if (t != b) cols[c++] = idx[t];
        }
        const double minor = detail::sub_det(X, std::span<const int>(rows, static_cast<std::size_t>(r)),
                                             std::span<const int>(cols, static_cast<std::size_t>(c)));
        S(idx[a], idx[b]) += ((a + b) % 2 == 0 ? 1.0 : -1.0) * minor;
      }
    }
  }
  return S;
}

/// |tr_k(X + p(x)p) - tr_k(X) - <S p, p>| + |tr_k(X - p(x)p) - tr_k(X) + <S p, p>|
inline double rank_one_update_check(const Matrix& X, const Vec& p, int k) {
  require_same_dim(X.dim(), p.dim(), "rank_one_update_check");
  const Matrix pp = tensor(p, p);
  const double base = ktrace(X, k);
  const double shift = quad_form(ktrace_gradient(X, k), p);
  return std::fabs(ktrace(X + pp, k) - base - shift) + std::fabs(ktrace(X - pp, k) - base + shift);
}

}  // namespace ngt
