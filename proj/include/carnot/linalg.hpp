#pragma once

#include "carnot/core.hpp"

#include <algorithm>
#include <functional>
#include <utility>
#include <vector>

// Small dense kernels written as plain loops so they instantiate for both
// double and Rational (Eigen's product kernels do not accept the latter).

namespace carnot {

// Direct-initializing a Rational matrix from an Eigen nullary expression trips
// a boost trait under C++20; copy-initialization is fine.
template <typename Scalar>
Matrix<Scalar> identity(Eigen::Index n) {
  Matrix<Scalar> m = Matrix<Scalar>::Identity(n, n);
  return m;
}

template <typename Scalar>
Matrix<Scalar> zeros(Eigen::Index rows, Eigen::Index cols) {
  Matrix<Scalar> m = Matrix<Scalar>::Zero(rows, cols);
  return m;
}

template <typename Scalar>
Vector<Scalar> mat_vec(const Matrix<Scalar>& a, const Vector<Scalar>& x) {
  if (a.cols() != x.size()) throw DimensionError("mat_vec: size mismatch");
  Vector<Scalar> out = Vector<Scalar>::Zero(a.rows());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (x(j) == Scalar(0)) continue;
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i) += a(i, j) * x(j);
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> mat_mul(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  if (a.cols() != b.rows()) throw DimensionError("mat_mul: size mismatch");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(a.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      if (b(k, j) == Scalar(0)) continue;
      for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) += a(i, k) * b(k, j);
    }
  return out;
}

/// Determinant by Gaussian elimination with largest-magnitude partial pivoting.
/// Exact for Rational.
template <typename Scalar>
Scalar determinant(Matrix<Scalar> a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw DimensionError("determinant: matrix is not square");
  Scalar det(1);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    Scalar best = abs_value(a(k, k));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      Scalar v = abs_value(a(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == Scalar(0)) return Scalar(0);
    if (piv != k) {
      a.row(k).swap(a.row(piv));
      det = -det;
    }
    det *= a(k, k);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (a(i, k) == Scalar(0)) continue;
      Scalar f = a(i, k) / a(k, k);
      for (Eigen::Index j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

/// Solves L x = b for a unit lower-triangular L.
template <typename Scalar>
Matrix<Scalar> solve_unit_lower(const Matrix<Scalar>& l, const Matrix<Scalar>& b) {
  const Eigen::Index n = l.rows();
  Matrix<Scalar> x = b;
  for (Eigen::Index c = 0; c < b.cols(); ++c)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < i; ++k)
        if (l(i, k) != Scalar(0)) x(i, c) -= l(i, k) * x(k, c);
  return x;
}

/// Rows `rows` of `a`, in the given order.
template <typename Scalar>
Matrix<Scalar> select_rows(const Matrix<Scalar>& a, const std::vector<int>& rows) {
  Matrix<Scalar> out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = a.row(rows[r]);
  return out;
}

/// Rank by Gaussian elimination. Entries with magnitude <= tol (relative to the
/// largest entry) count as zero; tol = 0 gives the exact rank over Rational.
template <typename Scalar>
int rank(Matrix<Scalar> a, double tol = 0.0) {
  const Eigen::Index rows = a.rows(), cols = a.cols();
  Scalar scale(0);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) scale = std::max(scale, abs_value(a(i, j)));
  if (scale == Scalar(0)) return 0;
  const Scalar cut = Scalar(tol) * scale;
  int r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index piv = r;
    Scalar best = abs_value(a(r, c));
    for (Eigen::Index i = r + 1; i < rows; ++i) {
      Scalar v = abs_value(a(i, c));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best <= cut) continue;
    if (piv != r) a.row(r).swap(a.row(piv));
    for (Eigen::Index i = r + 1; i < rows; ++i) {
      if (a(i, c) == Scalar(0)) continue;
      Scalar f = a(i, c) / a(r, c);
      for (Eigen::Index j = c; j < cols; ++j) a(i, j) -= f * a(r, j);
    }
    ++r;
  }
  return r;
}

std::uint64_t binomial(int n, int k);

/// Calls `f` on every strictly increasing k-subset of {0,..,n-1}, in
/// lexicographic order.
void for_each_combination(int n, int k, const std::function<void(const std::vector<int>&)>& f);

/// All strictly increasing k-subsets of {0,..,n-1}, lexicographic.
std::vector<std::vector<int>> combinations(int n, int k);

}  // namespace carnot
