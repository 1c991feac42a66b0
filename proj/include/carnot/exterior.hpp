#pragma once

#include "carnot/algebra.hpp"
#include "carnot/linalg.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace carnot {

/// Strictly increasing 0-based basis indices (alpha_1 < ... < alpha_p).
using MultiIndex = std::vector<int>;

/// d(alpha) = sum of the layer degrees of the entries.
int multi_index_degree(const StratifiedAlgebra& alg, const MultiIndex& alpha);

/// Element of Lambda_p over an n-dimensional space, stored sparsely on the
/// basis X_alpha. Zero coefficients are never stored.
template <typename Scalar>
class Multivector {
 public:
  Multivector() = default;
  Multivector(int n, int p) : n_(n), p_(p) {
    if (p < 0 || p > n) throw DomainError("multivector grade out of range");
  }

  int dim() const { return n_; }
  int grade() const { return p_; }
  const std::map<MultiIndex, Scalar>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }

  Scalar coeff(const MultiIndex& a) const {
    auto it = c_.find(a);
    return it == c_.end() ? Scalar(0) : it->second;
  }

  void set(const MultiIndex& a, const Scalar& v) {
    check(a);
    if (v == Scalar(0)) {
      c_.erase(a);
    } else {
      c_[a] = v;
    }
  }

  void add(const MultiIndex& a, const Scalar& v) { set(a, coeff(a) + v); }

  Multivector operator+(const Multivector& o) const {
    same_shape(o);
    Multivector out = *this;
    for (const auto& [a, v] : o.c_) out.add(a, v);
    return out;
  }
  Multivector operator-(const Multivector& o) const { return *this + o.scaled(Scalar(-1)); }
  Multivector scaled(const Scalar& s) const {
    Multivector out(n_, p_);
    if (s == Scalar(0)) return out;
    for (const auto& [a, v] : c_) out.c_[a] = v * s;
    return out;
  }

  Scalar squared_norm() const {
    Scalar acc(0);
    for (const auto& [a, v] : c_) acc += v * v;
    return acc;
  }
  double norm() const { return std::sqrt(to_double(squared_norm())); }

  Scalar dot(const Multivector& o) const {
    same_shape(o);
    Scalar acc(0);
    for (const auto& [a, v] : c_) {
      auto it = o.c_.find(a);
      if (it != o.c_.end()) acc += v * it->second;
    }
    return acc;
  }

  Multivector<double> to_double_mv() const {
    Multivector<double> out(n_, p_);
    for (const auto& [a, v] : c_) out.set(a, carnot::to_double(v));
    return out;
  }

  bool operator==(const Multivector& o) const { return n_ == o.n_ && p_ == o.p_ && c_ == o.c_; }

 private:
  void check(const MultiIndex& a) const {
    if (static_cast<int>(a.size()) != p_) throw DimensionError("multi-index has the wrong length");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] < 0 || a[i] >= n_) throw DimensionError("multi-index entry out of range");
      if (i > 0 && a[i] <= a[i - 1]) throw DomainError("multi-index must be strictly increasing");
    }
  }
  void same_shape(const Multivector& o) const {
    if (n_ != o.n_ || p_ != o.p_) throw DimensionError("multivectors of different shape");
  }

  int n_ = 0;
  int p_ = 0;
  std::map<MultiIndex, Scalar> c_;
};

/// c_alpha = det of the p x p minor of the n x p matrix C on rows alpha.
template <typename Scalar>
Multivector<Scalar> wedge(const Matrix<Scalar>& c) {
  const int n = static_cast<int>(c.rows()), p = static_cast<int>(c.cols());
  Multivector<Scalar> out(n, p);
  if (p == 0) {
    out.set({}, Scalar(1));
    return out;
  }
  for_each_combination(n, p, [&](const std::vector<int>& rows) {
    Matrix<Scalar> minor = select_rows(c, rows);
    out.set(rows, p == 1 ? minor(0, 0) : determinant(minor));
  });
  return out;
}

template <typename Scalar>
Multivector<Scalar> wedge(const std::vector<Vector<Scalar>>& vs) {
  if (vs.empty()) throw DomainError("wedge of no vectors");
  Matrix<Scalar> c(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) {
    if (vs[j].size() != c.rows()) throw DimensionError("wedge: vectors of different lengths");
    c.col(static_cast<Eigen::Index>(j)) = vs[j];
  }
  return wedge(c);
}

/// pi_D: keeps the coefficients with d(alpha) = D. When D lies outside
/// [p, D(p)] the result is zero and *in_range is set to false.
template <typename Scalar>
Multivector<Scalar> project_degree(const StratifiedAlgebra& alg, const Multivector<Scalar>& v, int d,
                                   bool* in_range = nullptr);

/// Homogeneous components keyed by degree; only nonzero components appear.
template <typename Scalar>
std::map<int, Multivector<Scalar>> homogeneous_components(const StratifiedAlgebra& alg, const Multivector<Scalar>& v) {
  std::map<int, Multivector<Scalar>> out;
  for (const auto& [a, c] : v.coeffs()) {
    auto [it, inserted] = out.try_emplace(multi_index_degree(alg, a), v.dim(), v.grade());
    it->second.set(a, c);
  }
  return out;
}

/// Largest d(alpha) with |c_alpha| > rel_tol * max |c|; exact zero test when
/// rel_tol = 0. Throws SingularPointError on the zero multivector.
template <typename Scalar>
int multivector_degree(const StratifiedAlgebra& alg, const Multivector<Scalar>& v, double rel_tol = 0.0) {
  if (v.is_zero()) throw SingularPointError("degree of the zero multivector");
  Scalar scale(0);
  for (const auto& [a, c] : v.coeffs()) scale = std::max(scale, abs_value(c));
  const Scalar cut = Scalar(rel_tol) * scale;
  int best = -1;
  for (const auto& [a, c] : v.coeffs())
    if (abs_value(c) > cut) best = std::max(best, multi_index_degree(alg, a));
  return best;
}

/// (Lambda_p delta_r)(X_alpha) = r^{d(alpha)} X_alpha.
template <typename Scalar>
Multivector<Scalar> dilate_multivector(const StratifiedAlgebra& alg, const Multivector<Scalar>& v, const Scalar& r) {
  if (!(r > Scalar(0))) throw DomainError("dilate_multivector: r must be positive");
  Multivector<Scalar> out(v.dim(), v.grade());
  for (const auto& [a, c] : v.coeffs()) out.set(a, c * ipow(r, multi_index_degree(alg, a)));
  return out;
}

/// (Lambda_p M) v, with (Lambda_p M) X_beta = sum_alpha det M[alpha, beta] X_alpha.
template <typename Scalar>
Multivector<Scalar> exterior_power_apply(const Matrix<Scalar>& m, const Multivector<Scalar>& v) {
  if (m.cols() != v.dim()) throw DimensionError("exterior_power_apply: size mismatch");
  const int n = static_cast<int>(m.rows()), p = v.grade();
  Multivector<Scalar> out(n, p);
  if (v.is_zero()) return out;
  for_each_combination(n, p, [&](const std::vector<int>& rows) {
    Scalar acc(0);
    for (const auto& [beta, c] : v.coeffs()) {
      Matrix<Scalar> minor(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) minor(i, j) = m(rows[i], beta[j]);
      acc += c * (p == 1 ? minor(0, 0) : determinant(minor));
    }
    out.set(rows, acc);
  });
  return out;
}

/// Lambda_p of dl_x applied to a multivector at the origin.
template <typename Scalar>
Multivector<Scalar> left_translate_multivector(const StratifiedAlgebra& alg, const Vector<Scalar>& x,
                                               const Multivector<Scalar>& v) {
  if (v.dim() != alg.dim()) throw DimensionError("multivector dimension does not match the algebra");
  return exterior_power_apply(frame_matrix(alg, x), v);
}

/// Inverse of left_translate_multivector: a multivector at x expressed at the origin.
template <typename Scalar>
Multivector<Scalar> pull_back_multivector(const StratifiedAlgebra& alg, const Vector<Scalar>& x,
                                          const Multivector<Scalar>& v) {
  if (v.dim() != alg.dim()) throw DimensionError("multivector dimension does not match the algebra");
  const int n = alg.dim();
  Matrix<Scalar> inv = solve_unit_lower(frame_matrix(alg, x), identity<Scalar>(n));
  return exterior_power_apply(inv, v);
}

/// Plane of a simple p-vector. The interior products of v with all
/// (p-1)-covectors span a space of dimension p exactly when v is simple.
struct SimplePlane {
  bool simple = false;
  int contraction_rank = 0;
  /// Orthonormal basis of the plane (n x p) when simple.
  MatrixXd basis;
};

SimplePlane simple_plane(const Multivector<double>& v, double rel_tol = 1e-9);

/// l(p), r_p, D(p) and the transversal subdegrees sigma_1 <= ... <= sigma_p.
struct DegreeProfile {
  int p = 0;
  int ell = 0;
  int r_p = 0;
  int max_degree = 0;
  std::vector<int> sigma;
};

DegreeProfile degree_profile(const StratifiedAlgebra& alg, int p);

/// lambda_r(xi) = (r^{sigma_1} xi_1, ..., r^{sigma_p} xi_p).
VectorXd subdilation(const DegreeProfile& profile, double r, const VectorXd& xi);

template <typename Scalar>
Multivector<Scalar> project_degree(const StratifiedAlgebra& alg, const Multivector<Scalar>& v, int d, bool* in_range) {
  if (v.dim() != alg.dim()) throw DimensionError("multivector dimension does not match the algebra");
  Multivector<Scalar> out(v.dim(), v.grade());
  const int p = v.grade();
  const bool ok = p == 0 ? d == 0 : (d >= p && d <= degree_profile(alg, p).max_degree);
  if (in_range) *in_range = ok;
  if (!ok) return out;
  for (const auto& [a, c] : v.coeffs())
    if (multi_index_degree(alg, a) == d) out.set(a, c);
  return out;
}

/// "i1,i2,...,ip" with 1-based indices.
std::string multi_index_key(const MultiIndex& a);
MultiIndex parse_multi_index_key(const std::string& key);

}  // namespace carnot
