#pragma once

#include "carnot/core.hpp"
#include "carnot/linalg.hpp"
#include "carnot/polynomial.hpp"

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace carnot {

/// One bracket [X_i, X_j] = sum_k coeffs[k] X_k over the adapted basis.
/// Indices are 0-based.
struct BracketSpec {
  int i = 0;
  int j = 0;
  std::map<int, Rational> coeffs;
};

/// Stratified Lie algebra V_1 + ... + V_s in an adapted basis, together with
/// the group law of the simply connected group in exponential coordinates of
/// the first kind.
///
/// Basis indices are 0-based; layers (and hence degrees) are numbered from 1.
/// Construction checks only index ranges; the algebraic conditions are
/// reported by validate(). The group-law polynomials Q(x, y) of
/// x.y = x + y + Q(x, y) are derived once at construction from the
/// Baker-Campbell-Hausdorff series, truncated at the step.
class StratifiedAlgebra {
 public:
  static constexpr int kMaxDim = 64;

  /// If only one of (i,j) and (j,i) is listed, the other is filled in by
  /// antisymmetry.
  StratifiedAlgebra(std::vector<int> layer_dims, const std::vector<BracketSpec>& brackets,
                    std::string name = {});

  const std::string& name() const { return name_; }
  int dim() const { return n_; }
  int step() const { return static_cast<int>(layer_dims_.size()); }
  const std::vector<int>& layer_dims() const { return layer_dims_; }
  int layer_dim(int layer) const { return layer_dims_.at(layer - 1); }
  /// m_{layer-1}: index of the first basis vector of the layer.
  int layer_offset(int layer) const { return offsets_.at(layer - 1); }
  int degree(int i) const { return degrees_[i]; }
  const std::vector<int>& degrees() const { return degrees_; }
  /// Q = sum_j j n_j.
  int homogeneous_dimension() const;

  const Rational& structure_constant(int i, int j, int k) const {
    return constants_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k];
  }
  struct Entry {
    int i, j, k;
    Rational c;
    double c_d;
  };
  /// Nonzero structure constants, (i, j) in both orders.
  const std::vector<Entry>& nonzero_constants() const { return nonzero_; }

  /// Q_k(x, y) in 2n variables (x_0..x_{n-1}, y_0..y_{n-1}).
  const std::vector<Polynomial>& bch_polynomials() const { return bch_; }
  /// a_i^l(x): coefficient l of the left-invariant field X_i at x, n variables.
  const Polynomial& frame_polynomial(int l, int i) const { return frame_[static_cast<std::size_t>(l) * n_ + i]; }
  /// d Q_l / d y_i as a polynomial in (x, y).
  const Polynomial& bch_dy_polynomial(int l, int i) const { return bch_dy_[static_cast<std::size_t>(l) * n_ + i]; }

  template <typename Scalar>
  Vector<Scalar> bracket(const Vector<Scalar>& a, const Vector<Scalar>& b) const;

 private:
  void build_group_law();

  std::string name_;
  std::vector<int> layer_dims_;
  std::vector<int> offsets_;
  std::vector<int> degrees_;
  int n_ = 0;
  std::vector<Rational> constants_;
  std::vector<Entry> nonzero_;
  std::vector<Polynomial> bch_;
  std::vector<Polynomial> frame_;
  std::vector<Polynomial> bch_dy_;
};

struct ValidationReport {
  bool grading = true;
  bool antisymmetry = true;
  bool jacobi = true;
  bool generation = true;
  std::vector<std::string> violations;

  bool valid() const { return grading && antisymmetry && jacobi && generation; }
};

/// Checks grading, antisymmetry, the Jacobi identity and V_{i+1} = [V_1, V_i],
/// all in exact arithmetic.
ValidationReport validate(const StratifiedAlgebra& alg);

/// Throws StructuralError listing the violations when the algebra is not stratified.
void require_valid(const StratifiedAlgebra& alg);

StratifiedAlgebra abelian(int n);
StratifiedAlgebra heisenberg(int n);
StratifiedAlgebra engel();
StratifiedAlgebra free_step2(int m);

/// "abelian:3", "heisenberg:1", "engel", "free_step2:3"; parentheses
/// ("heisenberg(2)") are accepted too. Unknown names raise UsageError.
StratifiedAlgebra builtin(std::string_view name);
std::vector<std::string> builtin_names();

// ---------------------------------------------------------------------------
// Group arithmetic in exponential coordinates.

template <typename Scalar>
void check_point(const StratifiedAlgebra& alg, const Vector<Scalar>& x) {
  if (x.size() != alg.dim()) throw DimensionError("point has length " + std::to_string(x.size()) +
                                                  ", algebra has dimension " + std::to_string(alg.dim()));
}

/// Block x^j = (x_{m_{j-1}+1}, ..., x_{m_j}) of a point.
template <typename Derived>
auto layer(const StratifiedAlgebra& alg, const Eigen::MatrixBase<Derived>& x, int j) {
  return x.segment(alg.layer_offset(j), alg.layer_dim(j));
}
template <typename Derived>
auto layer(const StratifiedAlgebra& alg, Eigen::MatrixBase<Derived>& x, int j) {
  return x.segment(alg.layer_offset(j), alg.layer_dim(j));
}

/// x.y = x + y + Q(x, y).
template <typename Scalar>
Vector<Scalar> bch_product(const StratifiedAlgebra& alg, const Vector<Scalar>& x, const Vector<Scalar>& y) {
  check_point(alg, x);
  check_point(alg, y);
  const int n = alg.dim();
  Vector<Scalar> out = x + y;
  if constexpr (is_exact_v<Scalar>) {
    std::vector<Scalar> vars(2 * n);
    for (int i = 0; i < n; ++i) {
      vars[i] = x(i);
      vars[n + i] = y(i);
    }
    for (int k = 0; k < n; ++k)
      if (!alg.bch_polynomials()[k].is_zero()) out(k) += alg.bch_polynomials()[k].eval(vars.data());
  } else {
    std::array<Scalar, 2 * StratifiedAlgebra::kMaxDim> vars;
    for (int i = 0; i < n; ++i) {
      vars[i] = x(i);
      vars[n + i] = y(i);
    }
    for (int k = 0; k < n; ++k)
      if (!alg.bch_polynomials()[k].is_zero()) out(k) += alg.bch_polynomials()[k].eval(vars.data());
  }
  return out;
}

/// Float kernel of bch_product on raw storage; `out` may not alias x or y.
inline void bch_product_raw(const StratifiedAlgebra& alg, const double* x, const double* y, double* out) {
  const int n = alg.dim();
  std::array<double, 2 * StratifiedAlgebra::kMaxDim> vars;
  for (int i = 0; i < n; ++i) {
    vars[i] = x[i];
    vars[n + i] = y[i];
  }
  for (int k = 0; k < n; ++k) {
    out[k] = x[k] + y[k];
    const auto& q = alg.bch_polynomials()[k];
    if (!q.is_zero()) out[k] += q.eval(vars.data());
  }
}

/// Inverse in exponential coordinates of the first kind is -x.
template <typename Scalar>
Vector<Scalar> inverse(const StratifiedAlgebra& alg, const Vector<Scalar>& x) {
  check_point(alg, x);
  return -x;
}

/// delta_r: coordinate i scaled by r^{d_i}.
template <typename Scalar>
Vector<Scalar> dilate(const StratifiedAlgebra& alg, const Scalar& r, const Vector<Scalar>& x) {
  check_point(alg, x);
  if (!(r > Scalar(0))) throw DomainError("dilate: r must be positive");
  Vector<Scalar> out = x;
  for (int i = 0; i < alg.dim(); ++i) out(i) *= ipow(r, alg.degree(i));
  return out;
}

/// Coefficients a_i^l(x), l = 0..n-1, of the left-invariant field X_i at x:
/// column i of the differential of y -> x.y at y = 0.
template <typename Scalar>
Vector<Scalar> vector_field_coeffs(const StratifiedAlgebra& alg, int i, const Vector<Scalar>& x) {
  check_point(alg, x);
  if (i < 0 || i >= alg.dim()) throw DomainError("vector_field_coeffs: basis index out of range");
  Vector<Scalar> out(alg.dim());
  for (int l = 0; l < alg.dim(); ++l) out(l) = alg.frame_polynomial(l, i).eval(x.data());
  return out;
}

/// Differential of the left translation l_x at the identity; column i is X_i(x).
/// Unit lower triangular because a_i^l = delta_i^l whenever d_l <= d_i.
template <typename Scalar>
Matrix<Scalar> frame_matrix(const StratifiedAlgebra& alg, const Vector<Scalar>& x) {
  check_point(alg, x);
  const int n = alg.dim();
  Matrix<Scalar> a = Matrix<Scalar>::Identity(n, n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < l; ++i)
      if (alg.degree(l) > alg.degree(i)) a(l, i) = alg.frame_polynomial(l, i).eval(x.data());
  return a;
}

/// Jacobian of y -> x.y at an arbitrary y.
template <typename Scalar>
Matrix<Scalar> right_factor_jacobian(const StratifiedAlgebra& alg, const Vector<Scalar>& x, const Vector<Scalar>& y) {
  check_point(alg, x);
  check_point(alg, y);
  const int n = alg.dim();
  std::vector<Scalar> vars(2 * n);
  for (int i = 0; i < n; ++i) {
    vars[i] = x(i);
    vars[n + i] = y(i);
  }
  Matrix<Scalar> a = Matrix<Scalar>::Identity(n, n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i) {
      const auto& poly = alg.bch_dy_polynomial(l, i);
      if (!poly.is_zero()) a(l, i) += poly.eval(vars.data());
    }
  return a;
}

template <typename Scalar>
Vector<Scalar> StratifiedAlgebra::bracket(const Vector<Scalar>& a, const Vector<Scalar>& b) const {
  Vector<Scalar> out = Vector<Scalar>::Zero(n_);
  for (const auto& e : nonzero_) {
    if constexpr (is_exact_v<Scalar>) {
      out(e.k) += e.c * a(e.i) * b(e.j);
    } else {
      out(e.k) += e.c_d * a(e.i) * b(e.j);
    }
  }
  return out;
}

}  // namespace carnot
