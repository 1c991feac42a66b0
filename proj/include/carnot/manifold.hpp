#pragma once

#include "carnot/algebra.hpp"
#include "carnot/exterior.hpp"
#include "carnot/linalg.hpp"
#include "carnot/polynomial.hpp"

#include <functional>
#include <string>
#include <vector>

namespace carnot {

/// Closed axis-aligned parameter box.
struct Domain {
  std::vector<double> lo, hi;

  static Domain cube(int p, double lo, double hi) { return {std::vector<double>(p, lo), std::vector<double>(p, hi)}; }
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const VectorXd& t, double slack = 0) const;
  double volume() const;
};

/// p-dimensional C^1 parametrization Phi: A -> G in exponential coordinates.
///
/// Polynomial charts carry exact coefficients and their derivatives, which
/// gives an analytic Jacobian and the exact-arithmetic path. Function charts
/// take a closure and optionally its Jacobian; without one, central
/// differences with step 1e-6 (1 + |t_i|) are used. Evaluation never mutates
/// the chart, so it is safe from many threads.
class Chart {
 public:
  using MapFn = std::function<VectorXd(const VectorXd&)>;
  using JacFn = std::function<MatrixXd(const VectorXd&)>;

  static Chart polynomial(std::vector<Polynomial> coords, Domain domain, std::string name = "polynomial");
  static Chart function(int p, int n, MapFn map, JacFn jac, Domain domain, std::string name = "function");

  int p() const { return p_; }
  int n() const { return n_; }
  const Domain& domain() const { return domain_; }
  const std::string& name() const { return name_; }
  bool is_polynomial() const { return !coords_.empty(); }
  bool has_analytic_jacobian() const { return is_polynomial() || static_cast<bool>(jac_); }
  const std::vector<Polynomial>& polynomials() const { return coords_; }

  VectorXd operator()(const VectorXd& t) const;
  MatrixXd jacobian(const VectorXd& t) const;
  /// Exact path; polynomial charts only.
  VectorXq eval_exact(const VectorXq& t) const;
  MatrixXq jacobian_exact(const VectorXq& t) const;

  /// The chart t -> x . Phi(t). Stays polynomial when Phi is.
  Chart translated(const StratifiedAlgebra& alg, const VectorXq& x) const;
  Chart translated(const StratifiedAlgebra& alg, const VectorXd& x) const;
  /// Phi o eta for a polynomial map eta: new_domain -> domain.
  Chart reparametrized(const std::vector<Polynomial>& eta, Domain new_domain) const;
  Chart with_domain(Domain d) const;

 private:
  int p_ = 0, n_ = 0;
  Domain domain_;
  std::string name_;
  std::vector<Polynomial> coords_;
  std::vector<Polynomial> jac_polys_;  // row-major n x p
  MapFn map_;
  JacFn jac_;
};

/// Builtin families: line, vertical-axis, transversal-curve, segment, plane,
/// saddle, half-saddle, disk. Raises UsageError for unknown names and
/// DimensionError when the family does not fit the group.
Chart builtin_chart(const std::string& name, const StratifiedAlgebra& alg);
std::vector<std::string> builtin_chart_names();

/// Point, Jacobian and the frame coefficients C = A(x)^{-1} J, i.e. the
/// tangent vectors written in the left-invariant frame at x.
template <typename Scalar>
struct TangentData {
  Vector<Scalar> x;
  Matrix<Scalar> jacobian;
  Matrix<Scalar> frame_coeffs;
};

TangentData<double> tangent_data(const StratifiedAlgebra& alg, const Chart& chart, const VectorXd& t);
TangentData<Rational> tangent_data_exact(const StratifiedAlgebra& alg, const Chart& chart, const VectorXq& t);

/// Singular values below rank_tol * largest count as zero.
constexpr double kDefaultRankTol = 1e-10;
constexpr double kDefaultDegreeTol = 1e-8;

/// Wedge of the pulled-back tangent vectors; a multivector at the origin.
/// Throws SingularPointError when the Jacobian has rank < p.
Multivector<double> tangent_multivector(const StratifiedAlgebra& alg, const Chart& chart, const VectorXd& t,
                                        double rank_tol = kDefaultRankTol);
Multivector<Rational> tangent_multivector_exact(const StratifiedAlgebra& alg, const Chart& chart, const VectorXq& t);

int pointwise_degree(const StratifiedAlgebra& alg, const Chart& chart, const VectorXd& t,
                     double rel_tol = kDefaultDegreeTol);
int pointwise_degree_exact(const StratifiedAlgebra& alg, const Chart& chart, const VectorXq& t);

/// Graded column echelon form E = C T of an n x p frame-coefficient matrix.
///
/// Layers are processed from the top one down. Within layer k the pivot is
/// the largest remaining entry (ties: lowest row, then lowest column); its
/// column is scaled to 1 on the pivot row and that row is cleared from every
/// other column. Columns are returned sorted by pivot layer, then pivot row.
template <typename Scalar>
struct NormalForm {
  Matrix<Scalar> echelon;
  Matrix<Scalar> transform;
  /// alpha[k-1] = number of pivots in layer k.
  std::vector<int> alpha;
  std::vector<int> pivot_rows;
  /// Layer of the pivot of each column; nondecreasing.
  std::vector<int> subdegrees;
  int degree = 0;
  /// The identity blocks sit on rows other than the first alpha_k of their
  /// layer, so a within-layer basis permutation would be needed.
  bool requires_row_permutation = false;
  /// Largest entry discarded as zero (float path only).
  double discarded = 0;
};

template <typename Scalar>
NormalForm<Scalar> graded_echelon(const StratifiedAlgebra& alg, const Matrix<Scalar>& c, double rel_tol = 0.0);

NormalForm<double> normal_form(const StratifiedAlgebra& alg, const Chart& chart, const VectorXd& t,
                               double rel_tol = kDefaultDegreeTol);
NormalForm<Rational> normal_form_exact(const StratifiedAlgebra& alg, const Chart& chart, const VectorXq& t);

enum class PointClass { transversal, A, B, singular };
std::string to_string(PointClass c);

/// Transversal iff degree = D(p). Otherwise A when some layer j > l is not
/// full (alpha_j < n_j), else B (then alpha_l < r_p).
PointClass classify_point(const StratifiedAlgebra& alg, const DegreeProfile& profile, const std::vector<int>& alpha);

template <typename Scalar>
PointClass classify_point(const StratifiedAlgebra& alg, const DegreeProfile& profile, const NormalForm<Scalar>& nf) {
  return classify_point(alg, profile, nf.alpha);
}

struct CharSample {
  VectorXd t;
  VectorXd x;
  int degree = -1;
  PointClass cls = PointClass::singular;
};

struct SampleOptions {
  double rel_tol = kDefaultDegreeTol;
  /// Exact rational degrees on the grid; polynomial charts only.
  bool exact = false;
};

struct CharsetSampling {
  std::vector<CharSample> samples;
  std::size_t transversal = 0, class_a = 0, class_b = 0, singular = 0;

  std::vector<CharSample> characteristic() const;
};

/// Tensor grid with m points per axis, endpoints included:
/// t_i = lo + (hi - lo) * i / (m - 1).
std::vector<VectorXd> parameter_grid(const Domain& domain, int m);

CharsetSampling sample_characteristic_set(const StratifiedAlgebra& alg, const Chart& chart, int m,
                                          const SampleOptions& options = {});

/// Columns t1..tp, x1..xn, degree, class.
void write_samples_csv(const std::string& path, const std::vector<CharSample>& samples);

// ---------------------------------------------------------------------------

template <typename Scalar>
NormalForm<Scalar> graded_echelon(const StratifiedAlgebra& alg, const Matrix<Scalar>& c, double rel_tol) {
  const int n = alg.dim(), p = static_cast<int>(c.cols());
  if (c.rows() != n) throw DimensionError("graded_echelon: matrix rows differ from the algebra dimension");
  NormalForm<Scalar> nf;
  Matrix<Scalar> e = c;
  Matrix<Scalar> t = identity<Scalar>(p);
  Scalar scale(0);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) scale = std::max(scale, abs_value(e(i, j)));
  const Scalar cut = Scalar(rel_tol) * scale;
  std::vector<char> used(p, 0);
  std::vector<int> col_layer(p, 0), col_row(p, -1);
  nf.alpha.assign(alg.step(), 0);
  for (int k = alg.step(); k >= 1; --k) {
    const int lo = alg.layer_offset(k), hi = lo + alg.layer_dim(k);
    for (;;) {
      int br = -1, bc = -1;
      Scalar best = cut;
      for (int i = lo; i < hi; ++i)
        for (int j = 0; j < p; ++j)
          if (!used[j] && abs_value(e(i, j)) > best) {
            best = abs_value(e(i, j));
            br = i;
            bc = j;
          }
      if (br < 0) break;
      const Scalar piv = e(br, bc);
      for (int i = 0; i < n; ++i) e(i, bc) /= piv;
      for (int i = 0; i < p; ++i) t(i, bc) /= piv;
      e(br, bc) = Scalar(1);
      for (int j = 0; j < p; ++j) {
        if (j == bc || e(br, j) == Scalar(0)) continue;
        const Scalar f = e(br, j);
        for (int i = 0; i < n; ++i) e(i, j) -= f * e(i, bc);
        for (int i = 0; i < p; ++i) t(i, j) -= f * t(i, bc);
        e(br, j) = Scalar(0);
      }
      used[bc] = 1;
      col_layer[bc] = k;
      col_row[bc] = br;
      ++nf.alpha[k - 1];
    }
    // Whatever is left on this layer in unused columns is below the cut.
    for (int j = 0; j < p; ++j)
      if (!used[j])
        for (int i = lo; i < hi; ++i) {
          if constexpr (!is_exact_v<Scalar>) nf.discarded = std::max(nf.discarded, std::abs(e(i, j)));
          e(i, j) = Scalar(0);
        }
    const int a = nf.alpha[k - 1];
    for (int j = 0; j < p; ++j)
      if (used[j] && col_layer[j] == k && (col_row[j] < lo || col_row[j] >= lo + a)) nf.requires_row_permutation = true;
  }
  for (int j = 0; j < p; ++j)
    if (!used[j]) throw SingularPointError("graded_echelon: frame-coefficient matrix has rank < p");

  std::vector<int> order(p);
  for (int j = 0; j < p; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return col_layer[a] != col_layer[b] ? col_layer[a] < col_layer[b] : col_row[a] < col_row[b];
  });
  nf.echelon.resize(n, p);
  nf.transform.resize(p, p);
  for (int j = 0; j < p; ++j) {
    nf.echelon.col(j) = e.col(order[j]);
    nf.transform.col(j) = t.col(order[j]);
    nf.pivot_rows.push_back(col_row[order[j]]);
    nf.subdegrees.push_back(col_layer[order[j]]);
    nf.degree += col_layer[order[j]];
  }
  return nf;
}

}  // namespace carnot
