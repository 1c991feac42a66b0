#include "carnot/algebra.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace carnot;

namespace {

// Matrix representations: X_i -> upper-triangular nilpotent matrices whose
// commutators realize the structure constants. The group law is then
// log(exp(A) exp(B)) computed by truncated series.
MatrixXq elem(int n, int r, int c) {
  MatrixXq m = MatrixXq::Zero(n, n);
  m(r, c) = 1;
  return m;
}

template <typename M>
bool same(const M& a, const M& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

MatrixXq mul(const MatrixXq& a, const MatrixXq& b) { return mat_mul(a, b); }

MatrixXq exp_nilpotent(const MatrixXq& a) {
  const int n = static_cast<int>(a.rows());
  MatrixXq out = MatrixXq::Identity(n, n), term = MatrixXq::Identity(n, n);
  for (int k = 1; k < n; ++k) {
    term = mul(term, a);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) += term(i, j) / Rational(static_cast<long long>(std::tgamma(k + 1) + 0.5));
  }
  return out;
}

MatrixXq log_unipotent(const MatrixXq& g) {
  const int n = static_cast<int>(g.rows());
  MatrixXq u = g - MatrixXq::Identity(n, n);
  MatrixXq out = MatrixXq::Zero(n, n), term = MatrixXq::Identity(n, n);
  for (int k = 1; k < n; ++k) {
    term = mul(term, u);
    const Rational c = Rational(k % 2 == 1 ? 1 : -1) / k;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) += c * term(i, j);
  }
  return out;
}

struct Rep {
  std::vector<MatrixXq> gens;
  MatrixXq embed(const VectorXq& x) const {
    MatrixXq m = MatrixXq::Zero(gens[0].rows(), gens[0].cols());
    for (std::size_t i = 0; i < gens.size(); ++i)
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) += x(i) * gens[i](r, c);
    return m;
  }
  // Coordinates of a matrix in the span of the generators (the representation is faithful
  // and each generator owns a distinguished entry).
  VectorXq coords(const MatrixXq& m, const std::vector<std::pair<int, int>>& keys) const {
    VectorXq x = VectorXq::Zero(static_cast<int>(gens.size()));
    MatrixXq rest = m;
    for (std::size_t i = 0; i < gens.size(); ++i) {
      x(i) = rest(keys[i].first, keys[i].second) / gens[i](keys[i].first, keys[i].second);
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) rest(r, c) -= x(i) * gens[i](r, c);
    }
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) EXPECT_EQ(rest(r, c), 0);
    return x;
  }
};

VectorXq random_q(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(-9, 9);
  VectorXq x(n);
  for (int i = 0; i < n; ++i) x(i) = Rational(d(rng), 1 + (d(rng) + 9) % 4);
  return x;
}

void check_against_matrix_group(const StratifiedAlgebra& alg, const Rep& rep,
                                const std::vector<std::pair<int, int>>& keys) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXq x = random_q(alg.dim(), rng), y = random_q(alg.dim(), rng);
    VectorXq expected = rep.coords(log_unipotent(mul(exp_nilpotent(rep.embed(x)), exp_nilpotent(rep.embed(y)))), keys);
    EXPECT_TRUE(same(bch_product(alg, x, y), expected));
  }
}

}  // namespace

TEST(Algebra, BuiltinsValidate) {
  for (const char* name : {"abelian:3", "heisenberg:1", "heisenberg:2", "engel", "free_step2:3"}) {
    auto alg = builtin(name);
    EXPECT_TRUE(validate(alg).valid()) << name;
  }
  EXPECT_THROW(builtin("nonsense"), UsageError);
  auto h = builtin("heisenberg(1)");
  EXPECT_EQ(h.dim(), 3);
  EXPECT_EQ(h.homogeneous_dimension(), 4);
  EXPECT_EQ(engel().homogeneous_dimension(), 7);
  EXPECT_EQ(free_step2(3).homogeneous_dimension(), 9);
}

TEST(Algebra, GradingViolationReported) {
  StratifiedAlgebra bad({2, 1}, {{0, 2, {{1, Rational(1)}}}});
  auto rep = validate(bad);
  EXPECT_FALSE(rep.grading);
  EXPECT_FALSE(rep.generation);
  EXPECT_FALSE(rep.valid());
  EXPECT_THROW(require_valid(bad), StructuralError);
}

TEST(Algebra, AntisymmetryAndJacobiViolations) {
  StratifiedAlgebra asym({2, 1}, {{0, 1, {{2, Rational(1)}}}, {1, 0, {{2, Rational(1)}}}});
  EXPECT_FALSE(validate(asym).antisymmetry);
  // [X1,X2]=X3, [X1,X3]=X4, [X2,X3]=X4 with layers [2,1,1] breaks Jacobi? It does not;
  // a genuine failure needs three mutually bracketing elements in one grading.
  StratifiedAlgebra nonjac({3, 3, 1}, {{0, 1, {{3, Rational(1)}}},
                                       {1, 2, {{4, Rational(1)}}},
                                       {0, 2, {{5, Rational(1)}}},
                                       {0, 4, {{6, Rational(1)}}},
                                       {1, 5, {{6, Rational(1)}}},
                                       {2, 3, {{6, Rational(1)}}}});
  auto rep = validate(nonjac);
  EXPECT_TRUE(rep.grading);
  EXPECT_FALSE(rep.jacobi);
  EXPECT_THROW(StratifiedAlgebra({2, 1}, {{0, 5, {}}}), StructuralError);
  EXPECT_THROW(StratifiedAlgebra({0}, {}), StructuralError);
}

TEST(Algebra, GenerationViolation) {
  // Layer 2 not reached by brackets of layer 1.
  StratifiedAlgebra g({2, 2}, {{0, 1, {{2, Rational(1)}}}});
  auto rep = validate(g);
  EXPECT_TRUE(rep.grading);
  EXPECT_FALSE(rep.generation);
}

TEST(Algebra, HeisenbergProductExample) {
  auto h = heisenberg(1);
  VectorXd x(3), y(3);
  x << 1, 0, 0;
  y << 0, 1, 0;
  VectorXd z = bch_product(h, x, y);
  EXPECT_DOUBLE_EQ(z(0), 1);
  EXPECT_DOUBLE_EQ(z(1), 1);
  EXPECT_DOUBLE_EQ(z(2), 0.5);
}

TEST(Algebra, BchMatchesHeisenbergMatrices) {
  auto h = heisenberg(1);
  Rep rep{{elem(3, 0, 1), elem(3, 1, 2), elem(3, 0, 2)}};
  check_against_matrix_group(h, rep, {{0, 1}, {1, 2}, {0, 2}});
}

TEST(Algebra, BchMatchesEngelMatrices) {
  const int n = 4;
  Rep rep{{elem(n, 0, 1) + elem(n, 1, 2) + elem(n, 2, 3), elem(n, 2, 3), elem(n, 1, 3), elem(n, 0, 3)}};
  // Adjust generators so that [X1,X2]=X3 and [X1,X3]=X4 hold in the representation.
  MatrixXq x1 = rep.gens[0], x2 = rep.gens[1];
  MatrixXq x3 = mul(x1, x2) - mul(x2, x1);
  MatrixXq x4 = mul(x1, x3) - mul(x3, x1);
  rep.gens = {x1, x2, x3, x4};
  MatrixXq c23 = mul(x2, x3) - mul(x3, x2);
  MatrixXq zero = MatrixXq::Zero(n, n);
  EXPECT_TRUE(same(c23, zero));
  check_against_matrix_group(engel(), rep, {{0, 1}, {2, 3}, {1, 3}, {0, 3}});
}

TEST(Algebra, BchMatchesFiliformStep4) {
  // Step-4 filiform: [X1,X2]=X3, [X1,X3]=X4, [X1,X4]=X5.
  const int n = 5;
  StratifiedAlgebra fil({2, 1, 1, 1}, {{0, 1, {{2, Rational(1)}}}, {0, 2, {{3, Rational(1)}}}, {0, 3, {{4, Rational(1)}}}});
  ASSERT_TRUE(validate(fil).valid());
  MatrixXq x1 = elem(n, 0, 1) + elem(n, 1, 2) + elem(n, 2, 3) + elem(n, 3, 4), x2 = elem(n, 3, 4);
  MatrixXq x3 = mul(x1, x2) - mul(x2, x1);
  MatrixXq x4 = mul(x1, x3) - mul(x3, x1);
  MatrixXq x5 = mul(x1, x4) - mul(x4, x1);
  Rep rep{{x1, x2, x3, x4, x5}};
  check_against_matrix_group(fil, rep, {{0, 1}, {3, 4}, {2, 4}, {1, 4}, {0, 4}});
}

TEST(Algebra, GroupAxioms) {
  std::mt19937_64 rng(11);
  for (const char* name : {"heisenberg:2", "engel", "free_step2:3"}) {
    auto alg = builtin(name);
    for (int t = 0; t < 10; ++t) {
      VectorXq x = random_q(alg.dim(), rng), y = random_q(alg.dim(), rng), z = random_q(alg.dim(), rng);
      VectorXq zero = VectorXq::Zero(alg.dim());
      EXPECT_TRUE(same(bch_product(alg, bch_product(alg, x, y), z), bch_product(alg, x, bch_product(alg, y, z))));
      EXPECT_TRUE(same(bch_product(alg, x, inverse(alg, x)), zero));
      EXPECT_TRUE(same(bch_product(alg, x, zero), x));
      const Rational r(3, 2);
      EXPECT_TRUE(same(dilate(alg, r, bch_product(alg, x, y)), bch_product(alg, dilate(alg, r, x), dilate(alg, r, y))));
    }
  }
}

TEST(Algebra, FrameIsUnitLowerTriangularAndLeftInvariant) {
  auto alg = engel();
  std::mt19937_64 rng(3);
  VectorXq x = random_q(4, rng);
  MatrixXq a = frame_matrix(alg, x);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a(i, i), 1);
    for (int j = i + 1; j < 4; ++j) EXPECT_EQ(a(i, j), 0);
  }
  // Column i equals d/dt x.(t e_i) at t=0, checked by the exact right-argument Jacobian.
  MatrixXq jac = right_factor_jacobian(alg, x, VectorXq(VectorXq::Zero(4)));
  EXPECT_TRUE(same(jac, a));
  // Heisenberg fields: X1 = d1 - x2/2 d3, X2 = d2 + x1/2 d3.
  auto h = heisenberg(1);
  VectorXq p(3);
  p << 2, 4, 7;
  VectorXq f1 = vector_field_coeffs(h, 0, p), f2 = vector_field_coeffs(h, 1, p);
  EXPECT_EQ(f1(2), Rational(-2));
  EXPECT_EQ(f2(2), Rational(1));
  EXPECT_THROW(bch_product(h, VectorXd(VectorXd::Zero(2)), VectorXd(VectorXd::Zero(3))), DimensionError);
  EXPECT_THROW(dilate(h, 0.0, VectorXd(VectorXd::Zero(3))), DomainError);
}
