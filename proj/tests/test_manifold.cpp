#include "carnot/manifold.hpp"
#include "carnot/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace carnot;

namespace {

// Heisenberg left-invariant fields written out by hand:
// X = dx - (y/2) dt, Y = dy + (x/2) dt, T = dt.
// Returns the coefficients of a Euclidean vector w at point q in (X, Y, T).
VectorXd heisenberg_frame_coords(const VectorXd& q, const VectorXd& w) {
  VectorXd c(3);
  c(0) = w(0);
  c(1) = w(1);
  c(2) = w(2) + q(1) / 2 * w(0) - q(0) / 2 * w(1);
  return c;
}

Polynomial mono(int p, Rational c, std::vector<int> e) { return Polynomial(p, {{std::move(e), c}}); }

Chart random_poly_chart(const StratifiedAlgebra& alg, int p, Rng& rng) {
  const int n = alg.dim();
  std::vector<Polynomial> c(n, Polynomial(p));
  for (int l = 0; l < n; ++l) {
    if (l < p) c[l] = Polynomial::variable(p, l);
    for (int k = 0; k < 3; ++k) {
      std::vector<int> e(p);
      for (auto& x : e) x = static_cast<int>(rng.uniform() * 3);
      c[l] += mono(p, Rational(static_cast<int>(rng.uniform(-4, 4)), 3), e);
    }
  }
  return Chart::polynomial(c, Domain::cube(p, -1, 1));
}

VectorXq dyadic_point(int p, Rng& rng) {
  VectorXq t(p);
  for (int i = 0; i < p; ++i) t(i) = Rational(static_cast<int>(rng.uniform(-8, 8)), 8);
  return t;
}

}  // namespace

TEST(Manifold, SaddleTangentMatchesHandFrames) {
  const auto h = heisenberg(1);
  const auto saddle = builtin_chart("saddle", h);
  Rng rng(1);
  for (int s = 0; s < 40; ++s) {
    VectorXd t(2);
    t << rng.uniform(-1, 1), rng.uniform(-1, 1);
    const VectorXd q = saddle(t);
    VectorXd du(3), dv(3);
    du << 1, 0, t(1);
    dv << 0, 1, t(0);
    const VectorXd a = heisenberg_frame_coords(q, du), b = heisenberg_frame_coords(q, dv);
    const auto tau = tangent_multivector(h, saddle, t);
    for (const auto& idx : combinations(3, 2)) {
      const double minor = a(idx[0]) * b(idx[1]) - a(idx[1]) * b(idx[0]);
      EXPECT_NEAR(tau.coeff(idx), minor, 1e-12);
    }
    // Closed forms: e12 + (u/2) e13 - (3v/2) e23.
    EXPECT_NEAR(tau.coeff({0, 2}), t(0) / 2, 1e-12);
    EXPECT_NEAR(tau.coeff({1, 2}), -1.5 * t(1), 1e-12);
  }
}

TEST(Manifold, ExactDegreesOfBuiltins) {
  const auto h = heisenberg(1);
  const auto saddle = builtin_chart("saddle", h);
  const auto half = builtin_chart("half-saddle", h);
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) {
      VectorXq t(2);
      t << Rational(a, 2), Rational(b, 2);
      EXPECT_EQ(pointwise_degree_exact(h, saddle, t), a == 0 && b == 0 ? 2 : 3);
      EXPECT_EQ(pointwise_degree_exact(h, half, t), b == 0 ? 2 : 3);
    }
  VectorXq t1(1);
  t1 << Rational(1, 3);
  EXPECT_EQ(pointwise_degree_exact(h, builtin_chart("line", h), t1), 1);
  EXPECT_EQ(pointwise_degree_exact(h, builtin_chart("vertical-axis", h), t1), 2);
  EXPECT_EQ(pointwise_degree_exact(h, builtin_chart("transversal-curve", h), t1), 2);
  EXPECT_EQ(pointwise_degree_exact(abelian(2), builtin_chart("segment", abelian(2)), t1), 1);
}

TEST(Manifold, ClassificationRules) {
  const auto h = heisenberg(1);
  const auto p1 = degree_profile(h, 1), p2 = degree_profile(h, 2);
  VectorXq t1(1);
  t1 << Rational(1, 2);
  // Horizontal curve: l = 2 = step, so no layer above l and the class is B.
  EXPECT_EQ(classify_point(h, p1, normal_form_exact(h, builtin_chart("line", h), t1)), PointClass::B);
  EXPECT_EQ(classify_point(h, p1, normal_form_exact(h, builtin_chart("vertical-axis", h), t1)),
            PointClass::transversal);
  VectorXq t0 = VectorXq::Zero(2);
  // Saddle vertex: layer 2 is above l = 1 and unreached.
  EXPECT_EQ(classify_point(h, p2, normal_form_exact(h, builtin_chart("saddle", h), t0)), PointClass::A);

  const auto e = engel();
  const auto pe = degree_profile(e, 2);
  EXPECT_EQ(pe.ell, 2);
  EXPECT_EQ(pe.r_p, 1);
  EXPECT_EQ(classify_point(e, pe, std::vector<int>{2, 0, 0}), PointClass::A);
  EXPECT_EQ(classify_point(e, pe, std::vector<int>{1, 0, 1}), PointClass::B);
  EXPECT_EQ(classify_point(e, pe, std::vector<int>{0, 1, 1}), PointClass::transversal);
  EXPECT_THROW(classify_point(e, pe, std::vector<int>{1, 0, 0}), DimensionError);
  // p = 3: l = 1, r_p = 1; layer 3 unreached.
  const auto pe3 = degree_profile(e, 3);
  EXPECT_EQ(pe3.ell, 1);
  EXPECT_EQ(classify_point(e, pe3, std::vector<int>{2, 1, 0}), PointClass::A);
  EXPECT_EQ(classify_point(e, pe3, std::vector<int>{1, 1, 1}), PointClass::transversal);
}

TEST(Manifold, EchelonInvariants) {
  Rng rng(7);
  for (const auto& alg : {heisenberg(1), heisenberg(2), engel(), free_step2(3)}) {
    for (int p = 1; p <= std::min(3, alg.dim() - 1); ++p) {
      const auto profile = degree_profile(alg, p);
      for (int s = 0; s < 15; ++s) {
        const auto chart = random_poly_chart(alg, p, rng);
        const VectorXq t = dyadic_point(p, rng);
        NormalForm<Rational> nf;
        try {
          nf = normal_form_exact(alg, chart, t);
        } catch (const SingularPointError&) {
          continue;
        }
        const auto td = tangent_data_exact(alg, chart, t);
        const MatrixXq ct = mat_mul(td.frame_coeffs, nf.transform);
        for (int i = 0; i < alg.dim(); ++i)
          for (int j = 0; j < p; ++j) EXPECT_TRUE(ct(i, j) == nf.echelon(i, j));
        EXPECT_NE(determinant(nf.transform), Rational(0));
        int deg = 0, total = 0;
        for (int k = 1; k <= alg.step(); ++k) {
          deg += k * nf.alpha[k - 1];
          total += nf.alpha[k - 1];
          EXPECT_LE(nf.alpha[k - 1], alg.layer_dim(k));
        }
        EXPECT_EQ(total, p);
        EXPECT_EQ(deg, nf.degree);
        EXPECT_TRUE(std::is_sorted(nf.subdegrees.begin(), nf.subdegrees.end()));
        for (int j = 0; j < p; ++j) {
          const int row = nf.pivot_rows[j], k = nf.subdegrees[j];
          EXPECT_EQ(alg.degree(row), k);
          EXPECT_TRUE(nf.echelon(row, j) == Rational(1));
          for (int c = 0; c < p; ++c)
            if (c != j) EXPECT_TRUE(nf.echelon(row, c) == Rational(0));
          // Nothing survives strictly above the pivot layer.
          for (int i = 0; i < alg.dim(); ++i)
            if (alg.degree(i) > k) EXPECT_TRUE(nf.echelon(i, j) == Rational(0));
        }
        // The echelon degree is the multivector degree.
        EXPECT_EQ(nf.degree, pointwise_degree_exact(alg, chart, t));
        EXPECT_LE(nf.degree, profile.max_degree);
        // Float path agrees at generic points.
        VectorXd td_f = to_double(t);
        EXPECT_EQ(normal_form(alg, chart, td_f).degree, nf.degree);
      }
    }
  }
}

TEST(Manifold, DegreeIsLeftInvariantAndReparametrizationInvariant) {
  Rng rng(11);
  const auto e = engel();
  for (int s = 0; s < 10; ++s) {
    const auto chart = random_poly_chart(e, 2, rng);
    VectorXq x(4);
    for (int i = 0; i < 4; ++i) x(i) = Rational(static_cast<int>(rng.uniform(-6, 6)), 5);
    const auto moved = chart.translated(e, x);
    // eta(s) = (s1 + s2^2 / 4, s2) is a diffeomorphism of the plane.
    std::vector<Polynomial> eta = {Polynomial::variable(2, 0) + mono(2, Rational(1, 4), {0, 2}),
                                   Polynomial::variable(2, 1)};
    const auto re = chart.reparametrized(eta, Domain::cube(2, -1, 1));
    for (int k = 0; k < 5; ++k) {
      const VectorXq t = dyadic_point(2, rng);
      EXPECT_TRUE(moved.eval_exact(t) == bch_product(e, x, chart.eval_exact(t)));
      try {
        const int d = pointwise_degree_exact(e, chart, t);
        EXPECT_EQ(pointwise_degree_exact(e, moved, t), d);
        VectorXq tr(2);
        tr << t(0) - t(1) * t(1) / 4, t(1);
        EXPECT_EQ(pointwise_degree_exact(e, re, tr), d);
      } catch (const SingularPointError&) {
      }
    }
  }
}

TEST(Manifold, FunctionChartsAndFiniteDifferences) {
  const auto h = heisenberg(1);
  const auto saddle = builtin_chart("saddle", h);
  const auto fn = Chart::function(
      2, 3, [&](const VectorXd& t) { return saddle(t); }, nullptr, Domain::cube(2, -1, 1));
  EXPECT_FALSE(fn.has_analytic_jacobian());
  Rng rng(5);
  for (int s = 0; s < 20; ++s) {
    VectorXd t(2);
    t << rng.uniform(-1, 1), rng.uniform(-1, 1);
    EXPECT_LT((fn.jacobian(t) - saddle.jacobian(t)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(pointwise_degree(h, fn, t), pointwise_degree(h, saddle, t));
  }
  VectorXd x(3);
  x << 0.3, -0.2, 0.7;
  const auto moved = fn.translated(h, x);
  VectorXd t(2);
  t << 0.4, -0.6;
  EXPECT_LT((moved(t) - bch_product(h, x, saddle(t))).norm(), 1e-14);
  // fn differentiates numerically.
  EXPECT_LT((moved.jacobian(t) - saddle.translated(h, x).jacobian(t)).norm(), 1e-8);

  const auto disk = builtin_chart("disk", abelian(3));
  VectorXd tz(2);
  tz << 0.0, 1.0;
  EXPECT_THROW(tangent_multivector(abelian(3), disk, tz), SingularPointError);
  EXPECT_THROW(builtin_chart("saddle", abelian(2)), DimensionError);
  EXPECT_THROW(builtin_chart("mobius", h), UsageError);
  EXPECT_THROW(saddle.jacobian(VectorXd::Zero(3)), DimensionError);
  EXPECT_THROW(pointwise_degree(engel(), saddle, t), DimensionError);
}

TEST(Manifold, RowPermutationFlag) {
  const auto h2 = heisenberg(2);
  std::vector<Polynomial> c(5, Polynomial(1));
  c[1] = Polynomial::variable(1, 0);
  const auto chart = Chart::polynomial(c, Domain::cube(1, -1, 1));
  VectorXq t(1);
  t << Rational(1, 2);
  const auto nf = normal_form_exact(h2, chart, t);
  EXPECT_TRUE(nf.requires_row_permutation);
  EXPECT_EQ(nf.pivot_rows[0], 1);
  const auto nf1 = normal_form_exact(h2, builtin_chart("line", h2), t);
  EXPECT_FALSE(nf1.requires_row_permutation);
}

TEST(Manifold, CharacteristicSampling) {
  const auto h = heisenberg(1);
  SampleOptions exact{.rel_tol = kDefaultDegreeTol, .exact = true};
  const auto saddle = sample_characteristic_set(h, builtin_chart("saddle", h), 21, exact);
  ASSERT_EQ(saddle.samples.size(), 441u);
  const auto cs = saddle.characteristic();
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].t.norm(), 0.0);
  EXPECT_EQ(cs[0].cls, PointClass::A);

  const auto half = sample_characteristic_set(h, builtin_chart("half-saddle", h), 21, exact);
  EXPECT_EQ(half.class_a, 21u);
  for (const auto& s : half.characteristic()) EXPECT_EQ(s.t(1), 0.0);

  // Float path (t values on the grid are exact here) agrees.
  const auto f = sample_characteristic_set(h, builtin_chart("half-saddle", h), 21);
  EXPECT_EQ(f.class_a, 21u);
  EXPECT_EQ(f.transversal, 420u);

  const auto g = parameter_grid(Domain::cube(1, -1, 1), 201);
  EXPECT_EQ(g[100](0), 0.0);
  EXPECT_EQ(g.front()(0), -1.0);
  EXPECT_EQ(g.back()(0), 1.0);

  const std::string path = testing::TempDir() + "samples.csv";
  write_samples_csv(path, cs);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "t1,t2,x1,x2,x3,degree,class");
  EXPECT_EQ(row, "0,0,0,0,0,2,A");
  std::remove(path.c_str());
}
