#include "carnot/algebra.hpp"

#include <functional>

// Group law from the Baker-Campbell-Hausdorff series, built on Lie-algebra
// elements whose coordinates are polynomials in (x, y). The homogeneous
// components Z_m of log(exp X exp Y) satisfy the recursion
//   Z_1 = X + Y,
//   (m+1) Z_{m+1} = 1/2 [X - Y, Z_m]
//       + sum_{p>=1, 2p<=m} B_{2p}/(2p)! sum_{k_1+..+k_{2p}=m} [Z_{k_1},[...,[Z_{k_{2p}}, X + Y]...]].
// Z_m vanishes for m above the step, so the recursion stops there.

namespace carnot {

namespace {

using LieElem = std::vector<Polynomial>;

LieElem lie_bracket(const StratifiedAlgebra& alg, const LieElem& a, const LieElem& b) {
  const int vars = a.front().num_vars();
  LieElem out(alg.dim(), Polynomial(vars));
  for (const auto& e : alg.nonzero_constants()) {
    if (a[e.i].is_zero() || b[e.j].is_zero()) continue;
    out[e.k] += (a[e.i] * b[e.j]).scaled(e.c);
  }
  return out;
}

LieElem add(const LieElem& a, const LieElem& b, const Rational& s = Rational(1)) {
  LieElem out = a;
  for (std::size_t k = 0; k < a.size(); ++k) out[k] += b[k].scaled(s);
  return out;
}

std::vector<Rational> bernoulli(int m) {
  std::vector<Rational> b(m + 1);
  b[0] = 1;
  for (int k = 1; k <= m; ++k) {
    Rational acc = 0;
    for (int j = 0; j < k; ++j) acc += Rational(static_cast<long long>(binomial(k + 1, j))) * b[j];
    b[k] = -acc / (k + 1);
  }
  return b;
}

Rational factorial(int n) {
  Rational f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void for_each_composition(int total, int parts, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> k(parts);
  std::function<void(int, int)> rec = [&](int idx, int left) {
    if (idx == parts - 1) {
      k[idx] = left;
      f(k);
      return;
    }
    for (int v = 1; v <= left - (parts - idx - 1); ++v) {
      k[idx] = v;
      rec(idx + 1, left - v);
    }
  };
  if (parts <= total) rec(0, total);
}

}  // namespace

void StratifiedAlgebra::build_group_law() {
  const int n = n_, s = step();
  LieElem x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = Polynomial::variable(2 * n, i);
    y[i] = Polynomial::variable(2 * n, n + i);
  }
  const LieElem sum = add(x, y), diff = add(x, y, Rational(-1));
  const auto bern = bernoulli(s + 1);

  std::vector<LieElem> z(s + 1);
  z[1] = sum;
  for (int m = 1; m < s; ++m) {
    LieElem acc = lie_bracket(*this, diff, z[m]);
    for (auto& c : acc) c = c.scaled(Rational(1, 2));
    for (int p = 1; 2 * p <= m; ++p) {
      const Rational coef = bern[2 * p] / factorial(2 * p);
      for_each_composition(m, 2 * p, [&](const std::vector<int>& k) {
        LieElem term = sum;
        for (int t = 2 * p - 1; t >= 0; --t) term = lie_bracket(*this, z[k[t]], term);
        acc = add(acc, term, coef);
      });
    }
    for (auto& c : acc) c = c.scaled(Rational(1, m + 1));
    z[m + 1] = std::move(acc);
  }

  bch_.assign(n, Polynomial(2 * n));
  for (int m = 2; m <= s; ++m)
    for (int k = 0; k < n; ++k) bch_[k] += z[m][k];

  std::vector<Polynomial> at_origin(2 * n);
  for (int i = 0; i < n; ++i) {
    at_origin[i] = Polynomial::variable(n, i);
    at_origin[n + i] = Polynomial(n);
  }
  frame_.assign(static_cast<std::size_t>(n) * n, Polynomial(n));
  bch_dy_.assign(static_cast<std::size_t>(n) * n, Polynomial(2 * n));
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i) {
      Polynomial d = bch_[l].derivative(n + i);
      frame_[static_cast<std::size_t>(l) * n + i] =
          d.compose(at_origin) + (l == i ? Polynomial::constant(n, Rational(1)) : Polynomial(n));
      bch_dy_[static_cast<std::size_t>(l) * n + i] = std::move(d);
    }
}

}  // namespace carnot
