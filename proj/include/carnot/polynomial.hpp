#pragma once

#include "carnot/core.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace carnot {

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Values are immutable once built; every arithmetic operation returns a new
/// polynomial. A flattened double-precision copy of the terms is kept next to
/// the exact ones so the float evaluation path never touches Rational.
class Polynomial {
 public:
  using Exponents = std::vector<int>;

  Polynomial() = default;
  explicit Polynomial(int num_vars);
  Polynomial(int num_vars, std::map<Exponents, Rational> terms);

  static Polynomial constant(int num_vars, const Rational& c);
  static Polynomial variable(int num_vars, int var);

  int num_vars() const { return num_vars_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t num_terms() const { return terms_.size(); }
  const std::map<Exponents, Rational>& terms() const { return terms_; }

  int total_degree() const;
  /// Largest sum_v weights[v]*e_v over the terms; -1 for the zero polynomial.
  int weighted_degree(const std::vector<int>& weights) const;
  /// Smallest weighted degree over the terms; -1 for the zero polynomial.
  int weighted_min_degree(const std::vector<int>& weights) const;
  bool depends_on(int var) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator-() const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial scaled(const Rational& c) const;
  Polynomial& operator+=(const Polynomial& o) { return *this = *this + o; }

  Polynomial derivative(int var) const;
  /// Substitutes subs[v] for variable v; all substitutions share one variable count.
  Polynomial compose(const std::vector<Polynomial>& subs) const;
  /// Fixes variable `var` to the value c, keeping the variable count.
  Polynomial substitute(int var, const Rational& c) const;

  template <typename Scalar>
  Scalar eval(const Scalar* x) const;

  template <typename Scalar>
  Scalar operator()(const Vector<Scalar>& x) const {
    if (x.size() != num_vars_) throw DimensionError("Polynomial: wrong number of variables");
    return eval(x.data());
  }

  std::string to_string(const std::vector<std::string>& names = {}) const;

  bool operator==(const Polynomial& o) const { return num_vars_ == o.num_vars_ && terms_ == o.terms_; }

 private:
  void rebuild();

  int num_vars_ = 0;
  std::map<Exponents, Rational> terms_;
  // Flattened float copy: term t uses factors_[offsets_[t] .. offsets_[t+1]).
  std::vector<double> coeff_d_;
  std::vector<int> offsets_;
  std::vector<std::pair<int, int>> factors_;
};

template <typename Scalar>
Scalar ipow(const Scalar& base, int e) {
  Scalar out(1);
  Scalar b = base;
  while (e > 0) {
    if (e & 1) out *= b;
    e >>= 1;
    if (e) b *= b;
  }
  return out;
}

template <typename Scalar>
Scalar Polynomial::eval(const Scalar* x) const {
  Scalar acc(0);
  if constexpr (is_exact_v<Scalar>) {
    for (const auto& [exps, c] : terms_) {
      Scalar term = c;
      for (int v = 0; v < num_vars_; ++v)
        if (exps[v] != 0) term *= ipow(x[v], exps[v]);
      acc += term;
    }
  } else {
    const std::size_t n = coeff_d_.size();
    for (std::size_t t = 0; t < n; ++t) {
      Scalar term = coeff_d_[t];
      for (int f = offsets_[t]; f < offsets_[t + 1]; ++f) {
        const auto [v, e] = factors_[f];
        term *= e == 1 ? x[v] : ipow(x[v], e);
      }
      acc += term;
    }
  }
  return acc;
}

}  // namespace carnot
