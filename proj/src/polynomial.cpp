#include "carnot/polynomial.hpp"

#include <sstream>

namespace carnot {

Polynomial::Polynomial(int num_vars) : num_vars_(num_vars) { rebuild(); }

Polynomial::Polynomial(int num_vars, std::map<Exponents, Rational> terms)
    : num_vars_(num_vars), terms_(std::move(terms)) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (static_cast<int>(it->first.size()) != num_vars_)
      throw StructuralError("Polynomial: exponent vector has wrong length");
    for (int e : it->first)
      if (e < 0) throw StructuralError("Polynomial: negative exponent");
    it = it->second == 0 ? terms_.erase(it) : std::next(it);
  }
  rebuild();
}

Polynomial Polynomial::constant(int num_vars, const Rational& c) {
  return Polynomial(num_vars, {{Exponents(num_vars, 0), c}});
}

Polynomial Polynomial::variable(int num_vars, int var) {
  if (var < 0 || var >= num_vars) throw StructuralError("Polynomial::variable: index out of range");
  Exponents e(num_vars, 0);
  e[var] = 1;
  return Polynomial(num_vars, {{e, Rational(1)}});
}

void Polynomial::rebuild() {
  coeff_d_.clear();
  offsets_.assign(1, 0);
  factors_.clear();
  for (const auto& [exps, c] : terms_) {
    coeff_d_.push_back(to_double(c));
    for (int v = 0; v < num_vars_; ++v)
      if (exps[v] != 0) factors_.emplace_back(v, exps[v]);
    offsets_.push_back(static_cast<int>(factors_.size()));
  }
}

int Polynomial::total_degree() const {
  return weighted_degree(std::vector<int>(num_vars_, 1));
}

int Polynomial::weighted_degree(const std::vector<int>& weights) const {
  int best = -1;
  for (const auto& [exps, c] : terms_) {
    int d = 0;
    for (int v = 0; v < num_vars_; ++v) d += weights[v] * exps[v];
    best = std::max(best, d);
  }
  return best;
}

int Polynomial::weighted_min_degree(const std::vector<int>& weights) const {
  int best = -1;
  for (const auto& [exps, c] : terms_) {
    int d = 0;
    for (int v = 0; v < num_vars_; ++v) d += weights[v] * exps[v];
    best = best < 0 ? d : std::min(best, d);
  }
  return best;
}

bool Polynomial::depends_on(int var) const {
  for (const auto& [exps, c] : terms_)
    if (exps[var] != 0) return true;
  return false;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (num_vars_ != o.num_vars_) throw DimensionError("Polynomial: variable count mismatch");
  auto out = terms_;
  for (const auto& [e, c] : o.terms_) out[e] += c;
  return Polynomial(num_vars_, std::move(out));
}

Polynomial Polynomial::operator-() const { return scaled(Rational(-1)); }

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (num_vars_ != o.num_vars_) throw DimensionError("Polynomial: variable count mismatch");
  std::map<Exponents, Rational> out;
  Exponents e(num_vars_);
  for (const auto& [ea, ca] : terms_)
    for (const auto& [eb, cb] : o.terms_) {
      for (int v = 0; v < num_vars_; ++v) e[v] = ea[v] + eb[v];
      out[e] += ca * cb;
    }
  return Polynomial(num_vars_, std::move(out));
}

Polynomial Polynomial::scaled(const Rational& c) const {
  std::map<Exponents, Rational> out;
  if (c != 0)
    for (const auto& [e, v] : terms_) out.emplace(e, v * c);
  return Polynomial(num_vars_, std::move(out));
}

Polynomial Polynomial::derivative(int var) const {
  std::map<Exponents, Rational> out;
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponents d = e;
    d[var] -= 1;
    out[d] += c * e[var];
  }
  return Polynomial(num_vars_, std::move(out));
}

Polynomial Polynomial::compose(const std::vector<Polynomial>& subs) const {
  if (static_cast<int>(subs.size()) != num_vars_)
    throw DimensionError("Polynomial::compose: need one substitution per variable");
  const int m = subs.empty() ? 0 : subs.front().num_vars();
  Polynomial acc(m);
  // Powers of each substitution are computed once.
  std::vector<std::vector<Polynomial>> powers(num_vars_);
  for (const auto& [e, c] : terms_) {
    Polynomial term = constant(m, c);
    for (int v = 0; v < num_vars_; ++v) {
      if (e[v] == 0) continue;
      auto& pv = powers[v];
      if (pv.empty()) pv.push_back(constant(m, Rational(1)));
      while (static_cast<int>(pv.size()) <= e[v]) pv.push_back(pv.back() * subs[v]);
      term = term * pv[e[v]];
    }
    acc += term;
  }
  return acc;
}

Polynomial Polynomial::substitute(int var, const Rational& c) const {
  std::map<Exponents, Rational> out;
  for (const auto& [e, v] : terms_) {
    Exponents d = e;
    d[var] = 0;
    out[d] += v * ipow(c, e[var]);
  }
  return Polynomial(num_vars_, std::move(out));
}

std::string Polynomial::to_string(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << carnot::to_string(c);
    for (int v = 0; v < num_vars_; ++v) {
      if (e[v] == 0) continue;
      os << "*" << (v < static_cast<int>(names.size()) ? names[v] : "v" + std::to_string(v));
      if (e[v] > 1) os << "^" << e[v];
    }
  }
  return os.str();
}

}  // namespace carnot
