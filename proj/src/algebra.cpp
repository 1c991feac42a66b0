#include "carnot/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace carnot {

StratifiedAlgebra::StratifiedAlgebra(std::vector<int> layer_dims, const std::vector<BracketSpec>& brackets,
                                     std::string name)
    : name_(std::move(name)), layer_dims_(std::move(layer_dims)) {
  if (layer_dims_.empty()) throw StructuralError("algebra needs at least one layer");
  for (std::size_t j = 0; j < layer_dims_.size(); ++j) {
    if (layer_dims_[j] <= 0) throw StructuralError("layer " + std::to_string(j + 1) + " has non-positive dimension");
    offsets_.push_back(n_);
    n_ += layer_dims_[j];
    for (int k = 0; k < layer_dims_[j]; ++k) degrees_.push_back(static_cast<int>(j) + 1);
  }
  if (n_ > kMaxDim) throw StructuralError("algebra dimension exceeds " + std::to_string(kMaxDim));

  constants_.assign(static_cast<std::size_t>(n_) * n_ * n_, Rational(0));
  std::vector<char> given(static_cast<std::size_t>(n_) * n_, 0);
  auto at = [&](int i, int j, int k) -> Rational& { return constants_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k]; };
  for (const auto& b : brackets) {
    if (b.i < 0 || b.i >= n_ || b.j < 0 || b.j >= n_)
      throw StructuralError("bracket index out of range: [" + std::to_string(b.i + 1) + "," + std::to_string(b.j + 1) + "]");
    if (given[b.i * n_ + b.j]) throw StructuralError("bracket listed twice");
    given[b.i * n_ + b.j] = 1;
    for (const auto& [k, c] : b.coeffs) {
      if (k < 0 || k >= n_) throw StructuralError("bracket coefficient index out of range: " + std::to_string(k + 1));
      at(b.i, b.j, k) = c;
    }
  }
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (given[i * n_ + j] && !given[j * n_ + i] && i != j)
        for (int k = 0; k < n_; ++k) at(j, i, k) = -at(i, j, k);

  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        if (at(i, j, k) != 0) nonzero_.push_back({i, j, k, at(i, j, k), at(i, j, k).convert_to<double>()});

  build_group_law();
}

int StratifiedAlgebra::homogeneous_dimension() const {
  int q = 0;
  for (int j = 1; j <= step(); ++j) q += j * layer_dim(j);
  return q;
}

namespace {

VectorXq unit(int n, int i) {
  VectorXq e = VectorXq::Zero(n);
  e(i) = 1;
  return e;
}

std::string label(int i) { return "X" + std::to_string(i + 1); }

}  // namespace

ValidationReport validate(const StratifiedAlgebra& alg) {
  ValidationReport rep;
  const int n = alg.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Rational& c = alg.structure_constant(i, j, k);
        if (c != 0 && alg.degree(k) != alg.degree(i) + alg.degree(j)) {
          if (rep.grading)
            rep.violations.push_back("grading: [" + label(i) + "," + label(j) + "] has a component on " + label(k) +
                                     " (degree " + std::to_string(alg.degree(k)) + ", expected " +
                                     std::to_string(alg.degree(i) + alg.degree(j)) + ")");
          rep.grading = false;
        }
        if (c != -alg.structure_constant(j, i, k)) {
          if (rep.antisymmetry)
            rep.violations.push_back("antisymmetry: [" + label(i) + "," + label(j) + "] != -[" + label(j) + "," +
                                     label(i) + "]");
          rep.antisymmetry = false;
        }
      }

  for (int i = 0; i < n && rep.jacobi; ++i)
    for (int j = i + 1; j < n && rep.jacobi; ++j)
      for (int l = j + 1; l < n && rep.jacobi; ++l) {
        VectorXq a = unit(n, i), b = unit(n, j), c = unit(n, l);
        VectorXq s = alg.bracket(a, alg.bracket(b, c));
        s += alg.bracket(b, alg.bracket(c, a));
        s += alg.bracket(c, alg.bracket(a, b));
        for (int k = 0; k < n; ++k)
          if (s(k) != 0) {
            rep.jacobi = false;
            rep.violations.push_back("jacobi: fails for (" + label(i) + "," + label(j) + "," + label(l) + ")");
            break;
          }
      }

  for (int lay = 1; lay < alg.step(); ++lay) {
    const int n1 = alg.layer_dim(1), ni = alg.layer_dim(lay), nn = alg.layer_dim(lay + 1);
    MatrixXq span(nn, n1 * ni);
    int col = 0;
    for (int a = 0; a < n1; ++a)
      for (int b = 0; b < ni; ++b, ++col) {
        VectorXq v = alg.bracket(unit(n, alg.layer_offset(1) + a), unit(n, alg.layer_offset(lay) + b));
        for (int r = 0; r < nn; ++r) span(r, col) = v(alg.layer_offset(lay + 1) + r);
      }
    const int rk = rank(span);
    if (rk < nn) {
      rep.generation = false;
      rep.violations.push_back("generation: [V_1, V_" + std::to_string(lay) + "] spans " + std::to_string(rk) +
                               " of " + std::to_string(nn) + " dimensions of V_" + std::to_string(lay + 1));
    }
  }
  return rep;
}

void require_valid(const StratifiedAlgebra& alg) {
  const auto rep = validate(alg);
  if (rep.valid()) return;
  std::string msg = "not a stratified algebra:";
  for (const auto& v : rep.violations) msg += "\n  " + v;
  throw StructuralError(msg);
}

StratifiedAlgebra abelian(int n) {
  if (n < 1) throw DomainError("abelian: dimension must be positive");
  return StratifiedAlgebra({n}, {}, "abelian:" + std::to_string(n));
}

StratifiedAlgebra heisenberg(int n) {
  if (n < 1) throw DomainError("heisenberg: n must be positive");
  std::vector<BracketSpec> br;
  for (int i = 0; i < n; ++i) br.push_back({i, n + i, {{2 * n, Rational(1)}}});
  return StratifiedAlgebra({2 * n, 1}, br, "heisenberg:" + std::to_string(n));
}

StratifiedAlgebra engel() {
  return StratifiedAlgebra({2, 1, 1}, {{0, 1, {{2, Rational(1)}}}, {0, 2, {{3, Rational(1)}}}}, "engel");
}

StratifiedAlgebra free_step2(int m) {
  if (m < 2) throw DomainError("free_step2: need at least two generators");
  std::vector<BracketSpec> br;
  int k = m;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) br.push_back({a, b, {{k++, Rational(1)}}});
  return StratifiedAlgebra({m, m * (m - 1) / 2}, br, "free_step2:" + std::to_string(m));
}

std::vector<std::string> builtin_names() { return {"abelian:<n>", "heisenberg:<n>", "engel", "free_step2:<m>"}; }

StratifiedAlgebra builtin(std::string_view spec) {
  std::string s(spec);
  std::string base = s, arg;
  if (auto pos = s.find_first_of(":("); pos != std::string::npos) {
    base = s.substr(0, pos);
    arg = s.substr(pos + 1);
    if (s[pos] == '(') {
      if (arg.empty() || arg.back() != ')') throw UsageError("malformed builtin name: " + s);
      arg.pop_back();
    }
  }
  std::transform(base.begin(), base.end(), base.begin(), [](unsigned char c) { return std::tolower(c); });
  auto number = [&](int fallback) {
    if (arg.empty()) {
      if (fallback > 0) return fallback;
      throw UsageError("builtin " + base + " needs a size, e.g. " + base + ":2");
    }
    if (!std::all_of(arg.begin(), arg.end(), [](unsigned char c) { return std::isdigit(c); }))
      throw UsageError("malformed builtin size: " + s);
    return std::stoi(arg);
  };
  if (base == "abelian" || base == "euclidean") return abelian(number(0));
  if (base == "heisenberg") return heisenberg(number(1));
  if (base == "engel") {
    if (!arg.empty()) throw UsageError("engel takes no size");
    return engel();
  }
  if (base == "free_step2") return free_step2(number(0));
  throw UsageError("unknown builtin group '" + s + "'");
}

}  // namespace carnot
