#include "carnot/manifold.hpp"

#include "carnot/parallel.hpp"

#include <Eigen/SVD>
#include <fmt/format.h>

#include <cmath>
#include <algorithm>
#include <fstream>
#include <numbers>

namespace carnot {

bool Domain::contains(const VectorXd& t, double slack) const {
  if (t.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (t(i) < lo[i] - slack || t(i) > hi[i] + slack) return false;
  return true;
}

double Domain::volume() const {
  double v = 1;
  for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
  return v;
}

namespace {

void check_domain(const Domain& d, int p) {
  if (d.dim() != p || static_cast<int>(d.hi.size()) != p) throw DimensionError("chart domain must have p axes");
  for (int i = 0; i < p; ++i)
    if (!(d.lo[i] < d.hi[i])) throw DomainError("chart domain: lo must be below hi on every axis");
}

}  // namespace

Chart Chart::polynomial(std::vector<Polynomial> coords, Domain domain, std::string name) {
  if (coords.empty()) throw DimensionError("polynomial chart needs at least one coordinate");
  Chart c;
  c.n_ = static_cast<int>(coords.size());
  c.p_ = coords.front().num_vars();
  if (c.p_ < 1) throw DimensionError("polynomial chart needs at least one parameter");
  for (const auto& q : coords)
    if (q.num_vars() != c.p_) throw DimensionError("chart coordinates disagree on the parameter count");
  check_domain(domain, c.p_);
  c.domain_ = std::move(domain);
  c.name_ = std::move(name);
  c.coords_ = std::move(coords);
  for (int l = 0; l < c.n_; ++l)
    for (int i = 0; i < c.p_; ++i) c.jac_polys_.push_back(c.coords_[l].derivative(i));
  return c;
}

Chart Chart::function(int p, int n, MapFn map, JacFn jac, Domain domain, std::string name) {
  if (p < 1 || n < 1) throw DimensionError("function chart needs p, n >= 1");
  if (!map) throw UsageError("function chart needs a map");
  check_domain(domain, p);
  Chart c;
  c.p_ = p;
  c.n_ = n;
  c.domain_ = std::move(domain);
  c.name_ = std::move(name);
  c.map_ = std::move(map);
  c.jac_ = std::move(jac);
  return c;
}

VectorXd Chart::operator()(const VectorXd& t) const {
  if (t.size() != p_) throw DimensionError("chart: wrong parameter count");
  if (is_polynomial()) {
    VectorXd x(n_);
    for (int l = 0; l < n_; ++l) x(l) = coords_[l].eval(t.data());
    return x;
  }
  VectorXd x = map_(t);
  if (x.size() != n_) throw DimensionError("chart map returned the wrong dimension");
  return x;
}

MatrixXd Chart::jacobian(const VectorXd& t) const {
  if (t.size() != p_) throw DimensionError("chart: wrong parameter count");
  MatrixXd j(n_, p_);
  if (is_polynomial()) {
    for (int l = 0; l < n_; ++l)
      for (int i = 0; i < p_; ++i) j(l, i) = jac_polys_[static_cast<std::size_t>(l) * p_ + i].eval(t.data());
    return j;
  }
  if (jac_) {
    j = jac_(t);
    if (j.rows() != n_ || j.cols() != p_) throw DimensionError("chart Jacobian has the wrong shape");
    return j;
  }
  for (int i = 0; i < p_; ++i) {
    const double h = 1e-6 * (1 + std::abs(t(i)));
    VectorXd a = t, b = t;
    a(i) += h;
    b(i) -= h;
    j.col(i) = (map_(a) - map_(b)) / (2 * h);
  }
  return j;
}

VectorXq Chart::eval_exact(const VectorXq& t) const {
  if (!is_polynomial()) throw UsageError("exact evaluation needs a polynomial chart");
  if (t.size() != p_) throw DimensionError("chart: wrong parameter count");
  VectorXq x(n_);
  for (int l = 0; l < n_; ++l) x(l) = coords_[l].eval(t.data());
  return x;
}

MatrixXq Chart::jacobian_exact(const VectorXq& t) const {
  if (!is_polynomial()) throw UsageError("exact Jacobian needs a polynomial chart");
  if (t.size() != p_) throw DimensionError("chart: wrong parameter count");
  MatrixXq j(n_, p_);
  for (int l = 0; l < n_; ++l)
    for (int i = 0; i < p_; ++i) j(l, i) = jac_polys_[static_cast<std::size_t>(l) * p_ + i].eval(t.data());
  return j;
}

Chart Chart::translated(const StratifiedAlgebra& alg, const VectorXq& x) const {
  if (n_ != alg.dim()) throw DimensionError("chart and group dimensions differ");
  check_point(alg, x);
  if (!is_polynomial()) return translated(alg, to_double(x));
  const int n = n_;
  std::vector<Polynomial> subs;
  for (int i = 0; i < n; ++i) subs.push_back(Polynomial::constant(p_, x(i)));
  for (int i = 0; i < n; ++i) subs.push_back(coords_[i]);
  std::vector<Polynomial> out;
  for (int k = 0; k < n; ++k) {
    Polynomial q = Polynomial::constant(p_, x(k)) + coords_[k];
    if (!alg.bch_polynomials()[k].is_zero()) q += alg.bch_polynomials()[k].compose(subs);
    out.push_back(std::move(q));
  }
  return polynomial(std::move(out), domain_, name_ + "-translated");
}

Chart Chart::translated(const StratifiedAlgebra& alg, const VectorXd& x) const {
  check_point(alg, x);
  if (is_polynomial()) {
    VectorXq xq(x.size());
    for (int i = 0; i < x.size(); ++i) xq(i) = rational_from_double(x(i));
    return translated(alg, xq);
  }
  if (n_ != alg.dim()) throw DimensionError("chart and group dimensions differ");
  const Chart base = *this;
  auto map = [alg, x, base](const VectorXd& t) { return bch_product(alg, x, base(t)); };
  auto jac = [alg, x, base](const VectorXd& t) -> MatrixXd {
    return right_factor_jacobian(alg, x, base(t)) * base.jacobian(t);
  };
  return function(p_, n_, map, jac, domain_, name_ + "-translated");
}

Chart Chart::reparametrized(const std::vector<Polynomial>& eta, Domain new_domain) const {
  if (static_cast<int>(eta.size()) != p_) throw DimensionError("reparametrization must have p components");
  const int q = eta.front().num_vars();
  for (const auto& e : eta)
    if (e.num_vars() != q) throw DimensionError("reparametrization components disagree on variables");
  if (is_polynomial()) {
    std::vector<Polynomial> out;
    for (const auto& c : coords_) out.push_back(c.compose(eta));
    return polynomial(std::move(out), std::move(new_domain), name_ + "-reparam");
  }
  const Chart base = *this;
  std::vector<Polynomial> deta;
  for (int k = 0; k < p_; ++k)
    for (int i = 0; i < q; ++i) deta.push_back(eta[k].derivative(i));
  auto eval_eta = [eta](const VectorXd& s) {
    VectorXd t(eta.size());
    for (std::size_t k = 0; k < eta.size(); ++k) t(k) = eta[k].eval(s.data());
    return t;
  };
  auto map = [base, eval_eta](const VectorXd& s) { return base(eval_eta(s)); };
  auto jac = [base, eval_eta, deta, q, p = p_](const VectorXd& s) -> MatrixXd {
    MatrixXd de(p, q);
    for (int k = 0; k < p; ++k)
      for (int i = 0; i < q; ++i) de(k, i) = deta[static_cast<std::size_t>(k) * q + i].eval(s.data());
    return base.jacobian(eval_eta(s)) * de;
  };
  return function(q, n_, map, jac, std::move(new_domain), name_ + "-reparam");
}

Chart Chart::with_domain(Domain d) const {
  check_domain(d, p_);
  Chart c = *this;
  c.domain_ = std::move(d);
  return c;
}

std::vector<std::string> builtin_chart_names() {
  return {"line", "vertical-axis", "transversal-curve", "segment", "plane", "saddle", "half-saddle", "disk"};
}

Chart builtin_chart(const std::string& name, const StratifiedAlgebra& alg) {
  const int n = alg.dim();
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw DimensionError(fmt::format("chart '{}' needs {}", name, what));
  };
  auto v = [](int p, int i) { return Polynomial::variable(p, i); };
  auto zero = [](int p) { return Polynomial(p); };
  auto axis = [&](int p, int i, const Polynomial& q) {
    std::vector<Polynomial> c(n, zero(p));
    c[i] = q;
    return c;
  };
  if (name == "line") return Chart::polynomial(axis(1, 0, v(1, 0)), Domain::cube(1, -1, 1), name);
  if (name == "vertical-axis") return Chart::polynomial(axis(1, n - 1, v(1, 0)), Domain::cube(1, -1, 1), name);
  if (name == "transversal-curve") {
    need(n >= 2, "dimension >= 2");
    auto c = axis(1, 0, v(1, 0));
    c[n - 1] = v(1, 0);
    return Chart::polynomial(c, Domain::cube(1, -1, 1), name);
  }
  if (name == "segment") {
    need(n >= 2, "dimension >= 2");
    auto c = axis(1, 0, v(1, 0));
    c[1] = v(1, 0).scaled(Rational(1, 2));
    return Chart::polynomial(c, Domain::cube(1, -1, 1), name);
  }
  if (name == "plane") {
    need(n >= 2, "dimension >= 2");
    auto c = axis(2, 0, v(2, 0));
    c[1] = v(2, 1);
    return Chart::polynomial(c, Domain::cube(2, -1, 1), name);
  }
  if (name == "saddle" || name == "half-saddle") {
    need(alg.layer_dim(1) >= 2 && n >= 3, "two horizontal directions and a higher coordinate");
    auto c = axis(2, 0, v(2, 0));
    c[1] = v(2, 1);
    Polynomial uv = v(2, 0) * v(2, 1);
    c[n - 1] = name == "saddle" ? uv : uv.scaled(Rational(1, 2));
    return Chart::polynomial(c, Domain::cube(2, -1, 1), name);
  }
  if (name == "disk") {
    need(n >= 2, "dimension >= 2");
    auto map = [n](const VectorXd& t) {
      VectorXd x = VectorXd::Zero(n);
      x(0) = t(0) * std::cos(t(1));
      x(1) = t(0) * std::sin(t(1));
      return x;
    };
    auto jac = [n](const VectorXd& t) {
      MatrixXd j = MatrixXd::Zero(n, 2);
      j(0, 0) = std::cos(t(1));
      j(1, 0) = std::sin(t(1));
      j(0, 1) = -t(0) * std::sin(t(1));
      j(1, 1) = t(0) * std::cos(t(1));
      return j;
    };
    return Chart::function(2, n, map, jac, Domain{{0.0, 0.0}, {1.0, 2 * std::numbers::pi}}, name);
  }
  throw UsageError(fmt::format("unknown chart '{}'", name));
}

namespace {

void check_chart(const StratifiedAlgebra& alg, const Chart& chart) {
  if (chart.n() != alg.dim()) throw DimensionError("chart and group dimensions differ");
  if (chart.p() > alg.dim()) throw DimensionError("chart dimension exceeds the group dimension");
}

int numeric_rank(const MatrixXd& j, double rank_tol) {
  Eigen::JacobiSVD<MatrixXd> svd(j);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rank_tol * s(0)) ++r;
  return r;
}

}  // namespace

TangentData<double> tangent_data(const StratifiedAlgebra& alg, const Chart& chart, const VectorXd& t) {
  check_chart(alg, chart);
  TangentData<double> d;
  d.x = chart(t);
  d.jacobian = chart.jacobian(t);
  d.frame_coeffs = solve_unit_lower(frame_matrix(alg, d.x), d.jacobian);
  return d;
}

TangentData<Rational> tangent_data_exact(const StratifiedAlgebra& alg, const Chart& chart, const VectorXq& t) {
  check_chart(alg, chart);
  TangentData<Rational> d;
  d.x = chart.eval_exact(t);
  d.jacobian = chart.jacobian_exact(t);
  d.frame_coeffs = solve_unit_lower(frame_matrix(alg, d.x), d.jacobian);
  return d;
}

Multivector<double> tangent_multivector(const StratifiedAlgebra& alg, const Chart& chart, const VectorXd& t,
                                        double rank_tol) {
  const auto d = tangent_data(alg, chart, t);
  if (numeric_rank(d.jacobian, rank_tol) < chart.p()) throw SingularPointError("chart Jacobian is rank deficient");
  return wedge(d.frame_coeffs);
}

Multivector<Rational> tangent_multivector_exact(const StratifiedAlgebra& alg, const Chart& chart, const VectorXq& t) {
  const auto d = tangent_data_exact(alg, chart, t);
  if (rank(d.jacobian) < chart.p()) throw SingularPointError("chart Jacobian is rank deficient");
  return wedge(d.frame_coeffs);
}

int pointwise_degree(const StratifiedAlgebra& alg, const Chart& chart, const VectorXd& t, double rel_tol) {
  return multivector_degree(alg, tangent_multivector(alg, chart, t), rel_tol);
}

int pointwise_degree_exact(const StratifiedAlgebra& alg, const Chart& chart, const VectorXq& t) {
  return multivector_degree(alg, tangent_multivector_exact(alg, chart, t));
}

NormalForm<double> normal_form(const StratifiedAlgebra& alg, const Chart& chart, const VectorXd& t, double rel_tol) {
  const auto d = tangent_data(alg, chart, t);
  if (numeric_rank(d.jacobian, kDefaultRankTol) < chart.p())
    throw SingularPointError("chart Jacobian is rank deficient");
  return graded_echelon(alg, d.frame_coeffs, rel_tol);
}

NormalForm<Rational> normal_form_exact(const StratifiedAlgebra& alg, const Chart& chart, const VectorXq& t) {
  const auto d = tangent_data_exact(alg, chart, t);
  auto nf = graded_echelon(alg, d.frame_coeffs, 0.0);
  if (nf.degree != multivector_degree(alg, wedge(d.frame_coeffs)))
    throw Error("normal form degree disagrees with the multivector degree");
  return nf;
}

std::string to_string(PointClass c) {
  switch (c) {
    case PointClass::transversal: return "transversal";
    case PointClass::A: return "A";
    case PointClass::B: return "B";
    case PointClass::singular: return "singular";
  }
  return "?";
}

PointClass classify_point(const StratifiedAlgebra& alg, const DegreeProfile& profile, const std::vector<int>& alpha) {
  if (static_cast<int>(alpha.size()) != alg.step()) throw DimensionError("classify_point: alpha needs one entry per layer");
  int deg = 0, total = 0;
  for (int k = 1; k <= alg.step(); ++k) {
    deg += k * alpha[k - 1];
    total += alpha[k - 1];
  }
  if (total != profile.p) throw DimensionError("classify_point: alpha does not sum to p");
  if (deg == profile.max_degree) return PointClass::transversal;
  for (int j = profile.ell + 1; j <= alg.step(); ++j)
    if (alpha[j - 1] < alg.layer_dim(j)) return PointClass::A;
  return PointClass::B;
}

std::vector<CharSample> CharsetSampling::characteristic() const {
  std::vector<CharSample> out;
  for (const auto& s : samples)
    if (s.cls == PointClass::A || s.cls == PointClass::B) out.push_back(s);
  return out;
}

std::vector<VectorXd> parameter_grid(const Domain& domain, int m) {
  if (m < 2) throw DomainError("parameter grid needs at least 2 points per axis");
  const int p = domain.dim();
  std::size_t total = 1;
  for (int i = 0; i < p; ++i) total *= static_cast<std::size_t>(m);
  std::vector<VectorXd> out;
  out.reserve(total);
  std::vector<int> idx(p, 0);
  for (std::size_t c = 0; c < total; ++c) {
    VectorXd t(p);
    for (int i = 0; i < p; ++i) t(i) = domain.lo[i] + (domain.hi[i] - domain.lo[i]) * idx[i] / (m - 1);
    out.push_back(std::move(t));
    for (int i = p - 1; i >= 0; --i) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
  }
  return out;
}

CharsetSampling sample_characteristic_set(const StratifiedAlgebra& alg, const Chart& chart, int m,
                                          const SampleOptions& options) {
  check_chart(alg, chart);
  if (options.exact && !chart.is_polynomial()) throw UsageError("exact sampling needs a polynomial chart");
  const auto profile = degree_profile(alg, chart.p());
  const auto grid = parameter_grid(chart.domain(), m);
  CharsetSampling out;
  out.samples.resize(grid.size());
  const Domain& dom = chart.domain();
  const std::size_t per = 256;
  const int chunks = static_cast<int>((grid.size() + per - 1) / per);
  parallel_chunks(chunks, [&](int c) {
    const std::size_t begin = static_cast<std::size_t>(c) * per, end = std::min(grid.size(), begin + per);
    for (std::size_t g = begin; g < end; ++g) {
      CharSample s;
      s.t = grid[g];
      s.x = chart(s.t);
      try {
        if (options.exact) {
          // Grid coordinates taken exactly as lo + (hi - lo) i / (m - 1).
          VectorXq tq(chart.p());
          std::size_t rem = g;
          for (int i = chart.p() - 1; i >= 0; --i) {
            const long k = static_cast<long>(rem % static_cast<std::size_t>(m));
            rem /= static_cast<std::size_t>(m);
            const Rational lo = rational_from_double(dom.lo[i]), hi = rational_from_double(dom.hi[i]);
            tq(i) = lo + (hi - lo) * Rational(k) / Rational(m - 1);
          }
          const auto nf = normal_form_exact(alg, chart, tq);
          if (rank(chart.jacobian_exact(tq)) < chart.p()) throw SingularPointError("rank deficient");
          s.degree = nf.degree;
          s.cls = classify_point(alg, profile, nf);
        } else {
          const auto nf = normal_form(alg, chart, s.t, options.rel_tol);
          s.degree = nf.degree;
          s.cls = classify_point(alg, profile, nf);
        }
      } catch (const SingularPointError&) {
        s.degree = -1;
        s.cls = PointClass::singular;
      }
      out.samples[g] = std::move(s);
    }
  });
  for (const auto& s : out.samples) {
    switch (s.cls) {
      case PointClass::transversal: ++out.transversal; break;
      case PointClass::A: ++out.class_a; break;
      case PointClass::B: ++out.class_b; break;
      case PointClass::singular: ++out.singular; break;
    }
  }
  return out;
}

void write_samples_csv(const std::string& path, const std::vector<CharSample>& samples) {
  std::ofstream f(path);
  if (!f) throw UsageError(fmt::format("cannot write '{}'", path));
  if (samples.empty()) return;
  const int p = static_cast<int>(samples.front().t.size()), n = static_cast<int>(samples.front().x.size());
  for (int i = 0; i < p; ++i) f << "t" << (i + 1) << ",";
  for (int i = 0; i < n; ++i) f << "x" << (i + 1) << ",";
  f << "degree,class\n";
  for (const auto& s : samples) {
    for (int i = 0; i < p; ++i) f << fmt::format("{:.17g},", s.t(i));
    for (int i = 0; i < n; ++i) f << fmt::format("{:.17g},", s.x(i));
    f << s.degree << "," << to_string(s.cls) << "\n";
  }
}

}  // namespace carnot
