#include "carnot/io.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace carnot {

Rational rational_from_json(const Json& j) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number()) return parse_rational(j.dump());
  } catch (const StructuralError& e) {
    throw UsageError(e.what());
  }
  throw UsageError("expected a number or a rational string, got " + j.dump());
}

Json rational_to_json(const Rational& q) { return to_string(q); }

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw UsageError(fmt::format("missing key '{}'", key));
  return j.at(key);
}

int as_int(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw UsageError(fmt::format("'{}' must be an integer", what));
  return j.get<int>();
}

}  // namespace

StratifiedAlgebra algebra_from_json(const Json& j) {
  if (!j.is_object()) throw UsageError("group document must be an object");
  const Json& lj = require(j, "layers");
  if (!lj.is_array() || lj.empty()) throw UsageError("'layers' must be a nonempty array");
  std::vector<int> layers;
  for (const auto& v : lj) layers.push_back(as_int(v, "layers"));
  std::vector<BracketSpec> brackets;
  if (j.contains("brackets")) {
    if (!j["brackets"].is_array()) throw UsageError("'brackets' must be an array");
    for (const auto& b : j["brackets"]) {
      BracketSpec s;
      s.i = as_int(require(b, "i"), "i") - 1;
      s.j = as_int(require(b, "j"), "j") - 1;
      const Json& c = require(b, "coeffs");
      if (!c.is_object()) throw UsageError("'coeffs' must map basis indices to coefficients");
      for (const auto& [k, v] : c.items()) {
        int idx = 0;
        try {
          std::size_t pos = 0;
          idx = std::stoi(k, &pos);
          if (pos != k.size()) throw std::invalid_argument(k);
        } catch (const std::exception&) {
          throw UsageError(fmt::format("bad basis index '{}' in coeffs", k));
        }
        s.coeffs[idx - 1] = rational_from_json(v);
      }
      brackets.push_back(std::move(s));
    }
  }
  try {
    return StratifiedAlgebra(layers, brackets, j.value("name", std::string("custom")));
  } catch (const StructuralError& e) {
    throw UsageError(e.what());
  }
}

Json algebra_to_json(const StratifiedAlgebra& alg) {
  Json j;
  j["name"] = alg.name();
  j["layers"] = alg.layer_dims();
  Json br = Json::array();
  const int n = alg.dim();
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) {
      Json c = Json::object();
      for (int l = 0; l < n; ++l)
        if (alg.structure_constant(i, k, l) != 0) c[std::to_string(l + 1)] = rational_to_json(alg.structure_constant(i, k, l));
      if (!c.empty()) br.push_back(Json{{"i", i + 1}, {"j", k + 1}, {"coeffs", c}});
    }
  j["brackets"] = br;
  return j;
}

StratifiedAlgebra load_algebra(const std::string& source) {
  if (std::filesystem::is_regular_file(source)) return algebra_from_json(read_json_file(source));
  return builtin(source);
}

Polynomial polynomial_from_json(const Json& j, int p) {
  if (!j.is_array()) throw UsageError("polynomial must be a list of monomials");
  std::map<Polynomial::Exponents, Rational> terms;
  for (const auto& m : j) {
    Rational c;
    std::vector<int> e;
    if (m.is_object()) {
      c = rational_from_json(require(m, "coef"));
      const Json& ej = require(m, "exp");
      if (!ej.is_array()) throw UsageError("'exp' must be an array");
      for (const auto& v : ej) e.push_back(as_int(v, "exp"));
    } else if (m.is_array() && !m.empty()) {
      c = rational_from_json(m[0]);
      for (std::size_t k = 1; k < m.size(); ++k) e.push_back(as_int(m[k], "exponent"));
    } else {
      throw UsageError("monomial must be {coef, exp} or [coef, e1, ..]");
    }
    if (static_cast<int>(e.size()) != p) throw UsageError(fmt::format("monomial needs {} exponents", p));
    for (int v : e)
      if (v < 0) throw UsageError("exponents must be nonnegative");
    terms[e] += c;
  }
  std::erase_if(terms, [](const auto& t) { return t.second == 0; });
  return Polynomial(p, std::move(terms));
}

Json polynomial_to_json(const Polynomial& q) {
  Json out = Json::array();
  for (const auto& [e, c] : q.terms()) out.push_back(Json{{"coef", rational_to_json(c)}, {"exp", e}});
  return out;
}

Json domain_to_json(const Domain& d) {
  Json out = Json::array();
  for (int i = 0; i < d.dim(); ++i) out.push_back(Json::array({d.lo[i], d.hi[i]}));
  return out;
}

Domain domain_from_json(const Json& j, int p) {
  if (!j.is_array() || static_cast<int>(j.size()) != p) throw UsageError(fmt::format("domain needs {} intervals", p));
  Domain d;
  for (const auto& iv : j) {
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
      throw UsageError("domain intervals must be [lo, hi]");
    d.lo.push_back(iv[0].get<double>());
    d.hi.push_back(iv[1].get<double>());
  }
  return d;
}

Chart chart_from_json(const Json& j, const StratifiedAlgebra& alg) {
  if (!j.is_object()) throw UsageError("chart document must be an object");
  const std::string type = j.value("type", std::string("polynomial"));
  const int n = alg.dim();
  try {
    if (type == "builtin") {
      Chart c = builtin_chart(require(j, "name").get<std::string>(), alg);
      if (j.contains("domain")) c = c.with_domain(domain_from_json(j["domain"], c.p()));
      return c;
    }
    const int p = as_int(require(j, "p"), "p");
    if (p < 1 || p > n) throw UsageError("chart dimension p must lie in [1, n]");
    const Domain dom = j.contains("domain") ? domain_from_json(j["domain"], p) : Domain::cube(p, -1, 1);
    const std::string name = j.value("name", type);
    if (type == "polynomial") {
      const Json& cj = require(j, "coords");
      if (!cj.is_array() || static_cast<int>(cj.size()) != n)
        throw UsageError(fmt::format("'coords' needs {} polynomials", n));
      std::vector<Polynomial> coords;
      for (const auto& q : cj) coords.push_back(polynomial_from_json(q, p));
      return Chart::polynomial(std::move(coords), dom, name);
    }
    if (type == "graph") {
      if (p >= n) throw UsageError("graph charts need p < n");
      std::vector<Polynomial> coords(n, Polynomial(p));
      for (int i = 0; i < p; ++i) coords[i] = Polynomial::variable(p, i);
      coords[n - 1] = polynomial_from_json(require(j, "f"), p);
      return Chart::polynomial(std::move(coords), dom, name);
    }
  } catch (const DimensionError& e) {
    throw UsageError(e.what());
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  } catch (const Json::exception& e) {
    throw UsageError(e.what());
  }
  throw UsageError(fmt::format("unknown chart type '{}'", type));
}

Chart load_chart(const std::string& source, const StratifiedAlgebra& alg) {
  if (std::filesystem::is_regular_file(source)) return chart_from_json(read_json_file(source), alg);
  return builtin_chart(source, alg);
}

std::string chart_group_hint(const std::string& source) {
  if (!std::filesystem::is_regular_file(source)) {
    const auto names = builtin_chart_names();
    if (std::find(names.begin(), names.end(), source) == names.end()) return {};
    return source == "segment" ? "abelian:2" : "heisenberg:1";
  }
  const Json j = read_json_file(source);
  return j.is_object() && j.contains("group") && j["group"].is_string() ? j["group"].get<std::string>() : std::string();
}

Json to_json(const VectorXd& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const MatrixXd& m) {
  Json out = Json::array();
  for (int i = 0; i < m.rows(); ++i) out.push_back(to_json(VectorXd(m.row(i).transpose())));
  return out;
}

Json to_json(const ValidationReport& v) {
  return Json{{"grading", v.grading},     {"antisymmetry", v.antisymmetry}, {"jacobi", v.jacobi},
              {"generation", v.generation}, {"valid", v.valid()},           {"violations", v.violations}};
}

Json to_json(const DegreeProfile& d) {
  return Json{{"p", d.p}, {"ell", d.ell}, {"r_p", d.r_p}, {"D", d.max_degree}, {"sigma", d.sigma}};
}

Json to_json(const Multivector<double>& v) {
  Json out = Json::object();
  for (const auto& [a, c] : v.coeffs()) out[multi_index_key(a)] = c;
  return out;
}

Json to_json(const CoverReport& c, bool with_centers) {
  Json out{{"r", c.r}, {"K", c.k}, {"count", c.count}, {"cover_radius", c.cover_radius}};
  if (with_centers) out["centers"] = c.centers;
  return out;
}

Json to_json(const MeasureResult& m) {
  Json out{{"value", m.value}, {"estimator", to_string(m.estimator)}, {"samples", m.samples}};
  if (m.estimator == Estimator::monte_carlo) out["std_error"] = m.std_error;
  return out;
}

Json to_json(const MetricFactorResult& m) {
  Json out{{"value", m.value}, {"method", m.method}, {"samples", m.samples}};
  if (m.method == "monte-carlo") out["std_error"] = m.std_error;
  return out;
}

Json to_json(const BlowupTrace& t) {
  Json steps = Json::array();
  for (const auto& s : t.steps)
    steps.push_back(Json{{"r", s.r},
                         {"density_ratio", s.density_ratio},
                         {"hausdorff", s.hausdorff},
                         {"half_width", s.half_width},
                         {"in_ball", s.in_ball},
                         {"clipped_by_domain", s.clipped_by_domain}});
  return Json{{"t0", to_json(t.t0)},
              {"x", to_json(t.x)},
              {"degree", t.degree},
              {"subdegrees", t.subdegrees},
              {"transform", to_json(t.transform)},
              {"subgroup_basis", to_json(t.subgroup_basis)},
              {"requires_row_permutation", t.requires_row_permutation},
              {"theta", t.theta},
              {"projected_norm", t.projected_norm},
              {"predicted_limit", t.predicted_limit},
              {"steps", steps}};
}

Json to_json(const DimEstimate& d) {
  return Json{{"scales", d.scales},       {"counts", d.counts},     {"slope", d.slope},
              {"intercept", d.intercept}, {"half_width", d.half_width}, {"residual", d.residual}};
}

Json to_json(const CharsetBound& b) {
  return Json{{"p", b.p},
              {"ell", b.ell},
              {"D", b.max_degree},
              {"lambda", rational_to_json(b.lambda)},
              {"case", b.case_id},
              {"value", rational_to_json(b.value)},
              {"value_float", b.value_d()}};
}

Json to_json(const CharsetExperiment& e) {
  Json out{{"empty", e.empty}};
  if (e.empty) {
    out["notice"] = e.notice;
    return out;
  }
  Json pts = Json::array();
  for (const auto& c : e.points)
    pts.push_back(Json{{"t", to_json(c.t)},
                       {"x", to_json(c.x)},
                       {"H", c.h},
                       {"samples_in_ball", c.samples_in_ball},
                       {"count", c.count}});
  out.update(Json{{"class", to_string(e.cls)},
                  {"ell", e.ell},
                  {"eps", e.eps},
                  {"r", e.r},
                  {"theta", e.theta},
                  {"lambda", e.lambda},
                  {"exponent", e.exponent},
                  {"ceiling", e.ceiling},
                  {"max_count", e.max_count},
                  {"fitted_constant", e.fitted_constant},
                  {"points", pts}});
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError(fmt::format("cannot read '{}'", path));
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw UsageError(fmt::format("malformed JSON in '{}': {}", path, e.what()));
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw UsageError(fmt::format("cannot write '{}'", path));
  f << j.dump(2) << "\n";
}

void write_two_column_csv(const std::string& path, const std::string& a, const std::string& b,
                          const std::vector<std::pair<double, double>>& rows) {
  std::ofstream f(path);
  if (!f) throw UsageError(fmt::format("cannot write '{}'", path));
  f << a << "," << b << "\n";
  for (const auto& [x, y] : rows) f << fmt::format("{:.17g},{:.17g}\n", x, y);
}

}  // namespace carnot
