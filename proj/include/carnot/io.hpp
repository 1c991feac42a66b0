#pragma once

#include "carnot/gmt.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace carnot {

using Json = nlohmann::ordered_json;

/// Exact values travel as "p/q" strings; plain JSON numbers are read exactly
/// as the double they denote.
Rational rational_from_json(const Json& j);
Json rational_to_json(const Rational& q);

/// {"name"?, "layers": [n_1, ..], "brackets": [{"i", "j", "coeffs": {"k": c}}]}
/// with 1-based basis indices. Raises UsageError on malformed input.
StratifiedAlgebra algebra_from_json(const Json& j);
Json algebra_to_json(const StratifiedAlgebra& alg);
/// A file path when one exists, otherwise a builtin name.
StratifiedAlgebra load_algebra(const std::string& source);

/// Monomials as {"coef": c, "exp": [e_1, .., e_p]} or [c, e_1, .., e_p].
Polynomial polynomial_from_json(const Json& j, int p);
Json polynomial_to_json(const Polynomial& q);

/// Chart documents:
///   {"type": "builtin", "name": .., "domain"?}
///   {"type": "polynomial", "p": p, "coords": [[monomial, ..] per coordinate], "domain"?}
///   {"type": "graph", "p": p, "f": [monomial, ..], "domain"?}  (t, 0.., f(t))
/// plus an optional "group". The domain defaults to [-1, 1]^p.
Chart chart_from_json(const Json& j, const StratifiedAlgebra& alg);
Chart load_chart(const std::string& source, const StratifiedAlgebra& alg);
/// Group named by a chart document; builtin charts default to heisenberg:1 (segment: abelian:2).
std::string chart_group_hint(const std::string& source);

Json domain_to_json(const Domain& d);
Domain domain_from_json(const Json& j, int p);

Json to_json(const ValidationReport& v);
Json to_json(const DegreeProfile& d);
Json to_json(const Multivector<double>& v);
Json to_json(const CoverReport& c, bool with_centers = false);
Json to_json(const MeasureResult& m);
Json to_json(const MetricFactorResult& m);
Json to_json(const BlowupTrace& t);
Json to_json(const DimEstimate& d);
Json to_json(const CharsetBound& b);
Json to_json(const CharsetExperiment& e);
Json to_json(const VectorXd& v);
Json to_json(const MatrixXd& m);

Json read_json_file(const std::string& path);
/// Two-space indentation and a trailing newline.
void write_json_file(const std::string& path, const Json& j);
/// Header line then one row per pair, values with 17 significant digits.
void write_two_column_csv(const std::string& path, const std::string& a, const std::string& b,
                          const std::vector<std::pair<double, double>>& rows);

}  // namespace carnot
