#include "carnot/io.hpp"
#include "carnot/parallel.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace carnot;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kUsage = 2, kAudit = 3 };

// One configurable option: bound to a CLI flag and to a config key.
struct Param {
  std::string key;
  CLI::Option* opt;
  std::function<Json()> get;
  std::function<void(const Json&)> set;
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  std::vector<Param> params;
  std::function<int(const Json&, Json&, std::map<std::string, std::string>&, std::ostream&)> run;
};

template <typename T>
void add(Command& c, const std::string& key, T& var, const std::string& help, const std::string& extra_names = "") {
  auto* o = c.app->add_option("--" + key + extra_names, var, help)->capture_default_str();
  c.params.push_back({key, o, [&var] { return Json(var); }, [&var, key](const Json& j) {
                        try {
                          var = j.get<T>();
                        } catch (const Json::exception&) {
                          throw UsageError(fmt::format("config key '{}' has the wrong type", key));
                        }
                      }});
}

void add_flag(Command& c, const std::string& key, bool& var, const std::string& help) {
  auto* o = c.app->add_flag("--" + key, var, help);
  c.params.push_back({key, o, [&var] { return Json(var); }, [&var, key](const Json& j) {
                        if (!j.is_boolean()) throw UsageError(fmt::format("config key '{}' must be a boolean", key));
                        var = j.get<bool>();
                      }});
}

std::vector<double> parse_list(const std::string& s, char sep) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("bad number '{}' in '{}'", item, s));
    }
  }
  return out;
}

std::vector<double> parse_radii(const std::string& s, int k) {
  const auto v = parse_list(s, ':');
  if (v.size() != 2) throw UsageError(fmt::format("--radii expects lo:hi, got '{}'", s));
  return log_spaced(v[0], v[1], k);
}

std::vector<double> descending(std::vector<double> r) {
  std::sort(r.begin(), r.end(), std::greater<>());
  return r;
}

// Shared state of every subcommand.
struct Common {
  std::string group;
  std::string chart;
  std::string weights;
  std::uint64_t seed = 0;
};

StratifiedAlgebra resolve_group(const Common& c) {
  std::string g = c.group;
  if (g.empty() && !c.chart.empty()) g = chart_group_hint(c.chart);
  if (g.empty()) throw UsageError("--group is required");
  return load_algebra(g);
}

HomogeneousQuasiNorm make_norm(const StratifiedAlgebra& alg, const Common& c) {
  std::vector<double> w;
  if (!c.weights.empty()) w = parse_list(c.weights, ',');
  return HomogeneousQuasiNorm(alg, w);
}

Chart resolve_chart(const Common& c, const StratifiedAlgebra& alg) {
  if (c.chart.empty()) throw UsageError("--chart is required");
  return load_chart(c.chart, alg);
}

Domain parse_region(const std::string& s, const Chart& chart) {
  if (s.empty()) return chart.domain();
  Domain d;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_list(item, ':');
    if (v.size() != 2) throw UsageError(fmt::format("--region expects lo:hi per axis, got '{}'", s));
    d.lo.push_back(v[0]);
    d.hi.push_back(v[1]);
  }
  if (d.dim() != chart.p()) throw UsageError("--region needs one interval per chart parameter");
  return d;
}

std::string fixed(double v) { return fmt::format("{:.6g}", v); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on submanifolds of Carnot groups"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  int threads = 0;
  std::string out_dir, config_path;
  bool print_json = false;

  std::vector<Command> commands;
  commands.reserve(6);
  auto make = [&](const std::string& name, const std::string& help) -> Command& {
    commands.push_back(Command{name, app.add_subcommand(name, help), {}, {}});
    Command& c = commands.back();
    add(c, "group", common.group, "builtin name (heisenberg:1, engel, ..) or group JSON file", ",--builtin");
    add(c, "seed", common.seed, "seed for every stochastic step");
    add(c, "weights", common.weights, "quasi-norm layer weights, comma separated");
    c.app->add_option("--threads", threads, "worker thread cap (0: all cores)");
    c.app->add_option("--out", out_dir, "directory for JSON and CSV outputs");
    c.app->add_option("--config", config_path, "JSON config; explicit flags take precedence");
    c.app->add_flag("--json", print_json, "print the JSON document to stdout");
    return c;
  };
  auto add_chart = [&](Command& c) { add(c, "chart", common.chart, "builtin chart name or chart JSON file"); };

  // group
  {
    Command& c = make("group", "structure of a stratified group and its D(p) table");
    c.run = [&](const Json&, Json& res, std::map<std::string, std::string>&, std::ostream& os) {
      const auto alg = resolve_group(common);
      const auto v = validate(alg);
      res["algebra"] = algebra_to_json(alg);
      res["n"] = alg.dim();
      res["step"] = alg.step();
      res["homogeneous_dimension"] = alg.homogeneous_dimension();
      Json prof = Json::array(), dlist = Json::array();
      for (int p = 1; p <= alg.dim(); ++p) {
        const auto d = degree_profile(alg, p);
        prof.push_back(to_json(d));
        dlist.push_back(d.max_degree);
      }
      res["D"] = dlist;
      res["profiles"] = prof;
      res["validation"] = to_json(v);
      os << fmt::format("group {}: n = {}, step = {}, layers = [{}], Q = {}\n", alg.name(), alg.dim(), alg.step(),
                        fmt::join(alg.layer_dims(), ", "), alg.homogeneous_dimension());
      os << fmt::format("D = [{}]\n", fmt::join(dlist.get<std::vector<int>>(), ", "));
      os << "  p  ell  r_p  D(p)\n";
      for (const auto& d : prof)
        os << fmt::format("{:>3}{:>5}{:>5}{:>6}\n", d["p"].get<int>(), d["ell"].get<int>(), d["r_p"].get<int>(),
                          d["D"].get<int>());
      if (v.valid()) {
        os << "validation: ok\n";
        return kOk;
      }
      os << "validation: FAILED\n";
      for (const auto& s : v.violations) os << "  " << s << "\n";
      return kUsage;
    };
  }

  // degree
  int grid = 41;
  double tol = kDefaultDegreeTol;
  bool exact = false;
  {
    Command& c = make("degree", "pointwise degree and characteristic set on a parameter grid");
    add_chart(c);
    add(c, "grid", grid, "grid points per parameter axis");
    add(c, "tol", tol, "relative degree threshold (float mode)");
    add_flag(c, "exact", exact, "exact rational degrees (polynomial charts)");
    c.run = [&](const Json&, Json& res, std::map<std::string, std::string>& csv, std::ostream& os) {
      const auto alg = resolve_group(common);
      const auto chart = resolve_chart(common, alg);
      SampleOptions so;
      so.rel_tol = tol;
      so.exact = exact;
      const auto s = sample_characteristic_set(alg, chart, grid, so);
      const auto prof = degree_profile(alg, chart.p());
      res["profile"] = to_json(prof);
      res["samples"] = s.samples.size();
      res["counts"] = Json{{"transversal", s.transversal}, {"A", s.class_a}, {"B", s.class_b}, {"singular", s.singular}};
      csv["samples.csv"] = "samples";
      if (!out_dir.empty()) write_samples_csv((std::filesystem::path(out_dir) / "samples.csv").string(), s.samples);
      os << fmt::format("{} samples, D(p) = {}: transversal {}, A {}, B {}, singular {}\n", s.samples.size(),
                        prof.max_degree, s.transversal, s.class_a, s.class_b, s.singular);
      return kOk;
    };
  }

  // blowup
  std::string t0_text, radii_blowup = "1e-1:1e-3";
  int scales_blowup = 8, points_blowup = 0;
  double audit_tol = 0.05;
  {
    Command& c = make("blowup", "blow-up density and set convergence at a transversal point");
    add_chart(c);
    add(c, "t0", t0_text, "base parameter, comma separated (default: domain center)");
    add(c, "radii", radii_blowup, "lo:hi, log spaced");
    add(c, "scales", scales_blowup, "number of radii");
    add(c, "points", points_blowup, "grid nodes per axis (0: automatic)");
    add(c, "tol", audit_tol, "audit tolerance on the density ratio");
    c.run = [&](const Json&, Json& res, std::map<std::string, std::string>& csv, std::ostream& os) {
      const auto alg = resolve_group(common);
      const auto norm = make_norm(alg, common);
      const auto chart = resolve_chart(common, alg);
      VectorXd t0(chart.p());
      if (t0_text.empty()) {
        for (int i = 0; i < chart.p(); ++i) t0(i) = 0.5 * (chart.domain().lo[i] + chart.domain().hi[i]);
      } else {
        const auto v = parse_list(t0_text, ',');
        if (static_cast<int>(v.size()) != chart.p()) throw UsageError("--t0 needs one value per chart parameter");
        for (int i = 0; i < chart.p(); ++i) t0(i) = v[i];
      }
      BlowupOptions bo;
      bo.points_per_axis = points_blowup;
      const auto tr = blowup_trace(norm, chart, t0, descending(parse_radii(radii_blowup, scales_blowup)), bo);
      res["trace"] = to_json(tr);
      std::vector<std::pair<double, double>> dens, haus;
      for (const auto& s : tr.steps) {
        dens.emplace_back(s.r, s.density_ratio);
        haus.emplace_back(s.r, s.hausdorff);
      }
      // Audit: last-decade oscillation and agreement with the predicted limit.
      const double rmin = tr.steps.back().r;
      double lo = std::numeric_limits<double>::infinity(), hi = 0;
      for (const auto& s : tr.steps)
        if (s.r <= 10 * rmin * (1 + 1e-12)) {
          lo = std::min(lo, s.density_ratio);
          hi = std::max(hi, s.density_ratio);
        }
      const double spread = (hi - lo) / tr.predicted_limit;
      const double err = std::abs(tr.steps.back().density_ratio - tr.predicted_limit) / tr.predicted_limit;
      const bool pass = spread < audit_tol && err < audit_tol;
      res["audit"] = Json{{"last_decade_spread", spread}, {"limit_error", err}, {"tol", audit_tol}, {"pass", pass}};
      if (!out_dir.empty()) {
        write_two_column_csv((std::filesystem::path(out_dir) / "blowup_density.csv").string(), "r", "density_ratio", dens);
        write_two_column_csv((std::filesystem::path(out_dir) / "blowup_hausdorff.csv").string(), "r", "hausdorff", haus);
      }
      csv["blowup_density.csv"] = csv["blowup_hausdorff.csv"] = "trace";
      os << fmt::format("degree {} at x = [{}], predicted limit {}\n", tr.degree,
                        fmt::join(std::vector<double>(tr.x.data(), tr.x.data() + tr.x.size()), ", "),
                        fixed(tr.predicted_limit));
      os << "         r   density     hausdorff\n";
      for (const auto& s : tr.steps)
        os << fmt::format("{:>10.3e}{:>10}{:>14.4e}\n", s.r, fixed(s.density_ratio), s.hausdorff);
      os << fmt::format("audit: spread {} limit error {} -> {}\n", fixed(spread), fixed(err), pass ? "pass" : "FAIL");
      return pass ? kOk : kAudit;
    };
  }

  // measure
  std::string kind = "intrinsic", estimator = "quadrature", region, metric_path;
  std::size_t samples = 200000;
  int points_measure = 0, degree = -1;
  {
    Command& c = make("measure", "intrinsic or Riemannian measure of a chart");
    add_chart(c);
    add(c, "kind", kind, "intrinsic | riemannian | both");
    add(c, "estimator", estimator, "quadrature | monte-carlo");
    add(c, "samples", samples, "Monte Carlo samples");
    add(c, "points", points_measure, "quadrature nodes per axis (0: automatic)");
    add(c, "degree", degree, "projection degree D (-1: D(p))");
    add(c, "region", region, "lo:hi per axis, comma separated (default: chart domain)");
    add(c, "metric", metric_path, "auxiliary metric JSON {\"g\": [[..]], \"frame\": \"left-invariant\"|\"coordinates\"}");
    c.run = [&](const Json&, Json& res, std::map<std::string, std::string>&, std::ostream& os) {
      const auto alg = resolve_group(common);
      const auto chart = resolve_chart(common, alg);
      const Domain dom = parse_region(region, chart);
      IntegrationOptions io;
      if (estimator == "monte-carlo") io.estimator = Estimator::monte_carlo;
      else if (estimator != "quadrature") throw UsageError("--estimator must be quadrature or monte-carlo");
      io.samples = samples;
      io.points_per_axis = points_measure;
      io.seed = common.seed;
      AuxiliaryMetric metric;
      if (!metric_path.empty()) {
        const Json mj = read_json_file(metric_path);
        const Json& g = mj.at("g");
        metric.g.resize(static_cast<int>(g.size()), static_cast<int>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i)
          for (std::size_t k = 0; k < g.size(); ++k) metric.g(static_cast<int>(i), static_cast<int>(k)) = g.at(i).at(k).get<double>();
        const std::string fr = mj.value("frame", std::string("left-invariant"));
        if (fr == "coordinates") metric.frame = MetricFrame::coordinates;
        else if (fr != "left-invariant") throw UsageError("metric frame must be left-invariant or coordinates");
      }
      if (kind != "intrinsic" && kind != "riemannian" && kind != "both")
        throw UsageError("--kind must be intrinsic, riemannian or both");
      if (kind != "riemannian") {
        const auto m = intrinsic_measure(alg, chart, dom, degree, io);
        res["intrinsic"] = to_json(m);
        os << fmt::format("intrinsic measure {} ({}", fixed(m.value), to_string(m.estimator));
        os << (m.estimator == Estimator::monte_carlo ? fmt::format(", se {})\n", fixed(m.std_error)) : std::string(")\n"));
      }
      if (kind != "intrinsic") {
        const auto m = riemannian_measure(alg, chart, dom, metric, io);
        res["riemannian"] = to_json(m);
        os << fmt::format("riemannian measure {} ({}", fixed(m.value), to_string(m.estimator));
        os << (m.estimator == Estimator::monte_carlo ? fmt::format(", se {})\n", fixed(m.std_error)) : std::string(")\n"));
      }
      return kOk;
    };
  }

  // dimension
  std::string radii_dim = "0.25:0.0025", region_dim;
  int scales_dim = 8, points_dim = 0;
  double expect = -1, dim_tol = 0.15;
  {
    Command& c = make("dimension", "box-counting dimension of a sampled chart");
    add_chart(c);
    add(c, "radii", radii_dim, "lo:hi, log spaced");
    add(c, "scales", scales_dim, "number of scales");
    add(c, "points", points_dim, "samples per parameter axis (0: automatic)");
    add(c, "region", region_dim, "lo:hi per axis (default: chart domain)");
    add(c, "expect", expect, "expected slope for the audit (negative: no audit)");
    add(c, "tol", dim_tol, "audit tolerance on the slope");
    c.run = [&](const Json&, Json& res, std::map<std::string, std::string>& csv, std::ostream& os) {
      const auto alg = resolve_group(common);
      const auto norm = make_norm(alg, common);
      const auto chart = resolve_chart(common, alg);
      const Domain dom = parse_region(region_dim, chart);
      const int m = points_dim > 0 ? points_dim : (chart.p() == 1 ? 1000001 : 1001);
      const auto pts = chart_point_cloud(chart, dom, m);
      const auto est = box_dimension(norm, pts, descending(parse_radii(radii_dim, scales_dim)));
      res["estimate"] = to_json(est);
      res["points"] = pts.cols();
      std::vector<std::pair<double, double>> rows;
      for (std::size_t i = 0; i < est.scales.size(); ++i) rows.emplace_back(est.scales[i], static_cast<double>(est.counts[i]));
      if (!out_dir.empty()) write_two_column_csv((std::filesystem::path(out_dir) / "dimension.csv").string(), "r", "count", rows);
      csv["dimension.csv"] = "estimate";
      os << "         r     count\n";
      for (const auto& [r, n] : rows) os << fmt::format("{:>10.3e}{:>10}\n", r, static_cast<std::size_t>(n));
      os << fmt::format("slope {} +- {} (95%), residual {}\n", fixed(est.slope), fixed(est.half_width), fixed(est.residual));
      if (expect < 0) return kOk;
      const bool pass = std::abs(est.slope - expect) <= dim_tol;
      res["audit"] = Json{{"expect", expect}, {"tol", dim_tol}, {"pass", pass}};
      os << fmt::format("audit: |slope - {}| <= {} -> {}\n", expect, dim_tol, pass ? "pass" : "FAIL");
      return pass ? kOk : kAudit;
    };
  }

  // charset
  bool bound = false;
  std::string lambda = "1", radii_cs = "1e-1:1e-3";
  int p_bound = 1, scales_cs = 3, grid_cs = 41;
  double eps = 0.5;
  {
    Command& c = make("charset", "characteristic-set dimension bound or covering experiment");
    add_chart(c);
    add_flag(c, "bound", bound, "evaluate the dimension bound only");
    add(c, "lambda", lambda, "lambda in (0, 1], decimal or p/q");
    add(c, "p", p_bound, "submanifold dimension for --bound");
    add(c, "eps", eps, "epsilon in (0, 1) for the covering experiment");
    add(c, "radii", radii_cs, "lo:hi, log spaced");
    add(c, "scales", scales_cs, "number of radii");
    add(c, "grid", grid_cs, "grid per axis for locating characteristic points");
    c.run = [&](const Json&, Json& res, std::map<std::string, std::string>& csv, std::ostream& os) {
      const auto alg = resolve_group(common);
      if (bound) {
        if (p_bound < 1 || p_bound > alg.dim()) throw UsageError("--p must lie in [1, n]");
        Rational lam;
        try {
          lam = parse_rational(lambda);
        } catch (const StructuralError& e) {
          throw UsageError(e.what());
        }
        const auto b = charset_dim_bound(degree_profile(alg, p_bound), lam);
        res["bound"] = to_json(b);
        os << fmt::format("p = {}, l = {}, D(p) = {}, lambda = {}: dim bound {} ({}, case {})\n", b.p, b.ell,
                          b.max_degree, to_string(b.lambda), to_string(b.value), fixed(b.value_d()), b.case_id);
        return kOk;
      }
      const auto norm = make_norm(alg, common);
      const auto chart = resolve_chart(common, alg);
      CharsetExperimentOptions co;
      co.grid = grid_cs;
      Json runs = Json::array();
      std::vector<std::pair<double, double>> rows;
      std::vector<double> ratios;
      for (double r : descending(parse_radii(radii_cs, scales_cs))) {
        const auto ex = charset_covering_experiment(norm, chart, eps, r, co);
        runs.push_back(to_json(ex));
        if (ex.empty) {
          res["experiments"] = runs;
          os << ex.notice << "\n";
          return kOk;
        }
        rows.emplace_back(r, static_cast<double>(ex.max_count));
        ratios.push_back(static_cast<double>(ex.max_count) / std::pow(r, ex.exponent));
        os << fmt::format("r {:>10.3e}  class {}  theta {}  count {}  ceiling {}  count/r^e {}\n", r,
                          to_string(ex.cls), fixed(ex.theta), ex.max_count, fixed(ex.ceiling), fixed(ratios.back()));
      }
      res["experiments"] = runs;
      if (!out_dir.empty()) write_two_column_csv((std::filesystem::path(out_dir) / "charset.csv").string(), "r", "count", rows);
      csv["charset.csv"] = "experiments";
      // Boundedness of count / r^exponent: finer half stays within twice the coarser half.
      const std::size_t h = ratios.size() / 2;
      const double coarse = *std::max_element(ratios.begin(), ratios.begin() + std::max<std::size_t>(h, 1));
      const double fine = *std::max_element(ratios.begin() + h, ratios.end());
      const bool pass = fine <= 2 * coarse;
      res["audit"] = Json{{"coarse_max", coarse}, {"fine_max", fine}, {"pass", pass}};
      os << fmt::format("audit: bounded ratio -> {}\n", pass ? "pass" : "FAIL");
      return pass ? kOk : kAudit;
    };
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  Command* cmd = nullptr;
  for (auto& c : commands)
    if (c.app->parsed()) cmd = &c;

  try {
    if (!config_path.empty()) {
      Json cfg = read_json_file(config_path);
      // Accept an output document as well as a bare config.
      if (cfg.contains("provenance")) cfg = cfg["provenance"]["config"];
      if (!cfg.is_object()) throw UsageError("config must be a JSON object");
      for (const auto& [key, value] : cfg.items()) {
        if (key == "command") {
          if (value != cmd->name) throw UsageError(fmt::format("config is for '{}', not '{}'", value.dump(), cmd->name));
          continue;
        }
        auto it = std::find_if(cmd->params.begin(), cmd->params.end(), [&](const Param& p) { return p.key == key; });
        if (it == cmd->params.end()) throw UsageError(fmt::format("unknown config key '{}'", key));
        if (it->opt->count() == 0) it->set(value);
      }
    }
    set_max_threads(threads);
    Json config;
    config["command"] = cmd->name;
    for (const auto& p : cmd->params) config[p.key] = p.get();
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    Json result = Json::object();
    std::map<std::string, std::string> csv;
    std::ostringstream human;
    const int code = cmd->run(config, result, csv, human);
    Json doc;
    doc["provenance"] = Json{{"tool", "carnot"},
                             {"version", kVersion},
                             {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                             {"boost", BOOST_LIB_VERSION},
                             {"config", config}};
    doc["result"] = result;
    if (!csv.empty()) {
      Json files = Json::array();
      for (const auto& [name, _] : csv) files.push_back(name);
      doc["csv"] = files;
    }
    if (!out_dir.empty()) write_json_file((std::filesystem::path(out_dir) / (cmd->name + ".json")).string(), doc);
    if (print_json) std::cout << doc.dump(2) << "\n";
    else std::cout << human.str();
    return code;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
  } catch (const StructuralError& e) {
    std::cerr << "structural error: " << e.what() << "\n";
  } catch (const SingularPointError& e) {
    std::cerr << "singular point: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
