// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "carnot/gmt.hpp"
#include "carnot/io.hpp"
#include "carnot/random.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <sstream>

using namespace carnot;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

VectorXd random_point(int n, Rng& rng, double scale = 1.0) {
  VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = scale * rng.uniform(-1, 1);
  return x;
}

Outcome group_law() {
  const auto h = heisenberg(1);
  Rng rng(101);
  double err = 0;
  for (int s = 0; s < 10000; ++s) {
    const VectorXd x = random_point(3, rng, 2), y = random_point(3, rng, 2);
    VectorXd z(3);
    z << x(0) + y(0), x(1) + y(1), x(2) + y(2) + 0.5 * (x(0) * y(1) - x(1) * y(0));
    err = std::max(err, (bch_product(h, x, y) - z).cwiseAbs().maxCoeff());
  }
  double assoc = 0;
  for (const char* name : {"heisenberg:2", "engel"}) {
    const auto g = builtin(name);
    for (int s = 0; s < 10000; ++s) {
      const VectorXd x = random_point(g.dim(), rng), y = random_point(g.dim(), rng), z = random_point(g.dim(), rng);
      const VectorXd l = bch_product(g, bch_product(g, x, y), z), r = bch_product(g, x, bch_product(g, y, z));
      assoc = std::max(assoc, (l - r).cwiseAbs().maxCoeff());
    }
  }
  return {err <= 1e-12 && assoc <= 1e-9, fmt::format("closed-form err {:.2e}, associativity err {:.2e}", err, assoc)};
}

// Exhaustive max of d(alpha) over strictly increasing alpha, by recursion on
// the raw layer dimensions.
int brute_max_degree(const std::vector<int>& layer_of, int p) {
  int best = -1;
  std::function<void(int, int, int)> rec = [&](int start, int left, int acc) {
    if (left == 0) {
      best = std::max(best, acc);
      return;
    }
    for (int i = start; i + left <= static_cast<int>(layer_of.size()); ++i) rec(i + 1, left - 1, acc + layer_of[i]);
  };
  rec(0, p, 0);
  return best;
}

const std::vector<std::string> kGroups = {"abelian:1",    "abelian:2",    "abelian:3",    "abelian:5",
                                          "heisenberg:1", "heisenberg:2", "heisenberg:3", "engel",
                                          "free_step2:2", "free_step2:3", "free_step2:4"};

Outcome max_degree_table() {
  int checked = 0, bad = 0;
  for (const auto& name : kGroups) {
    const auto g = builtin(name);
    std::vector<int> layer_of;
    for (int j = 1; j <= g.step(); ++j) layer_of.insert(layer_of.end(), g.layer_dim(j), j);
    for (int p = 1; p <= g.dim(); ++p, ++checked)
      if (degree_profile(g, p).max_degree != brute_max_degree(layer_of, p)) ++bad;
  }
  return {bad == 0, fmt::format("{} (group, p) pairs, {} mismatches", checked, bad)};
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

Outcome degree_oracle() {
  Rng rng(303);
  struct Case {
    StratifiedAlgebra alg;
    Chart chart;
  };
  std::vector<Case> cases;
  const auto h = heisenberg(1);
  cases.push_back({h, builtin_chart("saddle", h)});
  cases.push_back({h, builtin_chart("half-saddle", h)});
  for (const char* name : {"heisenberg:1", "heisenberg:2", "engel"}) {
    const auto g = builtin(name);
    for (int p = 1; p <= std::min(3, g.dim() - 1); ++p)
      for (int k = 0; k < 2; ++k) cases.push_back({g, random_poly_chart(g, p, rng)});
  }
  int tested = 0, exempt = 0, bad = 0, nf_bad = 0;
  for (const auto& c : cases) {
    const int p = c.chart.p();
    for (int s = 0; s < 80; ++s) {
      VectorXq t(p);
      for (int i = 0; i < p; ++i) t(i) = Rational(static_cast<int>(rng.uniform(-8, 9)), 8);
      const auto tau = tangent_multivector_exact(c.alg, c.chart, t);
      const int exact = multivector_degree(c.alg, tau);
      const auto nf = normal_form_exact(c.alg, c.chart, t);
      if (nf.degree != exact) ++nf_bad;
      // Near the locus where the degree drops, the top component is small.
      const double top = project_degree(c.alg, tau.to_double_mv(), exact).norm();
      if (top <= 1e-6 * tau.to_double_mv().norm()) {
        ++exempt;
        continue;
      }
      ++tested;
      if (pointwise_degree(c.alg, c.chart, to_double(t)) != exact) ++bad;
    }
  }
  return {tested >= 1000 && bad == 0 && nf_bad == 0,
          fmt::format("{} points compared, {} exempt, {} float mismatches, {} normal-form mismatches", tested, exempt,
                      bad, nf_bad)};
}

BlowupTrace transversal_trace() {
  const auto h = heisenberg(1);
  HomogeneousQuasiNorm norm(h);
  const auto chart = builtin_chart("transversal-curve", h);
  auto radii = log_spaced(1e-1, std::pow(10.0, -3.5), 8);
  std::sort(radii.begin(), radii.end(), std::greater<>());
  return blowup_trace(norm, chart, VectorXd::Zero(1), radii);
}

Outcome blowup_density(const BlowupTrace& tr) {
  const auto& s = tr.steps;
  double lo = 1e300, hi = -1e300, mean = 0;
  for (std::size_t i = s.size() - 3; i < s.size(); ++i) {
    lo = std::min(lo, s[i].density_ratio);
    hi = std::max(hi, s[i].density_ratio);
    mean += s[i].density_ratio / 3;
  }
  const double spread = (hi - lo) / mean;
  const double err = std::abs(s.back().density_ratio - tr.predicted_limit) / tr.predicted_limit;
  return {spread < 0.05 && err < 0.05,
          fmt::format("predicted {:.6f}, last {:.6f}, last-three spread {:.2e}, error {:.2e}", tr.predicted_limit,
                      s.back().density_ratio, spread, err)};
}

Outcome blowup_sets(const BlowupTrace& tr) {
  if (tr.steps.empty()) return {false, "no trace"};
  bool mono = true;
  for (std::size_t i = 1; i < tr.steps.size(); ++i)
    if (tr.steps[i].hausdorff > 1.1 * tr.steps[i - 1].hausdorff) mono = false;
  const double last = tr.steps.back().hausdorff;
  return {mono && last < 0.05,
          fmt::format("hausdorff {:.3e} -> {:.3e}, monotone {}", tr.steps.front().hausdorff, last, mono)};
}

std::vector<double> dim_radii() {
  auto r = log_spaced(0.25, 0.0025, 8);
  std::sort(r.begin(), r.end(), std::greater<>());
  return r;
}

double chart_dimension(const std::string& group, const std::string& chart_name) {
  const auto g = builtin(group);
  HomogeneousQuasiNorm norm(g);
  const auto chart = builtin_chart(chart_name, g);
  return box_dimension(norm, chart_point_cloud(chart, chart.domain(), 1000001), dim_radii()).slope;
}

Outcome dimensions() {
  const double v = chart_dimension("heisenberg:1", "vertical-axis");
  const double s = chart_dimension("abelian:2", "segment");
  const double t = chart_dimension("heisenberg:1", "transversal-curve");
  const bool ok = v >= 1.85 && v <= 2.15 && s >= 0.9 && s <= 1.1 && t >= 1.85 && t <= 2.15;
  return {ok, fmt::format("vertical axis {:.4f}, segment {:.4f}, transversal curve {:.4f}", v, s, t)};
}

PointCloud characteristic_cloud(const StratifiedAlgebra& g, const Chart& chart, int m) {
  const auto cs = sample_characteristic_set(g, chart, m).characteristic();
  PointCloud pts(g.dim(), static_cast<Eigen::Index>(cs.size()));
  for (std::size_t i = 0; i < cs.size(); ++i) pts.col(static_cast<Eigen::Index>(i)) = cs[i].x;
  return pts;
}

Outcome negligibility() {
  const auto h = heisenberg(1);
  HomogeneousQuasiNorm norm(h);
  auto radii = log_spaced(0.5, 0.005, 8);
  std::sort(radii.begin(), radii.end(), std::greater<>());
  const auto saddle = characteristic_cloud(h, builtin_chart("saddle", h), 401);
  const auto half = characteristic_cloud(h, builtin_chart("half-saddle", h), 401);
  const double ds = box_dimension(norm, saddle, radii).slope;
  const double dh = box_dimension(norm, half, radii).slope;
  // Covering audit on the saddle: count / r^exponent stays bounded over 3 decades.
  std::vector<double> ratio;
  for (double r : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto ex = charset_covering_experiment(norm, builtin_chart("saddle", h), 0.5, r);
    ratio.push_back(static_cast<double>(ex.max_count) / std::pow(r, ex.exponent));
  }
  const bool bounded = std::max(ratio[2], ratio[3]) <= 2 * std::max(ratio[0], ratio[1]);
  return {ds <= 2.5 && dh <= 2.5 && bounded,
          fmt::format("saddle: {} characteristic samples, exponent {:.3f}; half-saddle: {} samples, exponent {:.3f}; "
                      "cover ratio bounded {}",
                      saddle.cols(), ds, half.cols(), dh, bounded)};
}

Outcome bound_calculator() {
  int checks = 0, bad = 0;
  auto expect = [&](const Rational& got, const Rational& want) {
    ++checks;
    if (got != want) ++bad;
  };
  const std::vector<Rational> lambdas = {Rational(1), Rational(1, 2), Rational(1, 3), Rational(3, 4), Rational(1, 7)};
  for (int n = 1; n <= 3; ++n) {
    const auto h = heisenberg(n);
    for (int p = 2; p <= 2 * n; ++p)
      for (const auto& l : lambdas) expect(charset_dim_bound(degree_profile(h, p), l).value, Rational(p + 1) - l);
  }
  const auto h1 = heisenberg(1);
  for (const auto& l : lambdas) {
    const Rational v = charset_dim_bound(degree_profile(h1, 1), l).value;
    expect(v, Rational(2) / (1 + l));
    ++checks;
    if (!(v <= 2 - l)) ++bad;
  }
  // Case agreement at lambda = 1/(ell - 1), where both ell >= 2 cases give D(p) - 1.
  for (const auto& name : kGroups) {
    const auto g = builtin(name);
    for (int p = 1; p <= g.dim(); ++p) {
      const auto prof = degree_profile(g, p);
      if (prof.ell < 2) continue;
      const Rational l(1, prof.ell - 1);
      expect(charset_dim_bound(prof, l).value, Rational(prof.max_degree - 1));
      expect(Rational(prof.max_degree) - prof.ell * l / (1 + l), Rational(prof.max_degree - 1));
    }
  }
  return {bad == 0, fmt::format("{} exact identities, {} failures", checks, bad)};
}

Outcome projections() {
  Rng rng(909);
  double worst = 0;
  int count = 0;
  bool exact_ok = true;
  const std::vector<std::string> groups = {"heisenberg:2", "engel", "free_step2:3"};
  for (int s = 0; s < 10000; ++s, ++count) {
    const auto g = builtin(groups[s % groups.size()]);
    const int n = g.dim();
    const int p = 1 + static_cast<int>(rng.uniform() * n);
    Multivector<double> v(n, p);
    for (const auto& a : combinations(n, p)) v.set(a, rng.uniform(-1, 1));
    const int dmax = degree_profile(g, p).max_degree;
    Multivector<double> sum(n, p);
    std::vector<Multivector<double>> parts;
    for (int d = p; d <= dmax; ++d) parts.push_back(project_degree(g, v, d));
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const int d = p + static_cast<int>(i);
      worst = std::max(worst, (project_degree(g, parts[i], d) - parts[i]).norm());
      for (std::size_t k = i + 1; k < parts.size(); ++k) worst = std::max(worst, std::abs(parts[i].dot(parts[k])));
      const double r = rng.uniform(0.1, 3);
      const auto lhs = dilate_multivector(g, parts[i], r);
      worst = std::max(worst, (lhs - parts[i].scaled(std::pow(r, d))).norm() / std::max(1.0, lhs.norm()));
      sum = sum + parts[i];
    }
    worst = std::max(worst, (sum - v).norm());
    exact_ok = exact_ok && sum == v;
  }
  return {worst <= 1e-12 && exact_ok, fmt::format("{} multivectors, worst defect {:.2e}", count, worst)};
}

Outcome kill_layers_audit() {
  Rng rng(1010);
  std::vector<std::string> lines;
  bool ok = true;
  for (const char* name : {"heisenberg:1", "heisenberg:2", "engel", "free_step2:3"}) {
    HomogeneousQuasiNorm norm(builtin(name));
    const auto& g = norm.algebra();
    for (int j = 1; j < g.step(); ++j) {
      int killed = 0;
      for (int l = 1; l <= j; ++l) killed += g.layer_dim(l);
      std::vector<double> sup;
      for (double r : {1e-1, 1e-2, 1e-3, 1e-4}) {
        double m = 0;
        for (int s = 0; s < 1000; ++s) {
          VectorXd x = random_point(g.dim(), rng);
          x *= r * rng.uniform() / x.norm();
          const auto kr = kill_layers(norm, x, j, r);
          if (kr.x_tilde.head(killed) != VectorXd::Zero(killed)) ok = false;
          m = std::max(m, kr.distance / kr.scale);
        }
        sup.push_back(m);
      }
      const bool bounded = std::max(sup[2], sup[3]) <= 2 * std::max(sup[0], sup[1]);
      ok = ok && bounded;
      lines.push_back(fmt::format("{} j={} {:.3f}/{:.3f}", name, j, std::max(sup[0], sup[1]), std::max(sup[2], sup[3])));
    }
  }
  std::string detail = "coarse/fine sup:";
  for (const auto& l : lines) detail += " " + l + ";";
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / fmt::format("carnot_accept_{}", ::getpid());
  fs::remove_all(root);
  const std::vector<std::string> runs = {
      "measure --chart saddle --estimator monte-carlo --samples 50000 --seed 7",
      "blowup --chart transversal-curve --radii 1e-1:1e-2 --scales 4 --points 2048",
      "dimension --chart transversal-curve --points 20001 --radii 0.25:0.0025 --scales 5 --seed 3",
      "degree --chart half-saddle --grid 21",
      "charset --chart saddle --radii 1e-1:1e-3 --scales 3",
  };
  int files = 0, diff = 0, failed = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      dirs.push_back(root / fmt::format("run{}_{}", i, rep));
      const std::string cmd = fmt::format("\"{}\" {} --threads {} --out \"{}\" > /dev/null", CARNOT_CLI, runs[i],
                                          rep == 0 ? 1 : 4, dirs.back().string());
      if (std::system(cmd.c_str()) != 0) ++failed;
    }
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      ++files;
      if (slurp(e.path()) != slurp(dirs[1] / e.path().filename())) ++diff;
    }
  }
  fs::remove_all(root);
  return {failed == 0 && diff == 0 && files > 0,
          fmt::format("{} runs twice, {} files compared, {} differ, {} failed runs", runs.size(), files, diff, failed)};
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  int failures = 0;
  auto run = [&](int id, const char* name, double budget_s, const std::function<Outcome()>& f) {
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    const bool in_time = budget_s <= 0 || secs < budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::string budget = budget_s > 0 ? fmt::format(" (budget {:.0f} s)", budget_s) : std::string();
    fmt::print("criterion {:>2} {:<28} {}  {:.2f} s{}  {}\n", id, name, pass ? "PASS" : "FAIL", secs, budget, o.detail);
    std::fflush(stdout);
  };
  run(1, "group law", 5, group_law);
  run(2, "D(p) brute force", 1, max_degree_table);
  run(3, "degree oracle", 0, degree_oracle);
  BlowupTrace trace;
  run(4, "blow-up density", 60, [&] {
    trace = transversal_trace();
    return blowup_density(trace);
  });
  run(5, "blow-up set convergence", 0, [&] { return blowup_sets(trace); });
  run(6, "dimension estimates", 120, dimensions);
  run(7, "negligibility surrogate", 0, negligibility);
  run(8, "bound calculator", 0, bound_calculator);
  run(9, "projection algebra", 0, projections);
  run(10, "kill-layers audit", 0, kill_layers_audit);
  run(11, "determinism", 0, determinism);
  fmt::print("{} of 11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
