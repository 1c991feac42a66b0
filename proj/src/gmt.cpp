#include "carnot/gmt.hpp"

#include "carnot/parallel.hpp"
#include "carnot/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace carnot {

std::string to_string(Estimator e) { return e == Estimator::quadrature ? "tensor-quadrature" : "monte-carlo"; }

namespace {

constexpr std::size_t kChunk = 4096;
constexpr std::size_t kSamplesPerBall = 16;

int auto_nodes(int p, int requested) {
  if (requested > 0) return requested;
  switch (p) {
    case 1: return 4096;
    case 2: return 256;
    case 3: return 48;
    default: return 16;
  }
}

void check_region(const Chart& chart, const Domain& region) {
  if (region.dim() != chart.p() || static_cast<int>(region.hi.size()) != chart.p())
    throw DimensionError("region must have one interval per chart parameter");
  const Domain& d = chart.domain();
  for (int i = 0; i < chart.p(); ++i) {
    if (!(region.lo[i] < region.hi[i])) throw DomainError("region: lo must be below hi");
    const double slack = 1e-12 * (1 + std::abs(d.lo[i]) + std::abs(d.hi[i]));
    if (region.lo[i] < d.lo[i] - slack || region.hi[i] > d.hi[i] + slack)
      throw DomainError("region must lie inside the chart domain");
  }
}

MeasureResult integrate(const Domain& region, const IntegrationOptions& opt,
                        const std::function<double(const VectorXd&)>& f) {
  const int p = region.dim();
  MeasureResult out;
  out.estimator = opt.estimator;
  const double vol = region.volume();
  if (opt.estimator == Estimator::quadrature) {
    const int m = auto_nodes(p, opt.points_per_axis);
    std::size_t total = 1;
    for (int i = 0; i < p; ++i) total *= static_cast<std::size_t>(m);
    const int chunks = static_cast<int>((total + kChunk - 1) / kChunk);
    std::vector<double> partial(chunks, 0.0);
    parallel_chunks(chunks, [&](int c) {
      VectorXd t(p);
      const std::size_t begin = static_cast<std::size_t>(c) * kChunk, end = std::min(total, begin + kChunk);
      double s = 0;
      for (std::size_t g = begin; g < end; ++g) {
        std::size_t rem = g;
        for (int i = p - 1; i >= 0; --i) {
          const std::size_t k = rem % static_cast<std::size_t>(m);
          rem /= static_cast<std::size_t>(m);
          t(i) = region.lo[i] + (region.hi[i] - region.lo[i]) * (static_cast<double>(k) + 0.5) / m;
        }
        s += f(t);
      }
      partial[c] = s;
    });
    double s = 0;
    for (double v : partial) s += v;
    out.value = s * vol / static_cast<double>(total);
    out.samples = total;
    return out;
  }
  const std::size_t n = opt.samples;
  if (n < 2) throw DomainError("Monte Carlo needs at least 2 samples");
  const int chunks = static_cast<int>((n + kChunk - 1) / kChunk);
  std::vector<double> s1(chunks, 0.0), s2(chunks, 0.0);
  parallel_chunks(chunks, [&](int c) {
    Rng rng(opt.seed, "integral", static_cast<std::uint64_t>(c));
    VectorXd t(p);
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk, end = std::min(n, begin + kChunk);
    for (std::size_t g = begin; g < end; ++g) {
      for (int i = 0; i < p; ++i) t(i) = rng.uniform(region.lo[i], region.hi[i]);
      const double v = f(t);
      s1[c] += v;
      s2[c] += v * v;
    }
  });
  double a = 0, b = 0;
  for (int c = 0; c < chunks; ++c) {
    a += s1[c];
    b += s2[c];
  }
  const double mean = a / static_cast<double>(n);
  const double var = std::max(0.0, (b / static_cast<double>(n) - mean * mean) * n / (n - 1.0));
  out.value = vol * mean;
  out.std_error = vol * std::sqrt(var / static_cast<double>(n));
  out.samples = n;
  return out;
}

}  // namespace

MeasureResult intrinsic_measure(const StratifiedAlgebra& alg, const Chart& chart, const Domain& region, int degree,
                                const IntegrationOptions& options) {
  if (chart.n() != alg.dim()) throw DimensionError("chart and group dimensions differ");
  check_region(chart, region);
  const auto profile = degree_profile(alg, chart.p());
  const int d = degree < 0 ? profile.max_degree : degree;
  if (d < chart.p() || d > profile.max_degree) throw DomainError(fmt::format("degree {} outside [p, D(p)]", d));
  return integrate(region, options, [&](const VectorXd& t) {
    const auto td = tangent_data(alg, chart, t);
    return project_degree(alg, wedge(td.frame_coeffs), d).norm();
  });
}

void check_metric(const AuxiliaryMetric& metric, int n) {
  const MatrixXd& g = metric.g;
  if (g.size() == 0) return;
  if (g.rows() != n || g.cols() != n) throw DomainError("auxiliary metric must be n x n");
  if (!g.allFinite()) throw DomainError("auxiliary metric has non-finite entries");
  const double scale = g.cwiseAbs().maxCoeff();
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw DomainError("auxiliary metric is not symmetric");
  Eigen::LLT<MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw DomainError("auxiliary metric is not positive definite");
}

double tangent_norm(const AuxiliaryMetric& metric, const TangentData<double>& tangent) {
  const MatrixXd& v = metric.frame == MetricFrame::left_invariant ? tangent.frame_coeffs : tangent.jacobian;
  const MatrixXd gram = metric.g.size() == 0 ? MatrixXd(v.transpose() * v) : MatrixXd(v.transpose() * metric.g * v);
  return std::sqrt(std::max(0.0, gram.determinant()));
}

MeasureResult riemannian_measure(const StratifiedAlgebra& alg, const Chart& chart, const Domain& region,
                                 const AuxiliaryMetric& metric, const IntegrationOptions& options) {
  if (chart.n() != alg.dim()) throw DimensionError("chart and group dimensions differ");
  check_metric(metric, alg.dim());
  check_region(chart, region);
  return integrate(region, options,
                   [&](const VectorXd& t) { return tangent_norm(metric, tangent_data(alg, chart, t)); });
}

namespace {

// Exit parameter of the ray s -> s v from the unit quasi-ball.
double ray_exit(const HomogeneousQuasiNorm& norm, const VectorXd& v) {
  const auto& alg = norm.algebra();
  double rho = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= alg.step(); ++j) {
    const double m = layer(alg, v, j).cwiseAbs().maxCoeff();
    if (m > 0) rho = std::min(rho, 1.0 / (norm.weight(j) * m));
  }
  return rho;
}

}  // namespace

MetricFactorResult metric_factor(const HomogeneousQuasiNorm& norm, const Multivector<double>& tau,
                                 const MetricFactorOptions& options) {
  const auto& alg = norm.algebra();
  if (tau.dim() != alg.dim()) throw DimensionError("metric_factor: multivector dimension differs from the group");
  if (tau.is_zero()) throw DomainError("metric_factor: zero multivector");
  const auto plane = simple_plane(tau);
  if (!plane.simple) throw DomainError("metric_factor: multivector is not simple");
  const MatrixXd& u = plane.basis;
  const int p = static_cast<int>(u.cols()), n = alg.dim();
  MetricFactorResult out;
  if (!options.monte_carlo && p == 1) {
    out.value = 2 * ray_exit(norm, u.col(0));
    out.method = "ray";
    return out;
  }
  if (!options.monte_carlo && p == 2) {
    const int m = options.angles;
    const int chunks = (m + 1023) / 1024;
    std::vector<double> partial(chunks, 0.0);
    parallel_chunks(chunks, [&](int c) {
      for (int k = c * 1024; k < std::min(m, (c + 1) * 1024); ++k) {
        const double w = 2 * std::numbers::pi * (k + 0.5) / m;
        const double rho = ray_exit(norm, std::cos(w) * u.col(0) + std::sin(w) * u.col(1));
        partial[c] += rho * rho;
      }
    });
    double s = 0;
    for (double v : partial) s += v;
    out.value = 0.5 * s * 2 * std::numbers::pi / m;
    out.method = "polar";
    out.samples = static_cast<std::size_t>(m);
    return out;
  }
  // Box(0, C_BB) contains the unit ball; its trace in plane coordinates is
  // inside prod [-b_k, b_k] with b_k = sum_i |U_ik| C^{d_i}.
  const double c = box_ball_constant(norm, 20000, options.seed).c_bb * 1.01;
  VectorXd b = VectorXd::Zero(p);
  for (int k = 0; k < p; ++k)
    for (int i = 0; i < n; ++i) b(k) += std::abs(u(i, k)) * std::pow(c, alg.degree(i));
  double vol = 1;
  for (int k = 0; k < p; ++k) vol *= 2 * b(k);
  const std::size_t total = options.samples;
  const int chunks = static_cast<int>((total + kChunk - 1) / kChunk);
  std::vector<std::size_t> hits(chunks, 0);
  parallel_chunks(chunks, [&](int ch) {
    Rng rng(options.seed, "metric-factor", static_cast<std::uint64_t>(ch));
    VectorXd xi(p);
    const std::size_t begin = static_cast<std::size_t>(ch) * kChunk, end = std::min(total, begin + kChunk);
    for (std::size_t g = begin; g < end; ++g) {
      for (int k = 0; k < p; ++k) xi(k) = rng.uniform(-b(k), b(k));
      const VectorXd v = u * xi;
      if (norm(v) < 1) ++hits[ch];
    }
  });
  std::size_t h = 0;
  for (auto v : hits) h += v;
  const double f = static_cast<double>(h) / static_cast<double>(total);
  out.value = vol * f;
  out.std_error = vol * std::sqrt(f * (1 - f) / static_cast<double>(total));
  out.method = "monte-carlo";
  out.samples = total;
  return out;
}

namespace {

// Liang-Barsky clip of the segment [a, b] to [-1, 1]^n.
bool clip_to_cube(const VectorXd& a, const VectorXd& b, VectorXd& ca, VectorXd& cb) {
  double t0 = 0, t1 = 1;
  const VectorXd d = b - a;
  for (int i = 0; i < a.size(); ++i) {
    for (double side : {-1.0, 1.0}) {
      // Constraint side * x_i <= 1.
      const double pp = side * d(i), q = 1 - side * a(i);
      if (pp == 0) {
        if (q < 0) return false;
      } else {
        const double t = q / pp;
        if (pp < 0) t0 = std::max(t0, t);
        else t1 = std::min(t1, t);
      }
    }
  }
  if (t0 > t1) return false;
  ca = a + t0 * d;
  cb = a + t1 * d;
  return true;
}

double point_segment_distance(const VectorXd& q, const VectorXd& a, const VectorXd& b) {
  const VectorXd d = b - a;
  const double dd = d.squaredNorm();
  const double s = dd > 0 ? std::clamp((q - a).dot(d) / dd, 0.0, 1.0) : 0.0;
  return (q - a - s * d).norm();
}

bool in_cube(const VectorXd& y) { return y.cwiseAbs().maxCoeff() <= 1; }

// Samples of F cap span(U), U orthonormal n x p, with m nodes per axis.
std::vector<VectorXd> subgroup_samples(const MatrixXd& u, int m) {
  const int p = static_cast<int>(u.cols());
  const double extent = std::sqrt(static_cast<double>(u.rows()));
  Domain box = Domain::cube(p, -extent, extent);
  std::vector<VectorXd> out;
  for (const auto& xi : parameter_grid(box, m)) {
    VectorXd y = u * xi;
    if (in_cube(y)) out.push_back(std::move(y));
  }
  return out;
}

struct BlownSet {
  std::vector<VectorXd> nodes;
  std::vector<char> valid;
};

}  // namespace

std::vector<double> log_spaced(double a, double b, int k) {
  if (!(a > 0) || !(b > 0)) throw DomainError("log_spaced: endpoints must be positive");
  if (k < 2) throw DomainError("log_spaced: need at least 2 values");
  std::vector<double> out(k);
  const double la = std::log10(a), lb = std::log10(b);
  for (int i = 0; i < k; ++i) out[i] = std::pow(10.0, la + (lb - la) * i / (k - 1));
  out.front() = a;
  out.back() = b;
  return out;
}

BlowupTrace blowup_trace(const HomogeneousQuasiNorm& norm, const Chart& chart, const VectorXd& t0,
                         const std::vector<double>& radii, const BlowupOptions& options) {
  const auto& alg = norm.algebra();
  const int p = chart.p(), n = alg.dim();
  if (chart.n() != n) throw DimensionError("chart and group dimensions differ");
  if (!chart.domain().contains(t0)) throw DomainError("blow-up base point outside the chart domain");
  if (radii.empty()) throw DomainError("blow-up needs at least one radius");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0) || radii[k] > 1) throw DomainError("blow-up radii must lie in (0, 1]");
    if (k > 0 && !(radii[k] < radii[k - 1])) throw DomainError("blow-up radii must be strictly decreasing");
  }
  check_metric(options.metric, n);

  const auto profile = degree_profile(alg, p);
  const auto nf = normal_form(alg, chart, t0, options.rel_tol);
  if (classify_point(alg, profile, nf) != PointClass::transversal)
    throw PreconditionError(fmt::format("blow-up needs a transversal point: degree {} at t0, D(p) = {}", nf.degree,
                                        profile.max_degree));
  BlowupTrace tr;
  tr.t0 = t0;
  tr.x = chart(t0);
  tr.degree = nf.degree;
  tr.subdegrees = nf.subdegrees;
  tr.transform = nf.transform;
  tr.requires_row_permutation = nf.requires_row_permutation;

  const auto td = tangent_data(alg, chart, t0);
  const auto tau = wedge(td.frame_coeffs);
  const double gnorm = tangent_norm(options.metric, td);
  const auto proj = project_degree(alg, tau, profile.max_degree);
  tr.projected_norm = proj.norm() / gnorm;
  tr.theta = metric_factor(norm, proj).value;
  tr.predicted_limit = tr.theta / tr.projected_norm;

  // Pi: layer-l parts of the layer-l pivot columns plus every layer above l.
  const int ell = profile.ell;
  std::vector<VectorXd> gens;
  for (int j = 0; j < p; ++j)
    if (nf.subdegrees[j] == ell) {
      VectorXd g = VectorXd::Zero(n);
      layer(alg, g, ell) = layer(alg, nf.echelon.col(j), ell);
      gens.push_back(g);
    }
  for (int i = 0; i < n; ++i)
    if (alg.degree(i) > ell) gens.push_back(VectorXd::Unit(n, i));
  // Modified Gram-Schmidt keeps coordinate generators exact.
  tr.subgroup_basis.resize(n, static_cast<int>(gens.size()));
  for (std::size_t j = 0; j < gens.size(); ++j) {
    VectorXd g = gens[j];
    for (std::size_t i = 0; i < j; ++i) g -= tr.subgroup_basis.col(static_cast<int>(i)).dot(g) * tr.subgroup_basis.col(static_cast<int>(i));
    tr.subgroup_basis.col(static_cast<int>(j)) = g / g.norm();
  }

  const int m = options.points_per_axis > 0 ? options.points_per_axis : (p == 1 ? 8192 : 192);
  const VectorXd xinv = -tr.x;
  const Domain& dom = chart.domain();
  const int sub_m =
      p == 1 ? options.subgroup_samples
             : std::max(11, static_cast<int>(std::lround(std::pow(static_cast<double>(options.subgroup_samples), 1.0 / p))));
  const auto pi_samples = subgroup_samples(tr.subgroup_basis, sub_m);

  for (double r : radii) {
    BlowupStep st;
    st.r = r;
    MatrixXd mlam = nf.transform;
    for (int j = 0; j < p; ++j) mlam.col(j) *= std::pow(r, nf.subdegrees[j]);
    const double jac_factor = std::abs(mlam.determinant());

    // Rescaled parameter grid over [-K, K]^p; nodes are cell midpoints.
    auto nodes_for = [&](double k) {
      std::vector<VectorXd> u;
      std::size_t total = 1;
      for (int i = 0; i < p; ++i) total *= static_cast<std::size_t>(m);
      u.reserve(total);
      std::vector<int> idx(p, 0);
      for (std::size_t c = 0; c < total; ++c) {
        VectorXd v(p);
        for (int i = 0; i < p; ++i) v(i) = -k + 2 * k * (idx[i] + 0.5) / m;
        u.push_back(std::move(v));
        for (int i = p - 1; i >= 0; --i) {
          if (++idx[i] < m) break;
          idx[i] = 0;
        }
      }
      return u;
    };

    // Density: doubling K until the ball preimage stays off the outer tenth.
    double k = options.initial_half_width;
    for (int attempt = 0;; ++attempt) {
      const auto u = nodes_for(k);
      const int chunks = static_cast<int>((u.size() + kChunk - 1) / kChunk);
      std::vector<double> sum(chunks, 0.0), outer(chunks, 0.0);
      std::vector<std::size_t> hits(chunks, 0);
      std::vector<char> clipped(chunks, 0);
      parallel_chunks(chunks, [&](int c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kChunk, end = std::min(u.size(), begin + kChunk);
        for (std::size_t g = begin; g < end; ++g) {
          const VectorXd t = t0 + mlam * u[g];
          if (!dom.contains(t)) {
            clipped[c] = 1;
            continue;
          }
          const VectorXd y = bch_product(alg, xinv, chart(t));
          if (norm(y) < r) {
            sum[c] += tangent_norm(options.metric, tangent_data(alg, chart, t));
            ++hits[c];
            outer[c] = std::max(outer[c], u[g].cwiseAbs().maxCoeff());
          }
        }
      });
      double s = 0, reach = 0;
      std::size_t h = 0;
      bool clip = false;
      for (int c = 0; c < chunks; ++c) {
        s += sum[c];
        h += hits[c];
        reach = std::max(reach, outer[c]);
        clip = clip || clipped[c];
      }
      if (reach > 0.9 * k && attempt < options.max_doublings) {
        k *= 2;
        continue;
      }
      const double cell = std::pow(2 * k / m, p);
      st.density_ratio = jac_factor * s * cell / std::pow(r, profile.max_degree);
      st.in_ball = h;
      st.half_width = k;
      st.clipped_by_domain = clip;
      break;
    }

    // Blown-up set sampled on its own grid, sized so F is reached.
    double kf = options.initial_half_width;
    BlownSet set;
    for (int attempt = 0;; ++attempt) {
      const auto u = nodes_for(kf);
      set.nodes.assign(u.size(), VectorXd());
      set.valid.assign(u.size(), 0);
      const int chunks = static_cast<int>((u.size() + kChunk - 1) / kChunk);
      std::vector<double> outer(chunks, 0.0);
      parallel_chunks(chunks, [&](int c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kChunk, end = std::min(u.size(), begin + kChunk);
        for (std::size_t g = begin; g < end; ++g) {
          const VectorXd t = t0 + mlam * u[g];
          if (!dom.contains(t)) continue;
          set.nodes[g] = dilate(alg, 1.0 / r, VectorXd(bch_product(alg, xinv, chart(t))));
          set.valid[g] = 1;
          if (in_cube(set.nodes[g])) outer[c] = std::max(outer[c], u[g].cwiseAbs().maxCoeff());
        }
      });
      const double reach = *std::max_element(outer.begin(), outer.end());
      if (reach > 0.9 * kf && attempt < options.max_doublings) {
        kf *= 2;
        continue;
      }
      break;
    }

    if (p == 1) {
      const VectorXd w = tr.subgroup_basis.col(0);
      const double smax = 1.0 / w.cwiseAbs().maxCoeff();
      auto dist_to_pi = [&](const VectorXd& q) { return (q - std::clamp(q.dot(w), -smax, smax) * w).norm(); };
      std::vector<std::pair<VectorXd, VectorXd>> pieces;
      for (std::size_t g = 0; g + 1 < set.nodes.size(); ++g) {
        if (!set.valid[g] || !set.valid[g + 1]) continue;
        VectorXd a, b;
        if (clip_to_cube(set.nodes[g], set.nodes[g + 1], a, b)) pieces.emplace_back(a, b);
      }
      double d1 = 0, d2 = 0;
      for (const auto& [a, b] : pieces) d1 = std::max({d1, dist_to_pi(a), dist_to_pi(b)});
      const int chunks = static_cast<int>((pi_samples.size() + 255) / 256);
      std::vector<double> part(chunks, 0.0);
      parallel_chunks(chunks, [&](int c) {
        for (std::size_t s = static_cast<std::size_t>(c) * 256; s < std::min(pi_samples.size(), (c + 1) * 256ul); ++s) {
          double best = std::numeric_limits<double>::infinity();
          for (const auto& [a, b] : pieces) best = std::min(best, point_segment_distance(pi_samples[s], a, b));
          part[c] = std::max(part[c], best);
        }
      });
      for (double v : part) d2 = std::max(d2, v);
      st.hausdorff = pieces.empty() ? std::numeric_limits<double>::infinity() : std::max(d1, d2);
    } else {
      std::vector<VectorXd> a;
      for (std::size_t g = 0; g < set.nodes.size(); ++g)
        if (set.valid[g] && in_cube(set.nodes[g])) a.push_back(set.nodes[g]);
      const MatrixXd& u = tr.subgroup_basis;
      auto nearest = [](const VectorXd& q, const std::vector<VectorXd>& pts) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& v : pts) best = std::min(best, (q - v).squaredNorm());
        return std::sqrt(best);
      };
      // A to F cap Pi: exact through the orthogonal projection when it stays in F.
      double d1 = 0, d2 = 0;
      for (const auto& q : a) {
        const VectorXd proj_q = u * (u.transpose() * q);
        d1 = std::max(d1, in_cube(proj_q) ? (q - proj_q).norm() : nearest(q, pi_samples));
      }
      const int chunks = static_cast<int>((pi_samples.size() + 63) / 64);
      std::vector<double> part(chunks, 0.0);
      parallel_chunks(chunks, [&](int c) {
        for (std::size_t s = static_cast<std::size_t>(c) * 64; s < std::min(pi_samples.size(), (c + 1) * 64ul); ++s)
          part[c] = std::max(part[c], nearest(pi_samples[s], a));
      });
      for (double v : part) d2 = std::max(d2, v);
      st.hausdorff = a.empty() ? std::numeric_limits<double>::infinity() : std::max(d1, d2);
    }
    tr.steps.push_back(st);
  }
  return tr;
}

DimEstimate fit_log_log(const std::vector<double>& scales, const std::vector<std::size_t>& counts) {
  const std::size_t k = scales.size();
  if (k != counts.size()) throw DimensionError("fit_log_log: scales and counts differ in length");
  if (k < 3) throw DomainError("fit_log_log: need at least 3 points");
  std::vector<double> x(k), y(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(scales[i] > 0) || counts[i] == 0) throw DomainError("fit_log_log: scales and counts must be positive");
    x[i] = -std::log(scales[i]);
    y[i] = std::log(static_cast<double>(counts[i]));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw DomainError("fit_log_log: degenerate regression (all scales equal)");
  DimEstimate out;
  out.scales = scales;
  out.counts = counts;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = y[i] - out.intercept - out.slope * x[i];
    sse += e * e;
  }
  out.residual = std::sqrt(sse / k);
  const boost::math::students_t dist(static_cast<double>(k - 2));
  out.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(sse / (k - 2) / sxx);
  return out;
}

DimEstimate box_dimension(const HomogeneousQuasiNorm& norm, const PointCloud& points, const std::vector<double>& scales) {
  if (scales.size() < 4) throw DomainError("box_dimension: need at least 4 scales");
  const auto [lo, hi] = std::minmax_element(scales.begin(), scales.end());
  if (!(*lo > 0)) throw DomainError("box_dimension: scales must be positive");
  if (*hi / *lo < 100 * (1 - 1e-9)) throw DomainError("box_dimension: scales must span at least 2 decades");
  if (points.cols() == 0) throw DomainError("box_dimension: empty point set");
  std::vector<std::size_t> counts;
  for (double r : scales) counts.push_back(covering_number(norm, points, r));
  return fit_log_log(scales, counts);
}

PointCloud chart_point_cloud(const Chart& chart, const Domain& region, int m) {
  check_region(chart, region);
  const auto grid = parameter_grid(region, m);
  PointCloud out(chart.n(), static_cast<Eigen::Index>(grid.size()));
  const int chunks = static_cast<int>((grid.size() + kChunk - 1) / kChunk);
  parallel_chunks(chunks, [&](int c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk, end = std::min(grid.size(), begin + kChunk);
    for (std::size_t g = begin; g < end; ++g) out.col(static_cast<Eigen::Index>(g)) = chart(grid[g]);
  });
  return out;
}

CharsetBound charset_dim_bound(const DegreeProfile& profile, const Rational& lambda) {
  if (!(lambda > 0) || lambda > 1) throw DomainError("charset bound: lambda must lie in (0, 1]");
  CharsetBound b;
  b.p = profile.p;
  b.ell = profile.ell;
  b.max_degree = profile.max_degree;
  b.lambda = lambda;
  const Rational d(profile.max_degree);
  if (profile.ell == 1) {
    b.case_id = 1;
    b.value = d - lambda;
  } else if (lambda >= Rational(1, profile.ell - 1)) {
    b.case_id = 2;
    b.value = d - 1;
  } else {
    b.case_id = 3;
    b.value = d - Rational(profile.ell) * lambda / (1 + lambda);
  }
  return b;
}

CharsetExperiment charset_covering_experiment(const HomogeneousQuasiNorm& norm, const Chart& chart, double eps,
                                              double r, const CharsetExperimentOptions& options) {
  const auto& alg = norm.algebra();
  if (chart.n() != alg.dim()) throw DimensionError("chart and group dimensions differ");
  if (!(eps > 0 && eps < 1)) throw DomainError("charset experiment: eps must lie in (0, 1)");
  if (!(r > 0 && r < 1)) throw DomainError("charset experiment: r must lie in (0, 1)");
  const int p = chart.p();
  const auto profile = degree_profile(alg, p);
  CharsetExperiment ex;
  ex.eps = eps;
  ex.r = r;
  ex.ell = profile.ell;

  SampleOptions so;
  so.exact = options.exact && chart.is_polynomial();
  const auto sampling = sample_characteristic_set(alg, chart, options.grid, so);
  std::vector<CharSample> a, b;
  for (const auto& s : sampling.samples) {
    if (s.cls == PointClass::A) a.push_back(s);
    if (s.cls == PointClass::B) b.push_back(s);
  }
  if (a.empty() && b.empty()) {
    ex.notice = "no characteristic points found on the sampling grid; experiment empty";
    return ex;
  }
  ex.empty = false;
  const int ell = profile.ell;
  const double dp = profile.max_degree;
  std::vector<CharSample>& chosen = a.empty() ? b : a;
  ex.cls = a.empty() ? PointClass::B : PointClass::A;
  if (ex.cls == PointClass::A) {
    if (r > std::pow(eps, ell) * (1 + 1e-12)) throw PreconditionError("class A experiment needs r <= eps^l");
    ex.theta = 1.0 / ell;
    ex.exponent = p - ex.theta * dp;
  } else {
    ex.lambda = std::log(eps) / std::log(r);
    if (ex.lambda > 1.0 / (ell - 1) * (1 + 1e-12)) throw PreconditionError("class B experiment needs r <= eps^(l-1)");
    ex.theta = (1 + ex.lambda) / ell;
    ex.exponent = p - ex.theta * dp - (ell * ex.theta - 1) * (alg.layer_dim(ell) - profile.r_p);
  }
  const double rho = std::pow(r, ex.theta);

  const int use = std::min<int>(options.max_points, static_cast<int>(chosen.size()));
  for (int q = 0; q < use; ++q) {
    const std::size_t idx = use == 1 ? 0 : static_cast<std::size_t>(q) * (chosen.size() - 1) / (use - 1);
    const CharSample& cs = chosen[idx];
    CharPointCover cover;
    cover.t = cs.t;
    cover.x = cs.x;
    if (ex.cls == PointClass::B) {
      int alpha_l = 0;
      if (so.exact) {
        VectorXq tq(p);
        for (int i = 0; i < p; ++i) tq(i) = rational_from_double(cs.t(i));
        alpha_l = normal_form_exact(alg, chart, tq).alpha[ell - 1];
      } else {
        alpha_l = normal_form(alg, chart, cs.t).alpha[ell - 1];
      }
      cover.h = alg.layer_dim(ell) - alpha_l;
    }
    const VectorXd xinv = -cs.x;
    const MatrixXd jl = right_factor_jacobian(alg, xinv, cs.x) * chart.jacobian(cs.t);
    Eigen::JacobiSVD<MatrixXd> svd(jl);
    const double smin = svd.singularValues()(p - 1);
    if (!(smin > 0)) continue;
    double h = 2 * r / smin;
    std::vector<VectorXd> pts;
    for (int attempt = 0; attempt < 10; ++attempt) {
      pts.clear();
      Domain box{std::vector<double>(p), std::vector<double>(p)};
      for (int i = 0; i < p; ++i) {
        box.lo[i] = cs.t(i) - h;
        box.hi[i] = cs.t(i) + h;
      }
      double reach = 0;
      for (const auto& t : parameter_grid(box, options.local_points)) {
        if (!chart.domain().contains(t)) continue;
        VectorXd y = bch_product(alg, xinv, chart(t));
        if (y.norm() < r) {
          reach = std::max(reach, (t - cs.t).cwiseAbs().maxCoeff());
          pts.push_back(std::move(y));
        }
      }
      if (reach <= 0.9 * h) break;
      h *= 2;
    }
    PointCloud cloud(alg.dim(), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) cloud.col(static_cast<Eigen::Index>(i)) = pts[i];
    cover.samples_in_ball = pts.size();
    cover.count = pts.empty() ? 0 : covering_number(norm, cloud, rho / 2);
    ex.points.push_back(cover);
  }
  ex.ceiling = 0;
  for (const auto& c : ex.points) {
    const double ceil_c = (ex.cls == PointClass::A ? eps : std::pow(eps, c.h)) * std::pow(r, ex.exponent);
    ex.ceiling = std::max(ex.ceiling, ceil_c);
    ex.max_count = std::max(ex.max_count, c.count);
    ex.fitted_constant = std::max(ex.fitted_constant, static_cast<double>(c.count) / ceil_c);
  }
  return ex;
}

double spherical_hausdorff_premeasure(const HomogeneousQuasiNorm& norm, const PointCloud& points, double q,
                                      double delta, const PremeasureOptions& options) {
  if (!(q >= 0)) throw DomainError("premeasure: q must be nonnegative");
  if (!(delta > 0)) throw DomainError("premeasure: delta must be positive");
  if (points.cols() == 0) return 0;
  const double k = norm.quasi_triangle_constant();
  const int k0 = static_cast<int>(std::ceil(std::log2(4 * k / delta) - 1e-12));
  auto estimate = [&](int level, std::size_t* count) {
    const double rr = std::ldexp(1.0, -level);
    const std::size_t n = covering_number(norm, points, rr);
    if (count) *count = n;
    return static_cast<double>(n) * std::pow(4 * k * rr, q);
  };
  std::size_t count = 0;
  double best = estimate(k0, &count);
  if (!options.monotone) return best;
  // Finer levels count only while a cover ball still holds many samples.
  const auto resolved = static_cast<std::size_t>(points.cols()) / kSamplesPerBall;
  for (int level = k0 + 1; level < k0 + 60; ++level) {
    const double e = estimate(level, &count);
    if (count > resolved) break;
    best = std::min(best, e);
  }
  return best;
}

}  // namespace carnot
