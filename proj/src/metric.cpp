#include "carnot/metric.hpp"

#include "carnot/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace carnot {

namespace {

constexpr int kMax = StratifiedAlgebra::kMaxDim;

double layer_sup(const StratifiedAlgebra& alg, const double* x, int j) {
  double m = 0;
  const int lo = alg.layer_offset(j), hi = lo + alg.layer_dim(j);
  for (int i = lo; i < hi; ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

double root(double v, int j) {
  if (j == 1) return v;
  if (j == 2) return std::sqrt(v);
  if (j == 3) return std::cbrt(v);
  return std::pow(v, 1.0 / j);
}

}  // namespace

HomogeneousQuasiNorm::HomogeneousQuasiNorm(StratifiedAlgebra alg, std::vector<double> weights)
    : alg_(std::move(alg)), weights_(std::move(weights)) {
  if (weights_.empty()) weights_.assign(alg_.step(), 1.0);
  if (static_cast<int>(weights_.size()) != alg_.step())
    throw DimensionError("quasi-norm needs one weight per layer");
  for (double w : weights_)
    if (!(w > 0) || !std::isfinite(w)) throw DomainError("quasi-norm weights must be positive");

  // Pairs (y, w) with w dilated against y so every relative scale is probed.
  Rng rng(0, "quasi-triangle");
  const int n = alg_.dim();
  std::array<double, kMax> y{}, w{}, yw{};
  for (int s = 0; s < 20000; ++s) {
    const double ry = std::pow(10.0, rng.uniform(-2, 0)), rw = std::pow(10.0, rng.uniform(-2, 0));
    for (int i = 0; i < n; ++i) {
      y[i] = rng.uniform(-1, 1) * std::pow(ry, alg_.degree(i));
      w[i] = rng.uniform(-1, 1) * std::pow(rw, alg_.degree(i));
    }
    bch_product_raw(alg_, y.data(), w.data(), yw.data());
    const double denom = (*this)(y.data()) + (*this)(w.data());
    if (denom > 0) k_ = std::max(k_, (*this)(yw.data()) / denom);
  }
}

double HomogeneousQuasiNorm::operator()(const double* x) const {
  double m = 0;
  for (int j = 1; j <= alg_.step(); ++j) m = std::max(m, root(weights_[j - 1] * layer_sup(alg_, x, j), j));
  return m;
}

double HomogeneousQuasiNorm::operator()(const VectorXd& x) const {
  check_point(alg_, x);
  return (*this)(x.data());
}

double HomogeneousQuasiNorm::distance(const double* x, const double* y) const {
  const int n = alg_.dim();
  std::array<double, kMax> neg, z;
  for (int i = 0; i < n; ++i) neg[i] = -x[i];
  bch_product_raw(alg_, neg.data(), y, z.data());
  return (*this)(z.data());
}

double HomogeneousQuasiNorm::distance(const VectorXd& x, const VectorXd& y) const {
  check_point(alg_, x);
  check_point(alg_, y);
  return distance(x.data(), y.data());
}

double box_gauge(const StratifiedAlgebra& alg, const double* x) {
  double m = 0;
  for (int j = 1; j <= alg.step(); ++j) m = std::max(m, root(layer_sup(alg, x, j), j));
  return m;
}

double box_gauge(const StratifiedAlgebra& alg, const VectorXd& x) {
  check_point(alg, x);
  return box_gauge(alg, x.data());
}

double quasi_distance(const HomogeneousQuasiNorm& norm, const VectorXd& x, const VectorXd& y) {
  return norm.distance(y, x);
}

BoxBallReport box_ball_constant(const HomogeneousQuasiNorm& norm, std::size_t probes, std::uint64_t seed) {
  const auto& alg = norm.algebra();
  const int n = alg.dim();
  BoxBallReport rep;
  std::vector<VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    VectorXd e = VectorXd::Zero(n);
    e(i) = 1;
    pts.push_back(e);
  }
  Rng rng(seed, "box-ball");
  for (std::size_t s = pts.size(); s < probes; ++s) {
    VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(-1, 1);
    pts.push_back(x);
  }
  double c = 1;
  for (const auto& x : pts) {
    const double nx = norm(x), bx = box_gauge(alg, x);
    if (nx == 0 || bx == 0) continue;
    c = std::max({c, nx / bx, bx / nx});
  }
  rep.c_bb = c;
  rep.probes = pts.size();
  // Inclusions on the probes, rescaled onto the unit quasi-sphere and the two boxes.
  for (const auto& x : pts) {
    const double nx = norm(x), bx = box_gauge(alg, x);
    if (nx == 0) continue;
    if (bx > c * nx * (1 + 1e-12) || nx > c * bx * (1 + 1e-12)) rep.inclusions_verified = false;
  }
  return rep;
}

KillLayersResult kill_layers(const HomogeneousQuasiNorm& norm, const VectorXd& x, int j, double r) {
  const auto& alg = norm.algebra();
  check_point(alg, x);
  if (j < 1 || j > alg.step()) throw DomainError("kill_layers: layer index out of range");
  if (!(r > 0) || r > 1) throw PreconditionError("kill_layers: need 0 < r <= 1");
  if (x.norm() > r * (1 + 1e-12)) throw PreconditionError("kill_layers: need |x| <= r");
  VectorXd cur = x;
  for (int k = 1; k <= j; ++k) {
    VectorXd y = VectorXd::Zero(alg.dim());
    layer(alg, y, k) = -layer(alg, cur, k);
    cur = bch_product(alg, cur, y);
    layer(alg, cur, k).setZero();
  }
  KillLayersResult res;
  res.distance = norm.distance(x, cur);
  res.scale = std::pow(r, 1.0 / j);
  res.x_tilde = std::move(cur);
  return res;
}

namespace {

// Cells of side Delta_k on up to three coordinates. If d(c, p) < 2r then
// |p_k - c_k| <= Delta_k, so p and c lie in neighboring cells.
class CenterGrid {
 public:
  CenterGrid(const HomogeneousQuasiNorm& norm, const PointCloud& pts, double r) {
    const auto& alg = norm.algebra();
    const int n = alg.dim();
    if (pts.cols() == 0) return;
    std::vector<double> lo(n), hi(n), m(n), b(n), delta(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = pts.row(i).minCoeff();
      hi[i] = pts.row(i).maxCoeff();
      m[i] = std::max(std::abs(lo[i]), std::abs(hi[i]));
      b[i] = std::pow(2 * r, alg.degree(i)) / norm.weight(alg.degree(i));
    }
    for (int k = 0; k < n; ++k) {
      double d = b[k];
      for (const auto& [exps, c] : alg.bch_polynomials()[k].terms()) {
        double t = std::abs(c.convert_to<double>());
        for (int v = 0; v < n; ++v) {
          if (exps[v]) t *= std::pow(m[v], exps[v]);
          if (exps[n + v]) t *= std::pow(b[v], exps[n + v]);
        }
        d += t;
      }
      delta[k] = d * (1 + 1e-9) + 1e-300;
    }
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int c) { return (hi[a] - lo[a]) / delta[a] > (hi[c] - lo[c]) / delta[c]; });
    for (int i = 0; i < n && static_cast<int>(axes_.size()) < 3; ++i) {
      const int k = order[i];
      const double cells = (hi[k] - lo[k]) / delta[k];
      if (cells < 2) break;
      axes_.push_back(k);
      origin_.push_back(lo[k]);
      cell_.push_back(std::max(delta[k], (hi[k] - lo[k]) / double(1 << 20)));
    }
  }

  void insert(const double* p, int idx) { cells_[key(p, 0)].push_back(idx); }

  template <typename F>
  bool any_neighbor(const double* p, F&& pred) const {
    const int h = static_cast<int>(axes_.size());
    int total = 1;
    for (int a = 0; a < h; ++a) total *= 3;
    std::array<long, 3> base{};
    for (int a = 0; a < h; ++a) base[a] = index(p, a);
    for (int code = 0; code < total; ++code) {
      std::uint64_t kk = 0;
      int c = code;
      bool valid = true;
      for (int a = 0; a < h; ++a) {
        const long v = base[a] + (c % 3) - 1;
        c /= 3;
        if (v < 0 || v >= (1L << 21)) valid = false;
        kk = (kk << 21) | static_cast<std::uint64_t>(v & ((1L << 21) - 1));
      }
      if (!valid) continue;
      auto it = cells_.find(kk);
      if (it == cells_.end()) continue;
      for (int idx : it->second)
        if (pred(idx)) return true;
    }
    return false;
  }

 private:
  long index(const double* p, int a) const {
    return static_cast<long>(std::floor((p[axes_[a]] - origin_[a]) / cell_[a]));
  }
  std::uint64_t key(const double* p, int) const {
    std::uint64_t kk = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a)
      kk = (kk << 21) | static_cast<std::uint64_t>(index(p, static_cast<int>(a)) & ((1L << 21) - 1));
    return kk;
  }

  std::vector<int> axes_;
  std::vector<double> origin_, cell_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

}  // namespace

CoverReport greedy_5r_cover(const HomogeneousQuasiNorm& norm, const PointCloud& points, double r) {
  if (!(r > 0)) throw DomainError("greedy_5r_cover: r must be positive");
  if (points.rows() != norm.algebra().dim() && points.cols() > 0)
    throw DimensionError("point cloud dimension does not match the algebra");
  CoverReport rep;
  rep.r = r;
  rep.k = norm.quasi_triangle_constant();
  rep.cover_radius = 2 * r;
  CenterGrid grid(norm, points, r);
  const double sep = 2 * r;
  for (int i = 0; i < points.cols(); ++i) {
    const double* p = points.col(i).data();
    const bool covered = grid.any_neighbor(p, [&](int c) { return norm.distance(points.col(c).data(), p) < sep; });
    if (covered) continue;
    rep.centers.push_back(i);
    grid.insert(p, i);
  }
  rep.count = rep.centers.size();
  return rep;
}

std::size_t covering_number(const HomogeneousQuasiNorm& norm, const PointCloud& points, double r) {
  return greedy_5r_cover(norm, points, r).count;
}

PointCloud read_point_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open point cloud " + path);
  std::string line;
  if (!std::getline(in, line)) return PointCloud(0, 0);
  const auto cols = static_cast<int>(std::count(line.begin(), line.end(), ',') + 1);
  std::vector<double> vals;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw StructuralError("bad number '" + cell + "' in " + path);
      }
      ++c;
    }
    if (c != cols) throw StructuralError("ragged row in " + path);
    ++rows;
  }
  PointCloud pc(cols, rows);
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i < cols; ++i) pc(i, j) = vals[static_cast<std::size_t>(j) * cols + i];
  return pc;
}

void write_point_cloud_csv(const std::string& path, const PointCloud& points) {
  std::ofstream out(path);
  if (!out) throw StructuralError("cannot write " + path);
  for (int i = 0; i < points.rows(); ++i) out << (i ? "," : "") << "x" << (i + 1);
  out << "\n";
  for (int j = 0; j < points.cols(); ++j) {
    for (int i = 0; i < points.rows(); ++i) out << (i ? "," : "") << fmt::format("{:.17g}", points(i, j));
    out << "\n";
  }
}

}  // namespace carnot
