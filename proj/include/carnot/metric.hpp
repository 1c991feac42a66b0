#pragma once

#include "carnot/algebra.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace carnot {

/// Finite point set in G, one point per column.
using PointCloud = MatrixXd;

/// N(x) = max_j (eps_j |x^j|_inf)^{1/j}, with d(x, y) = N(x^{-1} y).
///
/// N is homogeneous of degree one under dilations and N(-x) = N(x), so d is
/// symmetric and left invariant. It satisfies the triangle inequality only up
/// to the constant K, estimated once at construction by sampling.
class HomogeneousQuasiNorm {
 public:
  explicit HomogeneousQuasiNorm(StratifiedAlgebra alg, std::vector<double> weights = {});

  const StratifiedAlgebra& algebra() const { return alg_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(int layer) const { return weights_[layer - 1]; }

  double operator()(const double* x) const;
  double operator()(const VectorXd& x) const;
  double distance(const double* x, const double* y) const;
  double distance(const VectorXd& x, const VectorXd& y) const;

  /// Sampled quasi-triangle constant, >= 1.
  double quasi_triangle_constant() const { return k_; }

 private:
  StratifiedAlgebra alg_;
  std::vector<double> weights_;
  double k_ = 1.0;
};

/// Gauge of the unit-box family: max_j |x^j|_inf^{1/j}, so Box(0, r) = {box_gauge < r}.
double box_gauge(const StratifiedAlgebra& alg, const double* x);
double box_gauge(const StratifiedAlgebra& alg, const VectorXd& x);

double quasi_distance(const HomogeneousQuasiNorm& norm, const VectorXd& x, const VectorXd& y);

struct BoxBallReport {
  double c_bb = 1.0;
  std::size_t probes = 0;
  /// Box(0, 1/C) in B(0, 1) in Box(0, C) held on every probe.
  bool inclusions_verified = true;
};

/// Smallest sampled C with Box(0, r/C) in B(0, r) in Box(0, C r). By
/// homogeneity and left invariance r = 1, x = 0 suffice. Probes include the
/// layer axes, where the ratio N / box_gauge is extremal.
BoxBallReport box_ball_constant(const HomogeneousQuasiNorm& norm, std::size_t probes = 100000, std::uint64_t seed = 0);

struct KillLayersResult {
  VectorXd x_tilde;
  /// d(x, x_tilde).
  double distance = 0;
  /// r^{1/j}.
  double scale = 0;
};

/// Multiplies x on the right by (0, .., -x^k, .., 0) for k = 1..j, which
/// zeroes layers 1..j exactly. Requires |x| <= r <= 1 (Euclidean norm).
KillLayersResult kill_layers(const HomogeneousQuasiNorm& norm, const VectorXd& x, int j, double r);

struct CoverReport {
  double r = 0;
  double k = 1;
  std::size_t count = 0;
  /// Column indices of the centers in the input cloud, in selection order.
  std::vector<int> centers;
  /// Every input point lies within this quasi-distance of a center (2r).
  double cover_radius = 0;
};

/// Greedy maximal separated subset in input order: a point becomes a center
/// when its distance to every earlier center is >= 2r. The r-balls around
/// centers are then disjoint and the 2r-balls (hence the 5Kr-balls) cover.
CoverReport greedy_5r_cover(const HomogeneousQuasiNorm& norm, const PointCloud& points, double r);

std::size_t covering_number(const HomogeneousQuasiNorm& norm, const PointCloud& points, double r);

/// CSV with header x1,..,xn and one point per row.
PointCloud read_point_cloud_csv(const std::string& path);
void write_point_cloud_csv(const std::string& path, const PointCloud& points);

}  // namespace carnot
