#pragma once

#include "carnot/manifold.hpp"
#include "carnot/metric.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace carnot {

enum class Estimator { quadrature, monte_carlo };
std::string to_string(Estimator e);

struct IntegrationOptions {
  Estimator estimator = Estimator::quadrature;
  /// Midpoint nodes per axis; 0 picks 4096, 256, 48, 16 for p = 1, 2, 3, > 3.
  int points_per_axis = 0;
  std::size_t samples = 200000;
  std::uint64_t seed = 0;
};

struct MeasureResult {
  double value = 0;
  Estimator estimator = Estimator::quadrature;
  std::size_t samples = 0;
  /// Zero for quadrature.
  double std_error = 0;
};

/// Integral over `region` of |pi_D (tangent p-vector at Phi(t))| in the
/// graded frame. D < 0 means D(p); D outside [p, D(p)] raises DomainError.
MeasureResult intrinsic_measure(const StratifiedAlgebra& alg, const Chart& chart, const Domain& region, int degree = -1,
                                const IntegrationOptions& options = {});

/// Constant symmetric positive definite auxiliary metric. In the
/// left-invariant frame (default) |v|^2 = c^T G c with c the frame
/// coordinates of v, so G = Id is the graded metric; in coordinates
/// |v|^2 = v^T G v. An empty G means the identity.
enum class MetricFrame { left_invariant, coordinates };

struct AuxiliaryMetric {
  MatrixXd g;
  MetricFrame frame = MetricFrame::left_invariant;
};

/// Throws DomainError unless g is empty or an n x n SPD matrix.
void check_metric(const AuxiliaryMetric& metric, int n);

/// Gram-determinant norm of the tangent p-vector in the auxiliary metric.
double tangent_norm(const AuxiliaryMetric& metric, const TangentData<double>& tangent);

MeasureResult riemannian_measure(const StratifiedAlgebra& alg, const Chart& chart, const Domain& region,
                                 const AuxiliaryMetric& metric = {}, const IntegrationOptions& options = {});

struct MetricFactorOptions {
  /// Force sampling even where the ray formula applies (p <= 2).
  bool monte_carlo = false;
  std::size_t samples = 400000;
  std::uint64_t seed = 0;
  /// Angular nodes for p = 2.
  int angles = 16384;
};

struct MetricFactorResult {
  double value = 0;
  double std_error = 0;
  std::string method;
  std::size_t samples = 0;
};

/// Euclidean p-area of S cap {N < 1}, S the plane of the simple p-vector tau.
///
/// N(s v) < 1 iff s < rho(v) = min_j 1 / (eps_j |v^j|_inf), so the section
/// is star-shaped: p = 1 gives 2 rho(u) for unit u and p = 2 gives
/// (1/2) int rho^2 over the circle. Otherwise, or on request, uniform samples
/// in the box around S cap Box(0, C_BB) are counted.
MetricFactorResult metric_factor(const HomogeneousQuasiNorm& norm, const Multivector<double>& tau,
                                 const MetricFactorOptions& options = {});

struct BlowupOptions {
  AuxiliaryMetric metric;
  /// Grid nodes per axis in rescaled parameters; 0 picks 8192 (p = 1) or 192.
  int points_per_axis = 0;
  double initial_half_width = 4;
  int max_doublings = 12;
  /// Samples of F cap Pi per axis in the set-distance computation.
  int subgroup_samples = 4001;
  double rel_tol = kDefaultDegreeTol;
};

struct BlowupStep {
  double r = 0;
  /// mu~(Sigma cap B(x, r)) / r^D(p).
  double density_ratio = 0;
  /// Euclidean Hausdorff distance of F cap delta_{1/r}(x^{-1} Sigma) and F cap Pi.
  double hausdorff = 0;
  /// Half-width of the rescaled parameter box that contained the ball preimage.
  double half_width = 0;
  std::size_t in_ball = 0;
  /// Part of the rescaled box fell outside the chart domain.
  bool clipped_by_domain = false;
};

struct BlowupTrace {
  VectorXd t0;
  VectorXd x;
  int degree = 0;
  std::vector<int> subdegrees;
  MatrixXd transform;
  /// Orthonormal basis (n x p) of the limit subgroup Pi.
  MatrixXd subgroup_basis;
  bool requires_row_permutation = false;
  double theta = 0;
  /// |pi_D of the g~-unit tangent p-vector|.
  double projected_norm = 0;
  double predicted_limit = 0;
  std::vector<BlowupStep> steps;
};

/// Rescaled preimage sampling: t = t0 + T Lambda_r u, u in [-K, K]^p with
/// Lambda_r = diag(r^sigma_j), doubling K while hits reach the outer tenth.
/// Requires Phi(t0) transversal (PreconditionError otherwise) and strictly
/// decreasing radii in (0, 1].
BlowupTrace blowup_trace(const HomogeneousQuasiNorm& norm, const Chart& chart, const VectorXd& t0,
                         const std::vector<double>& radii, const BlowupOptions& options = {});

/// k log-spaced values from a to b inclusive (either order).
std::vector<double> log_spaced(double a, double b, int k);

struct DimEstimate {
  std::vector<double> scales;
  std::vector<std::size_t> counts;
  double slope = 0;
  double intercept = 0;
  /// 95% Student-t half-width of the slope.
  double half_width = 0;
  /// Root mean square of the regression residuals.
  double residual = 0;
};

/// Least squares of log N(r) against log(1/r).
DimEstimate fit_log_log(const std::vector<double>& scales, const std::vector<std::size_t>& counts);

/// Needs >= 4 scales spanning >= 2 decades (DomainError otherwise).
DimEstimate box_dimension(const HomogeneousQuasiNorm& norm, const PointCloud& points, const std::vector<double>& scales);

/// Images of the tensor grid with m nodes per axis (endpoints included).
PointCloud chart_point_cloud(const Chart& chart, const Domain& region, int m);

struct CharsetBound {
  int p = 0;
  int ell = 0;
  int max_degree = 0;
  Rational lambda;
  Rational value;
  /// 1: l = 1; 2: lambda >= 1/(l-1); 3: lambda <= 1/(l-1), l >= 2.
  int case_id = 0;

  double value_d() const { return to_double(value); }
};

/// Upper bound for the Hausdorff dimension of the characteristic set.
/// lambda outside (0, 1] raises DomainError.
CharsetBound charset_dim_bound(const DegreeProfile& profile, const Rational& lambda);

struct CharsetExperimentOptions {
  /// Grid per axis for locating characteristic points.
  int grid = 41;
  /// Exact degrees on the grid (polynomial charts).
  bool exact = true;
  /// Local samples per axis around each characteristic point.
  int local_points = 121;
  /// Characteristic points used, spread evenly over those found.
  int max_points = 6;
};

struct CharPointCover {
  VectorXd t;
  VectorXd x;
  /// n_l - alpha_l.
  int h = 0;
  std::size_t samples_in_ball = 0;
  std::size_t count = 0;
};

struct CharsetExperiment {
  bool empty = true;
  std::string notice;
  PointClass cls = PointClass::A;
  int ell = 0;
  double eps = 0;
  double r = 0;
  double theta = 0;
  /// log eps / log r; B experiments only.
  double lambda = 0;
  double exponent = 0;
  /// Predicted count up to a constant: eps r^e (A) or eps^H r^e (B).
  double ceiling = 0;
  std::vector<CharPointCover> points;
  std::size_t max_count = 0;
  /// max_count / ceiling, the empirical constant.
  double fitted_constant = 0;
};

/// Covers (x^{-1} Sigma) cap B_E(0, r) around characteristic points by
/// quasi-balls of radius r^theta: theta = 1/l for class A (needs r <= eps^l),
/// theta = (1 + lambda)/l with eps = r^lambda for class B (needs l >= 2 and
/// lambda <= 1/(l-1)). Class A points are used when present.
CharsetExperiment charset_covering_experiment(const HomogeneousQuasiNorm& norm, const Chart& chart, double eps,
                                              double r, const CharsetExperimentOptions& options = {});

struct PremeasureOptions {
  /// Minimum over the admissible dyadic levels while cover balls average at
  /// least 16 samples, which makes the estimate nonincreasing in delta.
  bool monotone = false;
};

/// sum (diam B_i)^q over the greedy cover at the coarsest dyadic radius
/// r = 2^{-k} with 4 K r <= delta; 4 K r bounds the diameter of a cover ball.
double spherical_hausdorff_premeasure(const HomogeneousQuasiNorm& norm, const PointCloud& points, double q,
                                      double delta, const PremeasureOptions& options = {});

}  // namespace carnot
