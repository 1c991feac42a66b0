#include "carnot/exterior.hpp"

#include <Eigen/QR>

#include <cmath>
#include <sstream>

namespace carnot {

int multi_index_degree(const StratifiedAlgebra& alg, const MultiIndex& alpha) {
  int d = 0;
  for (int i : alpha) d += alg.degree(i);
  return d;
}

DegreeProfile degree_profile(const StratifiedAlgebra& alg, int p) {
  const int n = alg.dim(), s = alg.step();
  if (p < 1 || p > n) throw DomainError("degree_profile: p must lie in [1, n]");
  DegreeProfile prof;
  prof.p = p;
  // l = s if p <= n_s, else the unique l with sum_{j>l} n_j < p <= sum_{j>=l} n_j.
  int above = 0, ell = s;
  for (int j = s; j >= 1; --j) {
    if (p <= above + alg.layer_dim(j)) {
      ell = j;
      break;
    }
    above += alg.layer_dim(j);
  }
  if (ell != alg.degree(n - p)) throw Error("degree_profile: inconsistent l(p)");
  prof.ell = ell;
  prof.r_p = p - above;
  prof.max_degree = ell * prof.r_p;
  for (int j = ell + 1; j <= s; ++j) prof.max_degree += j * alg.layer_dim(j);
  prof.sigma.assign(prof.r_p, ell);
  for (int j = ell + 1; j <= s; ++j) prof.sigma.insert(prof.sigma.end(), alg.layer_dim(j), j);
  return prof;
}

VectorXd subdilation(const DegreeProfile& profile, double r, const VectorXd& xi) {
  if (!(r > 0)) throw DomainError("subdilation: r must be positive");
  if (xi.size() != profile.p) throw DimensionError("subdilation: vector length differs from p");
  VectorXd out = xi;
  for (int j = 0; j < profile.p; ++j) out(j) *= std::pow(r, profile.sigma[j]);
  return out;
}

SimplePlane simple_plane(const Multivector<double>& v, double rel_tol) {
  const int n = v.dim(), p = v.grade();
  SimplePlane out;
  if (v.is_zero() || p == 0) return out;
  // Column for each (p-1)-index beta: the vector sum_i c_{beta + i} (+-) e_i.
  std::vector<VectorXd> cols;
  for_each_combination(n, p - 1, [&](const std::vector<int>& beta) {
    VectorXd w = VectorXd::Zero(n);
    bool any = false;
    for (int i = 0; i < n; ++i) {
      if (std::find(beta.begin(), beta.end(), i) != beta.end()) continue;
      MultiIndex a = beta;
      auto pos = std::lower_bound(a.begin(), a.end(), i);
      const int sign = ((pos - a.begin()) % 2 == 0) ? 1 : -1;
      a.insert(pos, i);
      const double c = v.coeff(a);
      if (c != 0) {
        w(i) = sign * c;
        any = true;
      }
    }
    if (any) cols.push_back(w);
  });
  MatrixXd m(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = cols[j];
  Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
  qr.setThreshold(rel_tol);
  out.contraction_rank = static_cast<int>(qr.rank());
  out.simple = out.contraction_rank == p;
  if (out.simple) {
    MatrixXd q = qr.householderQ();
    out.basis = q.leftCols(p);
  }
  return out;
}

std::string multi_index_key(const MultiIndex& a) {
  std::string s;
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i] + 1);
  return s;
}

MultiIndex parse_multi_index_key(const std::string& key) {
  MultiIndex a;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(part, &used);
      if (used != part.size() && part.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(part);
      a.push_back(v - 1);
    } catch (const std::exception&) {
      throw StructuralError("bad multi-index key '" + key + "'");
    }
  }
  return a;
}

}  // namespace carnot
