#include "scatlab/covering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace scatlab {

FiniteMetricSpace FiniteMetricSpace::from_matrix(
    std::vector<std::vector<double>> dist) {
  FiniteMetricSpace s;
  s.metric_ = Metric::Explicit;
  s.n_ = static_cast<int>(dist.size());
  s.matrix_ = std::move(dist);
  for (const auto& row : s.matrix_)
    if (static_cast<int>(row.size()) != s.n_)
      throw std::invalid_argument("distance matrix must be square");
  return s;
}

FiniteMetricSpace FiniteMetricSpace::euclidean(
    std::vector<std::vector<double>> coords) {
  FiniteMetricSpace s;
  s.metric_ = Metric::Euclidean;
  s.n_ = static_cast<int>(coords.size());
  s.coords_ = std::move(coords);
  return s;
}

FiniteMetricSpace FiniteMetricSpace::hyperbolic_disk(
    std::vector<std::array<double, 2>> points) {
  FiniteMetricSpace s;
  s.metric_ = Metric::HyperbolicDisk;
  s.n_ = static_cast<int>(points.size());
  s.coords_.reserve(points.size());
  for (const auto& p : points) {
    if (p[0] * p[0] + p[1] * p[1] >= 1.0)
      throw std::invalid_argument("hyperbolic_disk: point outside the unit disk");
    s.coords_.push_back({p[0], p[1]});
  }
  return s;
}

FiniteMetricSpace FiniteMetricSpace::circle(int n_points, double circumference) {
  FiniteMetricSpace s;
  s.metric_ = Metric::Circle;
  s.n_ = n_points;
  s.circumference_ = circumference;
  s.coords_.resize(n_points);
  for (int i = 0; i < n_points; ++i)
    s.coords_[i] = {circumference * i / n_points};
  return s;
}

double FiniteMetricSpace::dist(int i, int j) const {
  switch (metric_) {
    case Metric::Explicit:
      return matrix_[i][j];
    case Metric::Euclidean: {
      double s = 0.0;
      for (std::size_t k = 0; k < coords_[i].size(); ++k) {
        const double d = coords_[i][k] - coords_[j][k];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case Metric::HyperbolicDisk: {
      const double dx = coords_[i][0] - coords_[j][0];
      const double dy = coords_[i][1] - coords_[j][1];
      const double ri = coords_[i][0] * coords_[i][0] + coords_[i][1] * coords_[i][1];
      const double rj = coords_[j][0] * coords_[j][0] + coords_[j][1] * coords_[j][1];
      const double arg = 1.0 + 2.0 * (dx * dx + dy * dy) / ((1.0 - ri) * (1.0 - rj));
      return std::acosh(std::max(1.0, arg));
    }
    case Metric::Circle: {
      const double d = std::abs(coords_[i][0] - coords_[j][0]);
      return std::min(d, circumference_ - d);
    }
  }
  return 0.0;
}

bool FiniteMetricSpace::audit(int triples, std::uint64_t seed,
                              std::string* msg) const {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n_ - 1);
  for (int t = 0; t < triples; ++t) {
    const int i = pick(rng), j = pick(rng), k = pick(rng);
    const double dij = dist(i, j), dji = dist(j, i);
    if (std::abs(dij - dji) > 1e-12 * (1.0 + dij)) {
      if (msg) *msg = "asymmetric distance";
      return false;
    }
    if (dist(i, i) != 0.0) {
      if (msg) *msg = "nonzero diagonal";
      return false;
    }
    if (dij > dist(i, k) + dist(k, j) + 1e-9 * (1.0 + dij)) {
      if (msg) {
        std::ostringstream os;
        os << "triangle violation on (" << i << "," << j << "," << k << ")";
        *msg = os.str();
      }
      return false;
    }
  }
  return true;
}

CoverReport greedy_cover(const FiniteMetricSpace& space,
                         const std::vector<double>& radius_fn, double a,
                         int base_point) {
  if (a < 1.0) throw std::invalid_argument("greedy_cover: a must be >= 1");
  CoverReport rep;
  rep.a = a;
  const int n = space.size();
  if (n == 0) return rep;
  if (static_cast<int>(radius_fn.size()) != n)
    throw std::invalid_argument("greedy_cover: radius function size mismatch");
  for (double h : radius_fn)
    if (!(h > 0.0)) throw std::invalid_argument("greedy_cover: radii must be positive");

  // Nearest-first scan order from the base point; ties by lowest index.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dbase(n);
  for (int i = 0; i < n; ++i) dbase[i] = space.dist(base_point, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return dbase[i] < dbase[j]; });

  for (int p : order) {
    bool covered = false;
    for (int c : rep.centers)
      if (space.dist(p, c) < radius_fn[c]) {
        covered = true;
        break;
      }
    if (!covered) rep.centers.push_back(p);
  }
  for (int c : rep.centers) rep.radii.push_back(radius_fn[c]);

  // Coverage audit (exact on the finite sample, open balls).
  rep.covers = true;
  for (int p = 0; p < n && rep.covers; ++p) {
    bool covered = false;
    for (int c : rep.centers)
      if (space.dist(p, c) < radius_fn[c]) {
        covered = true;
        break;
      }
    if (!covered) rep.covers = false;
  }

  // Separation d(x_i, x_j) >= min(h_i, h_j).
  rep.separation = 1e300;
  const int m = static_cast<int>(rep.centers.size());
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double d = space.dist(rep.centers[i], rep.centers[j]);
      const double hmin = std::min(rep.radii[i], rep.radii[j]);
      rep.separation = std::min(rep.separation, d / hmin);
    }
  if (m < 2) rep.separation = 1e300;

  // Multiplicity: worst count over all points of inflated balls containing it.
  rep.multiplicity = 0;
  for (int p = 0; p < n; ++p) {
    int cnt = 0;
    for (int j = 0; j < m; ++j)
      if (space.dist(p, rep.centers[j]) < a * rep.radii[j]) ++cnt;
    rep.multiplicity = std::max(rep.multiplicity, cnt);
  }
  return rep;
}

KappaEstimate kappa_estimate(const FiniteMetricSpace& space, double s, double eps) {
  if (!(s > eps && eps >= 0.0))
    throw std::invalid_argument("kappa_estimate: need s > eps >= 0");
  KappaEstimate est;
  const int n = space.size();
  if (n == 0) return est;
  std::vector<double> h(n, s - eps);
  const CoverReport cover = greedy_cover(space, h, 1.0, 0);
  est.witness = cover.centers;

  const double big = 3.0 * s + eps;
  for (int p = 0; p < n; ++p) {
    int cnt = 0;
    for (int c : est.witness)
      if (space.dist(p, c) < big) ++cnt;
    est.kappa = std::max(est.kappa, cnt);
  }
  return est;
}

}  // namespace scatlab
