#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace scatlab {

// Finite point sample of a metric space. Distances come either from an
// explicit matrix (small spaces) or from coordinates with a named metric, so
// 10^4-point clouds never materialize an N^2 matrix.
class FiniteMetricSpace {
public:
  enum class Metric { Euclidean, HyperbolicDisk, Explicit, Circle };

  static FiniteMetricSpace from_matrix(std::vector<std::vector<double>> dist);
  static FiniteMetricSpace euclidean(std::vector<std::vector<double>> coords);
  // Points in the unit disk with the standard hyperbolic distance.
  static FiniteMetricSpace hyperbolic_disk(std::vector<std::array<double, 2>> points);
  // Uniform sample of a circle of given circumference (arc-length metric).
  static FiniteMetricSpace circle(int n_points, double circumference);

  int size() const { return n_; }
  double dist(int i, int j) const;

  // Audits symmetry / zero diagonal / triangle inequality on random triples.
  bool audit(int triples, std::uint64_t seed, std::string* msg = nullptr) const;

private:
  FiniteMetricSpace() = default;
  int n_ = 0;
  Metric metric_ = Metric::Explicit;
  std::vector<std::vector<double>> matrix_;
  std::vector<std::vector<double>> coords_;
  double circumference_ = 0.0;
};

struct CoverReport {
  std::vector<int> centers;        // in greedy order
  std::vector<double> radii;       // h(x_i)
  bool covers = false;             // every point lies in some B_{h(x_i)}(x_i)
  double separation = 0.0;         // min_{i<j} d(x_i,x_j)/min(h_i,h_j); >= 1
  int multiplicity = 0;            // max over points of #{j : point in B_{a h_j}(x_j)}
  double a = 1.0;
};

// Greedy construction: scan points nearest-first from a base point (ties by
// index) and keep a point as a center whenever no earlier center covers it.
CoverReport greedy_cover(const FiniteMetricSpace& space,
                         const std::vector<double>& radius_fn, double a = 1.0,
                         int base_point = 0);

struct KappaEstimate {
  int kappa = 0;                  // upper bound by construction
  std::vector<int> witness;       // the greedy (s - eps)-cover centers
};

// Covering invariant: build an (s-eps)-cover greedily and count the worst
// number of (3s+eps)-balls about its centers containing one point.
KappaEstimate kappa_estimate(const FiniteMetricSpace& space, double s, double eps);

}  // namespace scatlab
