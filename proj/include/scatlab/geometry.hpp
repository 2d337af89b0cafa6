#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scatlab/decay.hpp"
#include "scatlab/expr.hpp"

namespace scatlab {

// End metric dx^2 + phi(x)^2 g_Y on [0, oo) x T^n with a flat torus
// cross-section; a variable-coefficient core [-1, 0] is glued at x = 0.
// Distances along the end are the x coordinate itself.
struct WarpedMetric {
  int cross_dim = 1;          // torus dimension n; the manifold has dim n + 1
  ExprPtr warp;               // phi(x) > 0, exact derivatives of all orders
  double core_floor = 0.5;    // injectivity radius floor on the core
  double systole = 1.0;       // shortest closed geodesic of the cross-section
  int k_max = 4;              // derivative orders available

  int dim() const { return cross_dim + 1; }
  double warp_at(double x, int order = 0) const { return warp->deriv_eval(x, order); }

  static WarpedMetric cusp(int cross_dim);       // phi = e^{-x}
  static WarpedMetric cylinder(int cross_dim);   // phi = 1
  // phi = base * (1 + eps * envelope)
  static WarpedMetric perturbed(const WarpedMetric& base, double eps, ExprPtr envelope);
};

struct MetricPair {
  WarpedMetric g;
  WarpedMetric h;
  int order = 2;  // k
};

// k-th order pointwise difference: |g-h|_g + sum_{j<k} |(D_g)^j (D_g - D_h)|_g,
// evaluated exactly from the warp profiles and their derivatives.
std::vector<double> knorm_difference(const MetricPair& pair, int k,
                                     const std::vector<double>& xs);

// sum_{i=0}^k |(D_g)^i (g - h)|_g, the alternative characterization.
std::vector<double> gradient_characterization_norm(const MetricPair& pair, int k,
                                                   const std::vector<double>& xs);

struct EquivalenceReport {
  double C = 0.0;          // sup over the grid of knorm / beta(1+x)
  bool pass = false;       // ratio bounded (non-growing tail)
  double C_reversed = 0.0;
  bool pass_reversed = false;
  bool symmetric = false;  // pass == pass_reversed
  double tail_slope = 0.0;
};

EquivalenceReport check_beta_equivalence(const MetricPair& pair, int k,
                                         const DecayProfile& beta,
                                         double x_max = 60.0, int points = 240);

struct CharacterizationReport {
  bool knorm_pass = false;
  bool gradient_pass = false;
  bool agree = false;
  double C_knorm = 0.0;
  double C_gradient = 0.0;
};

// The two definitions of beta-equivalence must produce the same verdict.
CharacterizationReport nabla_characterization_check(const MetricPair& pair, int k,
                                                    const DecayProfile& beta,
                                                    double x_max = 60.0,
                                                    int points = 240);

struct CurvatureDecayReport {
  double C = 0.0;
  bool pass = false;
  bool bounded_g = false;  // curvature of order k-2 bounded for g
  bool bounded_h = false;  // and for h; the two verdicts must agree
};

// |(D_g)^i (R_g - R_h)|_g <= C beta for i <= k-2 (requires k >= 2).
CurvatureDecayReport curvature_difference_decay(const MetricPair& pair, int k,
                                                const DecayProfile& beta,
                                                double x_max = 60.0,
                                                int points = 240);

// Sectional curvatures of the warped product at x: planes containing the
// radial direction and tangential planes.
struct SectionalCurvature {
  double radial;      // -phi''/phi
  double tangential;  // -(phi'/phi)^2 (flat cross-section)
};
SectionalCurvature sectional_curvature(const WarpedMetric& m, double x);

struct InjectivityModel {
  double K = 0.0;             // |sectional curvature| <= K over the sampled end
  std::vector<double> xs;
  std::vector<double> itilde;      // min(pi/(12 sqrt K), i(x))
  bool cap_disabled = false;       // K == 0: the curvature cap does not apply
  double decay_constant = 0.0;     // fitted C in itilde(x) >= C itilde(p)^m e^{-(m-1) sqrt K x}
  bool decay_bound_ok = false;
  double pair_constant = 0.0;      // fitted C in itilde(y) >= C itilde(x) e^{-(m-1) pi d /(12 itilde(x))}
  bool pair_bound_ok = false;
};

InjectivityModel injectivity_envelope(const WarpedMetric& metric,
                                      double x_max = 40.0, int points = 200);

struct VolumeBounds {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_valid = true;  // false when r > pi/sqrt(K)
};

// Volume of a ball of radius r in dimension n under |K_M| <= K:
// omega_n int_0^r (sin t sqrt K / sqrt K)^{n-1} dt <= Vol <= same with sinh.
VolumeBounds ball_volume_bounds(double r, double K, int n);

// Largest / smallest eigenvalue ratio of h against g as quadratic forms at x.
// For diagonal warped metrics the ratios are {1, (psi/phi)^2}.
std::pair<double, double> quasi_isometry_ratio(const MetricPair& pair, double x);

}  // namespace scatlab
