#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scatlab/decay.hpp"
#include "scatlab/expr.hpp"

namespace scatlab {

// Per-mode reduction data for an end. Cusp cross-sections are flat tori of
// circumference 2*pi per factor; cylinder modes carry their own eigenvalues.
struct EndModel {
  enum class Kind { Cusp, Cylinder };
  Kind kind = Kind::Cylinder;
  int cross_dim = 1;                     // n (cusp only)
  std::vector<double> mode_eigenvalues;  // ascending, first entry 0

  static EndModel cusp(int n, int mode_count);
  static EndModel cylinder(std::vector<double> mu);
};

enum class Formulation { CuspU, LogX, Cylinder };

struct GridSpec {
  double x_min = 0.0;  // u_min for CuspU (>= 1)
  double x_max = 40.0;
  int points = 2000;   // interior nodes carrying Dirichlet unknowns
};

// Symmetric second-order finite differences in Sturm-Liouville form
//   (A f)_i = -( p_{i+1/2}(f_{i+1}-f_i) - p_{i-1/2}(f_i-f_{i-1}) ) / (w_i dx^2)
//             + q_i f_i
// with Dirichlet conditions at both ends. Self-adjoint w.r.t.
// <f,g>_w = sum f_i g_i w_i dx by construction.
class DiscreteOperator {
public:
  DiscreteOperator(ExprPtr p, ExprPtr q, ExprPtr w, GridSpec grid,
                   std::string provenance, Formulation formulation, int mode);

  int size() const { return static_cast<int>(nodes_.size()); }
  double dx() const { return dx_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::string& provenance() const { return provenance_; }
  Formulation formulation() const { return formulation_; }
  int mode() const { return mode_; }
  const ExprPtr& coeff_p() const { return p_; }
  const ExprPtr& coeff_q() const { return q_; }
  const ExprPtr& coeff_w() const { return w_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }

  // Symmetrized tridiagonal S = D^{1/2} A D^{-1/2}, D = diag(w_i dx).
  const std::vector<double>& sym_diag() const { return diag_; }
  const std::vector<double>& sym_off() const { return off_; }
  const std::vector<double>& dsqrt() const { return dsqrt_; }

  std::vector<double> apply(const std::vector<double>& f) const;
  double inner(const std::vector<double>& f, const std::vector<double>& g) const;
  double norm(const std::vector<double>& f) const;

  // max_i |w_i A_ij - w_j A_ji| / scale; zero up to rounding by construction.
  double symmetry_defect() const;

  // Gershgorin upper bound on the spectrum (CFL control for wave stepping).
  double spectral_upper_bound() const;

  // Grid points per wavelength 2*pi/sqrt(lambda_top) of the fastest mode of
  // interest; < 20 means the grid is under-resolved.
  double points_per_wavelength(double lambda_top) const;

  nlohmann::json to_json() const;  // documented banded-matrix debug format

private:
  ExprPtr p_, q_, w_;
  double x_min_ = 0.0, x_max_ = 0.0, dx_ = 0.0;
  std::vector<double> nodes_, weights_;
  std::vector<double> diag_, off_, dsqrt_;
  std::vector<double> a_diag_, a_super_, a_sub_;
  std::string provenance_;
  Formulation formulation_ = Formulation::Cylinder;
  int mode_ = 0;
};

// Mode operator for an end:
//  - CuspU:   -u^2 f'' + (n-1) u f' + lambda_k u^2 f on L^2([1,L], u^{-(n+1)}du)
//  - LogX:    -f'' + (n^2/4 + lambda_k e^{2x}) f on L^2([0, log L], dx)
//  - Cylinder: -f'' + mu_k f on L^2([0, L], dx)
// all with Dirichlet ends.
DiscreteOperator build_mode_operator(const EndModel& end, int mode,
                                     const GridSpec& grid,
                                     Formulation formulation);

// Unitary change to log coordinates x = log u, (Vf)(x) = e^{-n x/2} f(e^x);
// independent oracle for the CuspU formulation.
DiscreteOperator to_log_coordinates(const DiscreteOperator& op, int cross_dim);
std::vector<double> log_conjugate(const std::vector<double>& f_u,
                                  const std::vector<double>& u_nodes,
                                  const std::vector<double>& x_nodes, int cross_dim);
std::vector<double> log_conjugate_inverse(const std::vector<double>& f_x,
                                          const std::vector<double>& x_nodes,
                                          const std::vector<double>& u_nodes,
                                          int cross_dim);

enum class SobolevKind { W, H };

// Discrete weighted Sobolev norms. W sums difference-quotient norms
// (sum_{i<=k} int |D^i f|^2 xi dvol)^{1/2}; H applies (A + Id)^{k/2} for even
// k. Odd k for H requires spectral data and is reported as a capability error.
double weighted_norm(const DiscreteOperator& op, const std::vector<double>& f,
                     const std::vector<double>& xi, int k, SobolevKind kind);

struct PerturbationSpec {
  ExprPtr shape_p;  // p -> p (1 + shape_p); null for none
  ExprPtr shape_q;  // q -> q + shape_q
  ExprPtr shape_w;  // w -> w (1 + shape_w)
};

struct DifferenceDecomposition {
  std::vector<double> xi0, xi1, xi2;  // A_g - A_h = xi0 + xi1 d/dx + xi2 d^2/dx^2
  double fitted_C = 0.0;              // sup |xi_j| / beta(1 + distance)
  bool decay_ok = false;
};

struct PerturbedOperator {
  DiscreteOperator op;
  DifferenceDecomposition decomposition;
};

// Assembles the perturbed operator in the same Sturm-Liouville pattern and
// extracts the coefficient decomposition of the difference; asserts the
// coefficients decay like beta of the distance along the end.
PerturbedOperator perturb_operator(const DiscreteOperator& op,
                                   const PerturbationSpec& spec,
                                   const DecayProfile& beta);

// Distance from the end's base point as a function of the operator's
// coordinate (log u for CuspU, x - x_min otherwise).
double end_distance(const DiscreteOperator& op, double coord);

}  // namespace scatlab
