#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "scatlab/operators.hpp"

namespace scatlab {

// Full eigenpairs of a DiscreteOperator; ground truth for all functional
// calculus. Columns of `vectors` are orthonormal w.r.t. the operator's
// weighted inner product.
struct SpectralDecomposition {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd vectors;          // size() x size(), column j <-> eigenvalue j
  std::vector<double> measure;      // w_i dx, for adjoints

  int size() const { return static_cast<int>(eigenvalues.size()); }
  // <v_j, f>_w for all j.
  Eigen::VectorXd analyze(const std::vector<double>& f) const;
  std::vector<double> synthesize(const Eigen::VectorXd& coeff) const;
  // sum phi(lambda_j) <v_j, f>_w v_j
  std::vector<double> apply_function(const std::function<double(double)>& phi,
                                     const std::vector<double>& f) const;
  std::vector<std::complex<double>> apply_function_complex(
      const std::function<std::complex<double>(double)>& phi,
      const std::vector<double>& re, const std::vector<double>& im) const;

  double max_residual(const DiscreteOperator& op) const;  // ||A v - l v||_w
  double orthonormality_defect() const;
};

SpectralDecomposition spectral_decompose(const DiscreteOperator& op);

// k smallest eigenvalues only (bisection + inverse iteration).
std::vector<double> smallest_eigenvalues(const DiscreteOperator& op, int k);

enum class PropagatorMethod { Spectral, Leapfrog };

struct PropagatorResult {
  std::vector<double> values;
  PropagatorMethod method = PropagatorMethod::Spectral;
  double leakage = 0.0;  // mass fraction outside the fattened causal set
  double energy_drift = 0.0;  // leapfrog only, relative
};

// cos(s sqrt(A)) f0. Leapfrog integrates u_tt = -A u with u(0) = f0,
// u_t(0) = 0; refuses time steps violating dt <= cfl_safety * 2/sqrt(lam_max).
PropagatorResult cosine_propagator(const DiscreteOperator& op,
                                   const SpectralDecomposition& spec,
                                   const std::vector<double>& f0, double s,
                                   PropagatorMethod method,
                                   double cfl_safety = 0.9,
                                   double dt_override = 0.0);

// Mass fraction of `values` outside the (radius + margin)-fattening of the
// set where |f0| > 0.
double causal_leakage(const DiscreteOperator& op, const std::vector<double>& f0,
                      const std::vector<double>& values, double radius,
                      double margin);

// Transform-side description of an even function f of sqrt(A): the cosine
// transform fhat with a quadrature window [0, L] and node count m.
struct TransformSpec {
  std::function<double(double)> fhat;
  double window = 10.0;
  int nodes = 200;
};

// f(sqrt(A)) f0 = (1/2pi) int fhat(l) cos(l sqrt(A)) f0 dl by trapezoid over
// the (even) transform, evaluated spectrally per eigenvalue.
std::vector<double> function_of_sqrt(const SpectralDecomposition& spec,
                                     const TransformSpec& transform,
                                     const std::vector<double>& f0);

// Window/node choice for the Gaussian transform of the heat operator at time
// t such that tail + aliasing errors stay below tol.
TransformSpec heat_transform_spec(double t, double omega_max, double tol);

std::vector<double> heat_apply(const SpectralDecomposition& spec, double t,
                               const std::vector<double>& f0);

// (A - lambda)^{-1} f0; warns (via flag) within 1e-8 of an eigenvalue.
struct ResolventResult {
  std::vector<double> values;
  bool conditioning_warning = false;
};
ResolventResult resolvent_apply(const SpectralDecomposition& spec, double lambda,
                                const std::vector<double>& f0);

// Largest singular value of M_{sqrt(beta)} cos(s sqrt A) M_{1/sqrt(beta)},
// the operator norm on L^2_beta at the discrete level.
double weighted_propagator_norm(const DiscreteOperator& op,
                                const SpectralDecomposition& spec,
                                const std::vector<double>& beta_samples, double s);

struct OpNormGrowthFit {
  std::vector<double> s_values;
  std::vector<double> log_norms;
  double log_C = 0.0;
  double c = 0.0;
  double max_residual = 0.0;   // max |log norm - (log_C + c s)|
  double lemma_ratio_max = 0.0;  // sup over the Gaussian family of LHS/RHS
  double lemma_ratio_min = 0.0;
};

// Fits log ||cos(s sqrt A)||_{beta,beta} <= log C + c s over the s grid and
// audits ||f(sqrt A)||_{beta,beta} <= C1 ||fhat||_{L^1(e^{c|.|})} on the heat
// family.
OpNormGrowthFit weighted_opnorm_growth(const DiscreteOperator& op,
                                       const SpectralDecomposition& spec,
                                       const std::vector<double>& beta_samples,
                                       const std::vector<double>& s_grid);

}  // namespace scatlab
