#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "scatlab/decay.hpp"
#include "scatlab/funcalc.hpp"
#include "scatlab/operators.hpp"

namespace scatlab {

struct SchattenReport {
  std::vector<double> singular_values;  // descending
  double trace_norm = 0.0;
  double hs_norm = 0.0;
  int effective_rank = 0;  // sigma_i > 1e-12 sigma_1
};

// Singular values of the operator in the weighted space, i.e. of
// W^{1/2} A W^{-1/2} for the action matrix A. `sym` passes an already
// symmetrized matrix. Refuses matrices above the desk-scale cap.
SchattenReport schatten_sym(const Eigen::MatrixXd& sym, int cap = 4000);
SchattenReport schatten(const Eigen::MatrixXd& action,
                        const std::vector<double>& dsqrt, int cap = 4000);

// Symmetrized dense matrices in the frame where the weighted inner product
// is plain: S = D^{1/2} A D^{-1/2}.
Eigen::MatrixXd sym_operator_matrix(const DiscreteOperator& op);
Eigen::MatrixXd sym_heat_matrix(const DiscreteOperator& op,
                                const SpectralDecomposition& spec, double t);

struct DuhamelResult {
  Eigen::MatrixXd duhamel;   // int_0^t e^{-s A_g}(A_h - A_g) e^{-(t-s) A_h} ds
  Eigen::MatrixXd direct;    // e^{-t A_g} - e^{-t A_h}
  double frobenius_gap = 0.0;
};

// Gauss-Legendre in s with `nodes` points; both operators must share grid and
// measure (throws otherwise).
DuhamelResult duhamel_difference(const DiscreteOperator& op_g,
                                 const SpectralDecomposition& spec_g,
                                 const DiscreteOperator& op_h,
                                 const SpectralDecomposition& spec_h, double t,
                                 int nodes = 32);

struct TraceHypothesisInput {
  double a = 0.0;
  double b = 2.0;
  int n = 1;  // dimension parameter entering the injectivity-radius exponents
  std::function<double(double)> vol_density;  // d vol / d x along the end
  // log of the modified injectivity radius; log-valued so exponential decay
  // never underflows on the audit tail.
  std::function<double(double)> log_itilde;
  double x_max = 800.0;
  int points = 6000;
};

struct HypothesisReport {
  double a = 0.0, b = 0.0;
  bool check_i = false;             // b >= 1 and a + b = 2
  bool check_ii = false;            // beta^{b/3} integrable against dvol
  double integral_value = 0.0;      // truncated integral
  double dyadic_ratio = 0.0;        // last/previous dyadic increment
  bool check_iii = false;           // sup beta^{a/3} itilde^{-n(n+2)/2} finite
  double sup_iii = 0.0;
  bool check_iii_alt = false;       // same with exponent n(n+1)/2, recorded
  double sup_iii_alt = 0.0;
  bool pass = false;
};

HypothesisReport check_trace_hypotheses(const DecayProfile& beta,
                                        const TraceHypothesisInput& in);

struct TruncationRow {
  double L = 0.0;
  int points = 0;
  double t = 0.0;
  double trace_norm = 0.0;
  double hs_norm = 0.0;
  double increment = 0.0;  // relative change from the previous L
};

// Trace norm of the heat difference on [0, L] for increasing L at fixed grid
// density dx; the falsifiable desk-scale surrogate for trace-class membership.
std::vector<TruncationRow> truncation_stability(
    const EndModel& end, int mode, Formulation formulation,
    const PerturbationSpec& pert, const DecayProfile& beta, double t,
    const std::vector<double>& L_list, double dx);

struct GaussianKernelFit {
  double c1 = 0.0;     // off-diagonal rate: log K <= log C - c1 d^2
  double log_C = 0.0;
  double max_residual = 0.0;
};

// Fits the Gaussian off-diagonal envelope of the discrete heat kernel.
GaussianKernelFit heat_kernel_gaussian_fit(const DiscreteOperator& op,
                                           const SpectralDecomposition& spec,
                                           double t);

}  // namespace scatlab
