#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "scatlab/funcalc.hpp"
#include "scatlab/operators.hpp"

namespace scatlab {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

// Free half-line model of a cusp end in log coordinates x = log u:
// H0 = -d^2/dx^2 + n^2/4 with a Dirichlet wall at x = 0. Generalized
// eigenfunctions are sine waves; the momentum representation is exact, so
// free dynamics carry no truncation error.
class CuspFreeModel {
public:
  CuspFreeModel(int n, double x_max, int x_points, double lambda_max,
                int lambda_points);

  int n() const { return n_; }
  double threshold() const { return 0.25 * n_ * n_; }
  const std::vector<double>& x_grid() const { return x_; }
  const std::vector<double>& u_grid() const { return u_; }
  const std::vector<double>& lambda_grid() const { return lambda_; }
  double dx() const { return dx_; }
  double dlambda() const { return dl_; }

  // Normalized generalized eigenfunction in the u variable; vanishes at u = 1.
  double e_fn(double u, double lambda) const;

  // Momentum transform of a mode-0 function sampled on the u grid (quadrature
  // against e_fn w.r.t. u^{-(n+1)} du), and its inverse.
  CVec to_lambda(const CVec& f_u) const;
  CVec to_x(const CVec& f_lambda) const;  // values on the x grid
  CVec x_to_u(const CVec& f_x) const;     // undo the log conjugation

  // Resample to the spectral parameter mu = n^2/4 + lambda^2.
  CVec u_map(const CVec& f_lambda) const;

  double lambda_norm(const CVec& f_lambda) const;
  double x_norm(const CVec& f_x) const;
  double parseval_defect(const CVec& f_u) const;

  // Free evolution e^{-i t H0} in the momentum representation.
  CVec evolve_free(const CVec& f_lambda, double t) const;

private:
  int n_ = 1;
  double dx_ = 0.0, dl_ = 0.0;
  std::vector<double> x_, u_, lambda_;
};

struct WavePacket {
  double lambda0 = 1.0;   // center momentum
  double sigma = 0.2;     // momentum width
  double center = 15.0;   // position center
  int direction = +1;     // +1 outgoing (moving away from the wall)
};

CVec packet_lambda_profile(const CuspFreeModel& model, const WavePacket& packet);

struct EnssProjections {
  Eigen::MatrixXcd p_plus;   // outgoing part, momentum representation
  Eigen::MatrixXcd p_minus;  // incoming part; p_plus + p_minus = Id exactly
  double self_adjoint_defect = 0.0;  // ||(P - P*) g|| / ||g|| on a packet
  double idempotency_defect = 0.0;   // ||P^2 g - P g|| / ||g|| on a packet
};

EnssProjections enss_projections(const CuspFreeModel& model);

// Matrix-free application of the outgoing Hardy compression on a uniform
// midpoint momentum grid (same operator as EnssProjections::p_plus).
CVec apply_hardy_plus(const std::vector<double>& lambda_grid, double dl,
                      const CVec& g);

// ||P_{-dir} e^{-i t H0} f|| / ||f|| over the t grid, evaluated exactly in
// the conjugate (translation) representation of the spectral parameter: the
// free evolution is a shift there and the projections are sharp cutoffs.
std::vector<double> enss_decay_curve(const CuspFreeModel& model,
                                     const WavePacket& packet,
                                     const std::vector<double>& t_grid);

struct WaveOperatorResult {
  std::vector<double> t_values;
  std::vector<double> cauchy_increments;
  double isometry_defect = 0.0;     // | ||Wf|| - ||f|| |
  double intertwining_defect = 0.0; // ||A_h W f - W A_0 f|| at the best t
  CVec limit_state;                 // on the grid of op_h
};

// Moller limit diagnostics: evaluates e^{-i tau A_h} e^{i tau A_0} f over the
// schedule (tau > 0 probes the incoming operator; the state is a packet
// profile in the momentum representation of the discrete free operator).
WaveOperatorResult wave_operator(const DiscreteOperator& op_h,
                                 const SpectralDecomposition& spec_h,
                                 const DiscreteOperator& op_0,
                                 const SpectralDecomposition& spec_0,
                                 const CVec& f_grid,
                                 const std::vector<double>& tau_schedule);

struct ScatteringResult {
  std::vector<double> lambda;
  std::vector<double> delta;        // unwrapped phase shift
  std::vector<cplx> s_matrix;       // e^{2 i delta}
  double max_unimodularity_defect = 0.0;
};

// Stationary phase shifts by shooting -psi'' + V psi = lambda^2 psi from the
// Dirichlet wall and matching to free waves where V has decayed below 1e-10.
// V(x) = q(x) - threshold is read off the perturbed operator's potential.
ScatteringResult smatrix_stationary(const DiscreteOperator& op_h, int cross_dim,
                                    const std::vector<double>& lambda_grid);

// Same with an explicit potential; `breakpoints` align the integrator with
// potential discontinuities (square wells).
ScatteringResult smatrix_stationary_core(
    const std::function<double(double)>& potential, double x_max,
    const std::vector<double>& lambda_grid,
    const std::vector<double>& breakpoints);

// Closed-form phase shift of the square well V = -V0 on [0, w] (half line,
// Dirichlet at 0), unwrapped along the grid.
ScatteringResult square_well_phase_oracle(double V0, double w,
                                          const std::vector<double>& lambda_grid);

// Packet-averaged time-dependent phase shift: S f via
// e^{i tau' A_0} e^{-i (tau+tau') A_h} e^{i tau A_0} f, phases read in the
// discrete free eigenbasis over the packet's support.
struct TimeDependentPhase {
  std::vector<double> lambda;
  std::vector<double> delta;
};
TimeDependentPhase smatrix_time_dependent(const DiscreteOperator& op_h,
                                          const SpectralDecomposition& spec_h,
                                          const DiscreteOperator& op_0,
                                          const SpectralDecomposition& spec_0,
                                          const CVec& f_grid, double tau,
                                          double tau_prime,
                                          double coeff_floor = 0.05);

struct OscillatoryBump {
  double lambda0 = 1.0;
  double sigma = 0.15;
};

struct OscillatoryDecayResult {
  std::vector<double> t_values;
  std::vector<double> magnitudes;  // |I(t)|
  double slope = 0.0;              // log|I| vs log t
};

// I(t) = int_0^inf e^{2 i u l + i t l^2} g(l) dl for a Gaussian bump g
// supported away from l = 0; throws if |u| >= eps |t| / 2 on the grid where
// eps is the bump's lower support edge.
OscillatoryDecayResult oscillatory_decay_check(const OscillatoryBump& bump,
                                               double u,
                                               const std::vector<double>& t_grid);

struct EnssConditionsReport {
  // (1) projection decay for outgoing / incoming packets
  double outgoing_final = 0.0;  // ||P_- e^{-itH0} f|| / ||f|| at the last t
  double incoming_final = 0.0;
  // (2) rank of (Id - P_ac) alpha(H0) on the truncated higher modes
  int finite_rank = 0;
  // (3) compactness surrogate: singular values of R_h - R_0
  std::vector<double> resolvent_sv;
  double sv_tail_ratio = 0.0;  // sigma_{n/4} / sigma_1
  // (4) integrand norm fit over the t grid
  double condition4_slope = 0.0;
  std::vector<double> condition4_t;
  std::vector<double> condition4_norm;
};

struct EnssConditionsInput {
  double alpha_lo = 1.0;   // support of the spectral bump alpha
  double alpha_hi = 2.5;
  std::vector<double> t_grid_decay;   // for condition (1)
  std::vector<double> t_grid_cond4;   // for condition (4)
  int higher_modes = 3;               // modes counted in condition (2)
};

EnssConditionsReport verify_enss_conditions(const DiscreteOperator& op_h,
                                            const SpectralDecomposition& spec_h,
                                            const DiscreteOperator& op_0,
                                            const SpectralDecomposition& spec_0,
                                            const CuspFreeModel& model,
                                            const EnssProjections& proj,
                                            const EndModel& end,
                                            const EnssConditionsInput& in);

// Center of mass of |psi|^2 on the x grid; free-dispersion diagnostics.
double center_of_mass(const CuspFreeModel& model, const CVec& f_x);

}  // namespace scatlab
