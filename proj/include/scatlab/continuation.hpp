#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "scatlab/decay.hpp"
#include "scatlab/funcalc.hpp"
#include "scatlab/operators.hpp"

namespace scatlab {

using cplx = std::complex<double>;

// Momentum coordinate for one threshold: lambda = thr + z^2, physical sheet
// Im z > 0, second sheet Im z <= 0. All continuation runs in z so the branch
// is single-valued by construction.
struct SheetPoint {
  cplx z;
  double threshold = 0.25;
  cplx lambda() const { return threshold + z * z; }
  bool physical() const { return z.imag() > 0.0; }
};

enum class KernelVariant { Verbatim, Dirichlet };

// Model resolvent kernel on the u half-line w.r.t. u^{-(n+1)} du.
// Verbatim evaluates the printed product kernel at resolvent parameter -1
// (z is ignored); Dirichlet is the wall-respecting Green kernel
// f1(u<) f2(u>) / (2 nu), f1 = u^{n/2}(u^nu - u^{-nu}), f2 = u^{n/2 - nu},
// nu = -i z.
cplx model_kernel(int n, double u, double up, cplx z, KernelVariant variant);

// Log-coordinate free kernel sin(z x<) e^{i z x>} / z; entire in z with the
// removable singularity at z = 0 handled by its series.
cplx free_kernel_log(cplx z, double x, double y);

// (R0(z) f)(x_i) by trapezoid quadrature; f must be supported away from the
// grid end (the kernel is exact on the half line, the grid only carries f).
std::vector<cplx> continued_free_resolvent(const std::vector<double>& x_grid,
                                           double dx, cplx z,
                                           const std::vector<cplx>& f);

// Birman-Schwinger matrix Id + K(z) on the perturbation's support block,
// K = R0(z) (xi0 + xi1 d/dx + xi2 d^2/dx^2); the block determinant equals the
// full determinant because columns of K vanish off the support.
class BirmanSchwingerKernel {
public:
  BirmanSchwingerKernel(std::vector<double> x_grid, double dx,
                        std::vector<double> xi0, std::vector<double> xi1,
                        std::vector<double> xi2, double support_tol = 1e-14);

  int support_size() const { return static_cast<int>(support_.size()); }
  const std::vector<int>& support() const { return support_; }

  Eigen::MatrixXcd matrix(cplx z) const;    // Id + K restricted to the block
  Eigen::MatrixXcd dmatrix_dz(cplx z) const;

  // K(z) Frobenius norm on the block (decay scan in Im z).
  double k_frobenius(cplx z) const;

private:
  std::vector<double> x_, xi0_, xi1_, xi2_;
  double dx_ = 0.0;
  std::vector<int> support_;
};

struct ResonancePole {
  cplx z;
  cplx lambda;
  double min_sv = 0.0;     // smallest singular value of Id + K at the pole
  int residue_rank = 0;
  int winding = 0;         // argument-principle count on a confirmation contour
  bool converged = false;
};

struct ScanWindow {
  double re_lo = 0.1, re_hi = 3.0;
  double im_lo = -1.2, im_hi = -0.02;
  int nx = 100, ny = 100;
};

struct ResonanceReport {
  std::vector<ResonancePole> poles;
  std::vector<double> heatmap;  // log10 |det| row-major over the window
  ScanWindow window;
  double threshold = 0.25;
};

// log|det| scan over the window; strict local minima dipping detect_drop
// decades below the median landscape are Newton-refined on det and confirmed
// by the argument principle.
ResonanceReport resonance_scan(const BirmanSchwingerKernel& kernel,
                               const ScanWindow& window, double threshold_nsq4,
                               double detect_drop = 0.5);

// Newton refinement z -> z - det/det' via tr(M^{-1} M').
cplx newton_refine_pole(const BirmanSchwingerKernel& kernel, cplx z0,
                        int max_iter, bool* converged);

int contour_winding(const BirmanSchwingerKernel& kernel, cplx center,
                    double radius, int points = 32);

// Square-well resonance condition on the half line (V = -V0 on [0,w]):
// kp cos(kp w) = i z sin(kp w), kp = sqrt(z^2 + V0). Newton from a seed.
cplx square_well_resonance_oracle(double V0, double w, cplx seed,
                                  bool* converged);

struct WeightTriple {
  DecayProfile delta;
  DecayProfile rho;
  DecayProfile zeta;
};

struct WeightCompatibilityReport {
  double C = 0.0;
  bool pass = false;
  double tail_slope = 0.0;
};

// beta^2(x) <= C itilde^{4n}(x) rho delta zeta on the grid with a stable tail.
WeightCompatibilityReport weight_compatibility_check(
    const DecayProfile& beta, const WeightTriple& triple,
    const std::function<double(double)>& itilde, int n, double x_max = 200.0,
    int points = 2000);

// Exact Birman-Schwinger identity on the discrete model:
// (Id + K_d(z))^{-1} R0_d(z) f = (A_h - lambda)^{-1} f with
// K_d = R0_d (A_h - A_0). Returns the relative residual.
double birman_schwinger_identity_residual(const DiscreteOperator& op_0,
                                          const SpectralDecomposition& spec_0,
                                          const DiscreteOperator& op_h,
                                          const SpectralDecomposition& spec_h,
                                          cplx lambda,
                                          const std::vector<double>& f);

}  // namespace scatlab
