#include "scatlab/continuation.hpp"

#include <algorithm>
#include <cmath>

#include "scatlab/numerics.hpp"

namespace scatlab {

cplx model_kernel(int n, double u, double up, cplx z, KernelVariant variant) {
  const double ulo = std::min(u, up), uhi = std::max(u, up);
  if (variant == KernelVariant::Verbatim) {
    const double nu = std::sqrt(0.25 * n * n + 1.0);
    return std::pow(u * up, 0.5 * n) / nu * std::pow(ulo / uhi, nu);
  }
  const cplx nu = cplx(0.0, -1.0) * z;  // f2 = u^{n/2 - nu} decays for Im z > 0
  const cplx f1 = std::pow(ulo, 0.5 * n) *
                  (std::pow(ulo, nu) - std::pow(ulo, -nu));
  const cplx f2 = std::pow(uhi, 0.5 * n - nu);
  return f1 * f2 / (2.0 * nu);
}

cplx free_kernel_log(cplx z, double x, double y) {
  const double lo = std::min(x, y), hi = std::max(x, y);
  if (std::abs(z) < 1e-8) {
    // sin(z lo) e^{i z hi} / z = lo (1 + i z hi) + O(z^2)
    return lo * (1.0 + cplx(0.0, 1.0) * z * hi);
  }
  return std::sin(z * lo) * std::exp(cplx(0.0, 1.0) * z * hi) / z;
}

std::vector<cplx> continued_free_resolvent(const std::vector<double>& x_grid,
                                           double dx, cplx z,
                                           const std::vector<cplx>& f) {
  const int n = static_cast<int>(x_grid.size());
  std::vector<cplx> out(n, cplx(0.0, 0.0));
  for (int i = 0; i < n; ++i) {
    cplx acc(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      if (f[j] == cplx(0.0, 0.0)) continue;
      acc += free_kernel_log(z, x_grid[i], x_grid[j]) * f[j];
    }
    out[i] = acc * dx;
  }
  return out;
}

BirmanSchwingerKernel::BirmanSchwingerKernel(std::vector<double> x_grid, double dx,
                                             std::vector<double> xi0,
                                             std::vector<double> xi1,
                                             std::vector<double> xi2,
                                             double support_tol)
    : x_(std::move(x_grid)),
      xi0_(std::move(xi0)),
      xi1_(std::move(xi1)),
      xi2_(std::move(xi2)),
      dx_(dx) {
  const int n = static_cast<int>(x_.size());
  if (xi1_.empty()) xi1_.assign(n, 0.0);
  if (xi2_.empty()) xi2_.assign(n, 0.0);
  auto active = [&](int i) {
    return std::max({std::abs(xi0_[i]), std::abs(xi1_[i]), std::abs(xi2_[i])}) >
           support_tol;
  };
  for (int j = 0; j < n; ++j) {
    bool on = false;
    for (int i = std::max(0, j - 1); i <= std::min(n - 1, j + 1); ++i)
      if (active(i)) on = true;
    if (on) support_.push_back(j);
  }
}

namespace {

// Column j of the perturbation operator: entries (row m, coefficient).
// P f = xi0 f + xi1 D1 f + xi2 D2 f with central stencils.
template <typename F>
void perturbation_column(const std::vector<double>& xi0,
                         const std::vector<double>& xi1,
                         const std::vector<double>& xi2, double dx, int j, int n,
                         F&& emit) {
  if (xi0[j] != 0.0 || xi2[j] != 0.0)
    emit(j, cplx(xi0[j] - 2.0 * xi2[j] / (dx * dx), 0.0));
  if (j > 0) {
    const double c = xi1[j - 1] / (2.0 * dx) + xi2[j - 1] / (dx * dx);
    if (c != 0.0) emit(j - 1, cplx(c, 0.0));
  }
  if (j + 1 < n) {
    const double c = -xi1[j + 1] / (2.0 * dx) + xi2[j + 1] / (dx * dx);
    if (c != 0.0) emit(j + 1, cplx(c, 0.0));
  }
}

}  // namespace

Eigen::MatrixXcd BirmanSchwingerKernel::matrix(cplx z) const {
  const int m = support_size();
  const int n = static_cast<int>(x_.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(m, m);
  for (int cj = 0; cj < m; ++cj) {
    const int j = support_[cj];
    perturbation_column(xi0_, xi1_, xi2_, dx_, j, n, [&](int row, cplx coeff) {
      for (int ci = 0; ci < m; ++ci)
        out(ci, cj) += free_kernel_log(z, x_[support_[ci]], x_[row]) * coeff * dx_;
    });
  }
  return out;
}

Eigen::MatrixXcd BirmanSchwingerKernel::dmatrix_dz(cplx z) const {
  const int m = support_size();
  const int n = static_cast<int>(x_.size());
  const cplx i1(0.0, 1.0);
  auto dkernel = [&](double x, double y) -> cplx {
    const double lo = std::min(x, y), hi = std::max(x, y);
    if (std::abs(z) < 1e-8) {
      // d/dz [lo (1 + i z hi)] + O(z)
      return i1 * lo * hi;
    }
    const cplx e = std::exp(i1 * z * hi);
    return (lo * std::cos(z * lo) * e + i1 * hi * std::sin(z * lo) * e) / z -
           std::sin(z * lo) * e / (z * z);
  };
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m, m);
  for (int cj = 0; cj < m; ++cj) {
    const int j = support_[cj];
    perturbation_column(xi0_, xi1_, xi2_, dx_, j, n, [&](int row, cplx coeff) {
      for (int ci = 0; ci < m; ++ci)
        out(ci, cj) += dkernel(x_[support_[ci]], x_[row]) * coeff * dx_;
    });
  }
  return out;
}

double BirmanSchwingerKernel::k_frobenius(cplx z) const {
  const Eigen::MatrixXcd m = matrix(z) - Eigen::MatrixXcd::Identity(
                                             support_size(), support_size());
  return m.norm();
}

namespace {

// log|det| and the Newton correction det/det' = 1 / tr(M^{-1} M').
double log_abs_det(const Eigen::MatrixXcd& m) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  double s = 0.0;
  for (int i = 0; i < m.rows(); ++i) s += std::log(std::abs(lu.matrixLU()(i, i)));
  return s;
}

}  // namespace

cplx newton_refine_pole(const BirmanSchwingerKernel& kernel, cplx z0,
                        int max_iter, bool* converged) {
  cplx z = z0;
  if (converged) *converged = false;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXcd m = kernel.matrix(z);
    const Eigen::MatrixXcd dm = kernel.dmatrix_dz(z);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    const cplx trace = (lu.solve(dm)).trace();
    const cplx step = 1.0 / trace;
    z -= step;
    if (std::abs(step) < 1e-12) {
      if (converged) *converged = true;
      return z;
    }
    if (std::abs(step) > 1.0 || !std::isfinite(z.real()) ||
        !std::isfinite(z.imag()))
      return z0;  // refinement escaped; flag as non-converged
  }
  return z;
}

int contour_winding(const BirmanSchwingerKernel& kernel, cplx center,
                    double radius, int points) {
  // (1/2 pi i) contour integral of tr(M^{-1} M') dz by trapezoid.
  cplx acc(0.0, 0.0);
  for (int k = 0; k < points; ++k) {
    const double th = 2.0 * M_PI * k / points;
    const cplx z = center + radius * std::exp(cplx(0.0, th));
    const cplx dz = radius * cplx(0.0, 1.0) * std::exp(cplx(0.0, th)) *
                    (2.0 * M_PI / points);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(kernel.matrix(z));
    acc += lu.solve(kernel.dmatrix_dz(z)).trace() * dz;
  }
  return static_cast<int>(std::lround((acc / (2.0 * M_PI * cplx(0.0, 1.0))).real()));
}

ResonanceReport resonance_scan(const BirmanSchwingerKernel& kernel,
                               const ScanWindow& window, double threshold_nsq4,
                               double detect_drop) {
  ResonanceReport rep;
  rep.window = window;
  rep.threshold = threshold_nsq4;
  rep.heatmap.assign(window.nx * window.ny, 0.0);
  if (kernel.support_size() == 0) return rep;
  std::vector<double> re(window.nx), im(window.ny);
  for (int i = 0; i < window.nx; ++i)
    re[i] = window.re_lo + (window.re_hi - window.re_lo) * i / (window.nx - 1);
  for (int j = 0; j < window.ny; ++j)
    im[j] = window.im_lo + (window.im_hi - window.im_lo) * j / (window.ny - 1);

  for (int j = 0; j < window.ny; ++j)
    for (int i = 0; i < window.nx; ++i)
      rep.heatmap[j * window.nx + i] =
          log_abs_det(kernel.matrix(cplx(re[i], im[j]))) / std::log(10.0);

  // Candidates: strict local minima dipping below the median landscape level.
  std::vector<double> sorted = rep.heatmap;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                   sorted.end());
  const double median = sorted[sorted.size() / 2];

  auto at = [&](int i, int j) { return rep.heatmap[j * window.nx + i]; };
  for (int j = 1; j + 1 < window.ny; ++j)
    for (int i = 1; i + 1 < window.nx; ++i) {
      const double v = at(i, j);
      if (v > median - detect_drop) continue;
      if (v >= at(i - 1, j) || v >= at(i + 1, j) || v >= at(i, j - 1) ||
          v >= at(i, j + 1))
        continue;
      bool conv = false;
      const cplx z = newton_refine_pole(kernel, cplx(re[i], im[j]), 60, &conv);
      if (!conv) continue;
      bool dup = false;
      for (const auto& p : rep.poles)
        if (std::abs(p.z - z) < 1e-6) dup = true;
      if (dup) continue;
      ResonancePole pole;
      pole.z = z;
      pole.lambda = threshold_nsq4 + z * z;
      pole.converged = true;
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(kernel.matrix(z));
      const auto& sv = svd.singularValues();
      pole.min_sv = sv(sv.size() - 1);
      const double drop = 1e-4 * sv(0);
      for (int k = 0; k < sv.size(); ++k)
        if (sv(k) < drop) ++pole.residue_rank;
      const double contour_r =
          std::min(0.05, 0.45 * std::min(window.re_hi - window.re_lo,
                                         window.im_hi - window.im_lo));
      pole.winding = contour_winding(kernel, z, contour_r);
      rep.poles.push_back(pole);
    }
  std::sort(rep.poles.begin(), rep.poles.end(),
            [](const ResonancePole& a, const ResonancePole& b) {
              return a.z.real() < b.z.real();
            });
  return rep;
}

cplx square_well_resonance_oracle(double V0, double w, cplx seed,
                                  bool* converged) {
  // F(z) = kp cos(kp w) - i z sin(kp w), kp = sqrt(z^2 + V0); zeros are
  // branch-independent since F is odd in kp.
  auto F = [&](cplx z) {
    const cplx kp = std::sqrt(z * z + V0);
    return kp * std::cos(kp * w) - cplx(0.0, 1.0) * z * std::sin(kp * w);
  };
  cplx z = seed;
  if (converged) *converged = false;
  for (int it = 0; it < 200; ++it) {
    const double h = 1e-7;
    const cplx d = (F(z + h) - F(z - h)) / (2.0 * h);
    const cplx step = F(z) / d;
    z -= step;
    if (std::abs(step) < 1e-13) {
      if (converged) *converged = true;
      return z;
    }
  }
  return z;
}

WeightCompatibilityReport weight_compatibility_check(
    const DecayProfile& beta, const WeightTriple& triple,
    const std::function<double(double)>& itilde, int n, double x_max,
    int points) {
  WeightCompatibilityReport rep;
  const std::vector<double> xs = linspace(0.0, x_max, points);
  std::vector<double> logs(points);
  double sup = -1e300;
  for (int i = 0; i < points; ++i) {
    const double x = xs[i];
    const double lr = 2.0 * beta.log_eval(1.0 + x) -
                      4.0 * n * std::log(itilde(x)) -
                      triple.rho.log_eval(1.0 + x) -
                      triple.delta.log_eval(1.0 + x) -
                      triple.zeta.log_eval(1.0 + x);
    logs[i] = lr;
    sup = std::max(sup, lr);
  }
  rep.C = std::exp(sup);
  std::vector<double> lx, lv;
  for (int i = points / 2; i < points; ++i) {
    lx.push_back(xs[i]);
    lv.push_back(logs[i]);
  }
  rep.tail_slope = fit_line(lx, lv).slope;
  rep.pass = rep.tail_slope <= 1e-6;
  return rep;
}

double birman_schwinger_identity_residual(const DiscreteOperator& op_0,
                                          const SpectralDecomposition& spec_0,
                                          const DiscreteOperator& op_h,
                                          const SpectralDecomposition& spec_h,
                                          cplx lambda,
                                          const std::vector<double>& f) {
  const int n = op_0.size();
  // Dense resolvents from the spectral data (rational in lambda, so the
  // continuation of the discrete model is the same formula).
  Eigen::MatrixXd v0 = spec_0.vectors, vh = spec_h.vectors;
  Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) dm(i, i) = spec_0.measure[i];
  Eigen::MatrixXcd r0 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd rh = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd d0(n), dh(n);
  for (int j = 0; j < n; ++j) {
    d0(j) = 1.0 / (spec_0.eigenvalues[j] - lambda);
    dh(j) = 1.0 / (spec_h.eigenvalues[j] - lambda);
  }
  r0 = v0.cast<cplx>() * d0.asDiagonal() * (v0.transpose() * dm).cast<cplx>();
  rh = vh.cast<cplx>() * dh.asDiagonal() * (vh.transpose() * dm).cast<cplx>();

  // A_h - A_0 as a dense action difference.
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> e(n, 0.0);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    const std::vector<double> ah = op_h.apply(e);
    const std::vector<double> a0 = op_0.apply(e);
    for (int i = 0; i < n; ++i) delta(i, j) = ah[i] - a0[i];
    e[j] = 0.0;
  }
  Eigen::VectorXcd fv(n);
  for (int i = 0; i < n; ++i) fv(i) = f[i];
  const Eigen::MatrixXcd k = r0 * delta.cast<cplx>();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::VectorXcd lhs = (id + k).lu().solve(r0 * fv);
  const Eigen::VectorXcd rhs = rh * fv;
  return (lhs - rhs).norm() / rhs.norm();
}

}  // namespace scatlab
