#include "scatlab/funcalc.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "scatlab/numerics.hpp"

namespace scatlab {

SpectralDecomposition spectral_decompose(const DiscreteOperator& op) {
  const int n = op.size();
  std::vector<double> d = op.sym_diag();
  std::vector<double> e = op.sym_off();
  Eigen::MatrixXd z(n, n);
  const lapack_int info =
      LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', n, d.data(), e.data(), z.data(), n);
  if (info != 0) {
    std::ostringstream os;
    os << "tridiagonal eigensolve failed, info=" << info;
    throw std::runtime_error(os.str());
  }
  SpectralDecomposition spec;
  spec.eigenvalues = std::move(d);
  spec.vectors.resize(n, n);
  spec.measure.resize(n);
  // Columns of z are orthonormal in the plain inner product for the
  // symmetrized matrix; v = D^{-1/2} z is w-orthonormal for A.
  for (int i = 0; i < n; ++i) spec.measure[i] = op.weights()[i] * op.dx();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) spec.vectors(i, j) = z(i, j) / op.dsqrt()[i];
  return spec;
}

std::vector<double> smallest_eigenvalues(const DiscreteOperator& op, int k) {
  const int n = op.size();
  std::vector<double> d = op.sym_diag();
  std::vector<double> e = op.sym_off();
  std::vector<double> wout(n);
  std::vector<double> zdummy(1);
  lapack_int m = 0;
  std::vector<lapack_int> isuppz(2 * std::max(1, k));
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, 'N', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, k, 0.0,
      &m, wout.data(), zdummy.data(), 1, isuppz.data());
  if (info != 0) throw std::runtime_error("dstevr failed");
  wout.resize(m);
  return wout;
}

Eigen::VectorXd SpectralDecomposition::analyze(const std::vector<double>& f) const {
  const int n = size();
  Eigen::VectorXd fw(n);
  for (int i = 0; i < n; ++i) fw(i) = f[i] * measure[i];
  return vectors.transpose() * fw;
}

std::vector<double> SpectralDecomposition::synthesize(const Eigen::VectorXd& c) const {
  Eigen::VectorXd v = vectors * c;
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<double> SpectralDecomposition::apply_function(
    const std::function<double(double)>& phi, const std::vector<double>& f) const {
  Eigen::VectorXd c = analyze(f);
  for (int j = 0; j < size(); ++j) c(j) *= phi(eigenvalues[j]);
  return synthesize(c);
}

std::vector<std::complex<double>> SpectralDecomposition::apply_function_complex(
    const std::function<std::complex<double>(double)>& phi,
    const std::vector<double>& re, const std::vector<double>& im) const {
  Eigen::VectorXd cr = analyze(re);
  Eigen::VectorXd ci = im.empty() ? Eigen::VectorXd::Zero(size()) : analyze(im);
  Eigen::VectorXd or_(size()), oi(size());
  for (int j = 0; j < size(); ++j) {
    const std::complex<double> v = phi(eigenvalues[j]) *
                                   std::complex<double>(cr(j), ci(j));
    or_(j) = v.real();
    oi(j) = v.imag();
  }
  Eigen::VectorXd vr = vectors * or_;
  Eigen::VectorXd vi = vectors * oi;
  std::vector<std::complex<double>> out(size());
  for (int i = 0; i < size(); ++i) out[i] = {vr(i), vi(i)};
  return out;
}

double SpectralDecomposition::max_residual(const DiscreteOperator& op) const {
  double worst = 0.0;
  std::vector<double> v(size());
  for (int j = 0; j < size(); j += std::max(1, size() / 24)) {
    for (int i = 0; i < size(); ++i) v[i] = vectors(i, j);
    std::vector<double> av = op.apply(v);
    double r2 = 0.0;
    for (int i = 0; i < size(); ++i) {
      const double r = av[i] - eigenvalues[j] * v[i];
      r2 += r * r * measure[i];
    }
    worst = std::max(worst, std::sqrt(r2));
  }
  return worst;
}

double SpectralDecomposition::orthonormality_defect() const {
  double worst = 0.0;
  const int stride = std::max(1, size() / 32);
  for (int a = 0; a < size(); a += stride)
    for (int b = a; b < size(); b += stride) {
      double dot = 0.0;
      for (int i = 0; i < size(); ++i)
        dot += vectors(i, a) * vectors(i, b) * measure[i];
      worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

PropagatorResult cosine_propagator(const DiscreteOperator& op,
                                   const SpectralDecomposition& spec,
                                   const std::vector<double>& f0, double s,
                                   PropagatorMethod method, double cfl_safety,
                                   double dt_override) {
  PropagatorResult res;
  res.method = method;
  if (method == PropagatorMethod::Spectral) {
    res.values = spec.apply_function(
        [s](double lam) { return std::cos(s * std::sqrt(std::max(0.0, lam))); }, f0);
    return res;
  }
  // Leapfrog: u_{m+1} = 2 u_m - u_{m-1} - dt^2 A u_m, symmetric start.
  const double lam_max = op.spectral_upper_bound();
  const double dt_stable = 2.0 / std::sqrt(lam_max);
  double dt = cfl_safety * dt_stable;
  if (dt_override > 0.0) {
    if (dt_override > dt_stable) {
      std::ostringstream os;
      os << "leapfrog time step " << dt_override << " violates stability; need dt <= "
         << dt_stable;
      throw std::invalid_argument(os.str());
    }
    dt = dt_override;
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(s) / dt)));
  dt = std::abs(s) / steps;
  std::vector<double> prev = f0;
  std::vector<double> au = op.apply(prev);
  std::vector<double> cur(op.size());
  for (int i = 0; i < op.size(); ++i) cur[i] = prev[i] - 0.5 * dt * dt * au[i];

  auto energy = [&](const std::vector<double>& a, const std::vector<double>& b) {
    // E = ||(b - a)/dt||_w^2 / 2 + <A b, a>_w / 2, conserved by the scheme.
    std::vector<double> vel(op.size());
    for (int i = 0; i < op.size(); ++i) vel[i] = (b[i] - a[i]) / dt;
    std::vector<double> ab = op.apply(b);
    return 0.5 * op.inner(vel, vel) + 0.5 * op.inner(ab, a);
  };
  const double e0 = energy(prev, cur);
  for (int m = 1; m < steps; ++m) {
    au = op.apply(cur);
    for (int i = 0; i < op.size(); ++i) {
      const double next = 2.0 * cur[i] - prev[i] - dt * dt * au[i];
      prev[i] = cur[i];
      cur[i] = next;
    }
  }
  const double e1 = energy(prev, cur);
  res.energy_drift = std::abs(e1 - e0) / std::max(1e-300, std::abs(e0));
  res.values = std::move(cur);
  return res;
}

double causal_leakage(const DiscreteOperator& op, const std::vector<double>& f0,
                      const std::vector<double>& values, double radius,
                      double margin) {
  const auto& xs = op.nodes();
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < op.size(); ++i)
    if (f0[i] != 0.0) {
      lo = std::min(lo, xs[i]);
      hi = std::max(hi, xs[i]);
    }
  const double a = lo - radius - margin, b = hi + radius + margin;
  double outside = 0.0, total = 0.0;
  for (int i = 0; i < op.size(); ++i) {
    const double m = values[i] * values[i] * op.weights()[i] * op.dx();
    total += m;
    if (xs[i] < a || xs[i] > b) outside += m;
  }
  return total > 0 ? outside / total : 0.0;
}

std::vector<double> function_of_sqrt(const SpectralDecomposition& spec,
                                     const TransformSpec& transform,
                                     const std::vector<double>& f0) {
  const int m = transform.nodes;
  if (m < 2) throw std::invalid_argument("function_of_sqrt: needs >= 2 nodes");
  const double dl = transform.window / (m - 1);
  std::vector<double> fh(m);
  for (int j = 0; j < m; ++j) {
    fh[j] = transform.fhat(j * dl);
    if (!std::isfinite(fh[j]))
      throw std::invalid_argument("function_of_sqrt: transform not integrable on window");
  }
  // Full-line trapezoid of an even integrand: weight 1 at 0, 2 elsewhere.
  Eigen::VectorXd c = spec.analyze(f0);
  for (int k = 0; k < spec.size(); ++k) {
    const double omega = std::sqrt(std::max(0.0, spec.eigenvalues[k]));
    double q = fh[0];
    for (int j = 1; j < m; ++j) q += 2.0 * fh[j] * std::cos(j * dl * omega);
    c(k) *= q * dl / (2.0 * M_PI);
  }
  return spec.synthesize(c);
}

TransformSpec heat_transform_spec(double t, double omega_max, double tol) {
  TransformSpec ts;
  ts.fhat = [t](double l) { return std::sqrt(M_PI / t) * std::exp(-l * l / (4.0 * t)); };
  // Tail cutoff: e^{-L^2/(4t)} <= tol. Aliasing: node spacing must keep
  // 2 pi / dl beyond omega_max by the Gaussian margin.
  ts.window = 2.0 * std::sqrt(t * std::log(1.0 / tol));
  const double margin = std::sqrt(std::log(1.0 / tol) / t);
  const double dl = 2.0 * M_PI / (omega_max + 2.0 * margin);
  ts.nodes = std::max(8, static_cast<int>(std::ceil(ts.window / dl)) + 1);
  return ts;
}

std::vector<double> heat_apply(const SpectralDecomposition& spec, double t,
                               const std::vector<double>& f0) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_apply: t must be positive");
  return spec.apply_function([t](double l) { return std::exp(-t * l); }, f0);
}

ResolventResult resolvent_apply(const SpectralDecomposition& spec, double lambda,
                                const std::vector<double>& f0) {
  ResolventResult r;
  double closest = 1e300;
  for (double l : spec.eigenvalues) closest = std::min(closest, std::abs(l - lambda));
  r.conditioning_warning = closest < 1e-8;
  r.values = spec.apply_function(
      [lambda](double l) { return 1.0 / (l - lambda); }, f0);
  return r;
}

namespace {

Eigen::MatrixXd weighted_cos_matrix(const DiscreteOperator& op,
                                    const SpectralDecomposition& spec,
                                    const std::vector<double>& beta_samples,
                                    double s) {
  // B^{1/2} U diag(cos) U^T B^{-1/2} with U = D^{1/2} V orthonormal.
  const int n = op.size();
  Eigen::MatrixXd u(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) u(i, j) = spec.vectors(i, j) * op.dsqrt()[i];
  Eigen::VectorXd cs(n);
  for (int j = 0; j < n; ++j)
    cs(j) = std::cos(s * std::sqrt(std::max(0.0, spec.eigenvalues[j])));
  Eigen::MatrixXd core = u * cs.asDiagonal() * u.transpose();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      core(i, j) *= std::sqrt(beta_samples[i] / beta_samples[j]);
  return core;
}

}  // namespace

double weighted_propagator_norm(const DiscreteOperator& op,
                                const SpectralDecomposition& spec,
                                const std::vector<double>& beta_samples, double s) {
  Eigen::MatrixXd m = weighted_cos_matrix(op, spec, beta_samples, s);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

OpNormGrowthFit weighted_opnorm_growth(const DiscreteOperator& op,
                                       const SpectralDecomposition& spec,
                                       const std::vector<double>& beta_samples,
                                       const std::vector<double>& s_grid) {
  OpNormGrowthFit fit;
  fit.s_values = s_grid;
  for (double s : s_grid)
    fit.log_norms.push_back(
        std::log(weighted_propagator_norm(op, spec, beta_samples, s)));
  const LineFit lf = fit_line(fit.s_values, fit.log_norms);
  fit.c = lf.slope;
  fit.log_C = lf.intercept;
  fit.max_residual = lf.max_residual;

  // Heat-family audit of ||f(sqrt A)||_{beta,beta} <= C1 ||fhat||_{L^1(e^{c|.|})}.
  fit.lemma_ratio_max = 0.0;
  fit.lemma_ratio_min = 1e300;
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    const int n = op.size();
    Eigen::MatrixXd u(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) u(i, j) = spec.vectors(i, j) * op.dsqrt()[i];
    Eigen::VectorXd hv(n);
    for (int j = 0; j < n; ++j) hv(j) = std::exp(-t * spec.eigenvalues[j]);
    Eigen::MatrixXd m = u * hv.asDiagonal() * u.transpose();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        m(i, j) *= std::sqrt(beta_samples[i] / beta_samples[j]);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const double lhs = svd.singularValues()(0);
    // ||fhat||_{L^1(e^{c|l|})} for fhat = sqrt(pi/t) e^{-l^2/4t}, by quadrature.
    const double L = 2.0 * std::sqrt(t * std::log(1e14)) + 4.0 * t * std::max(0.0, fit.c);
    const int qn = 4000;
    const double dl = L / qn;
    double rhs = 0.0;
    for (int j = 0; j <= qn; ++j) {
      const double l = j * dl;
      const double wgt = (j == 0 || j == qn) ? 0.5 : 1.0;
      rhs += 2.0 * wgt * dl * std::sqrt(M_PI / t) * std::exp(-l * l / (4.0 * t)) *
             std::exp(fit.c * l);
    }
    fit.lemma_ratio_max = std::max(fit.lemma_ratio_max, lhs / rhs);
    fit.lemma_ratio_min = std::min(fit.lemma_ratio_min, lhs / rhs);
  }
  return fit;
}

}  // namespace scatlab
