#include "scatlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "scatlab/numerics.hpp"

namespace scatlab {
namespace {

// Dense tensor of type (rank_up, rank_down) over coordinates {x, y_1..y_n}
// whose components are functions of x only. rank_up is 0 or 1 and the upper
// index, when present, comes first in the flat component layout.
struct ExprTensor {
  int dim = 2;
  int rank_up = 0;
  int rank_down = 0;
  std::vector<ExprPtr> comp;

  int rank() const { return rank_up + rank_down; }
  static std::size_t size_for(int dim, int rank) {
    std::size_t s = 1;
    for (int i = 0; i < rank; ++i) s *= dim;
    return s;
  }
  ExprTensor(int d, int up, int down) : dim(d), rank_up(up), rank_down(down) {
    comp.assign(size_for(d, rank()), expr_zero());
  }
  std::size_t flat(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int i : idx) f = f * dim + i;
    return f;
  }
  const ExprPtr& at(const std::vector<int>& idx) const { return comp[flat(idx)]; }
  ExprPtr& at(const std::vector<int>& idx) { return comp[flat(idx)]; }
};

void next_index(std::vector<int>& idx, int dim, bool& done) {
  for (int i = static_cast<int>(idx.size()) - 1; i >= 0; --i) {
    if (++idx[i] < dim) return;
    idx[i] = 0;
  }
  done = true;
}

// Christoffel symbols of dx^2 + phi^2 (flat torus): the only nonzero entries
// are G^0_{ii} = -phi phi' and G^i_{0i} = G^i_{i0} = phi'/phi.
struct Connection {
  ExprPtr minus_phi_dphi;  // -phi phi'
  ExprPtr dlog_phi;        // phi'/phi

  explicit Connection(const ExprPtr& phi) {
    auto dphi = phi->derivative();
    minus_phi_dphi = expr_scale(-1.0, expr_product(phi, dphi));
    dlog_phi = expr_quotient(dphi, phi);
  }

  ExprPtr gamma(int a, int b, int c) const {
    if (a == 0 && b != 0 && b == c) return minus_phi_dphi;
    if (a != 0 && b == 0 && c == a) return dlog_phi;
    if (a != 0 && c == 0 && b == a) return dlog_phi;
    return nullptr;
  }
};

// Covariant derivative w.r.t. the connection of phi; the new lower index is
// appended last. Components depend on x only, so only d/dx survives in the
// partial-derivative term.
ExprTensor covariant_derivative(const ExprTensor& t, const Connection& conn) {
  ExprTensor out(t.dim, t.rank_up, t.rank_down + 1);
  std::vector<int> idx(out.rank(), 0);
  bool done = false;
  while (!done) {
    const int mu = idx.back();
    std::vector<int> base(idx.begin(), idx.end() - 1);
    ExprPtr e = expr_zero();
    if (mu == 0) e = t.at(base)->derivative();
    if (t.rank_up == 1) {
      const int a = base[0];
      for (int c = 0; c < t.dim; ++c) {
        ExprPtr gam = conn.gamma(a, mu, c);
        if (!gam) continue;
        std::vector<int> src = base;
        src[0] = c;
        e = expr_sum(e, expr_product(gam, t.at(src)));
      }
    }
    for (int slot = t.rank_up; slot < t.rank(); ++slot) {
      const int b = base[slot];
      for (int c = 0; c < t.dim; ++c) {
        ExprPtr gam = conn.gamma(c, mu, b);
        if (!gam) continue;
        std::vector<int> src = base;
        src[slot] = c;
        e = expr_sum(e, expr_scale(-1.0, expr_product(gam, t.at(src))));
      }
    }
    out.at(idx) = e;
    next_index(idx, out.dim, done);
  }
  return out;
}

// Pointwise g-norm: every lower index is contracted with g^{-1} = diag(1,
// phi^{-2}, ...), the upper index with g = diag(1, phi^2, ...).
double tensor_norm(const ExprTensor& t, const ExprPtr& phi, double x) {
  const double phi2 = phi->eval(x) * phi->eval(x);
  std::vector<int> idx(t.rank(), 0);
  bool done = t.rank() == 0;
  double sum = 0.0;
  while (!done) {
    const double v = t.at(idx)->eval(x);
    if (v != 0.0) {
      double factor = 1.0;
      for (int slot = 0; slot < t.rank(); ++slot) {
        const bool up = slot < t.rank_up;
        if (idx[slot] != 0) factor *= up ? phi2 : 1.0 / phi2;
      }
      sum += v * v * factor;
    }
    next_index(idx, t.dim, done);
  }
  return std::sqrt(sum);
}

// (g - h)_{ij} = (phi^2 - psi^2) delta_ij on tangential indices.
ExprTensor metric_difference(const MetricPair& pair) {
  const int dim = pair.g.dim();
  ExprTensor t(dim, 0, 2);
  auto diff = expr_sum(expr_product(pair.g.warp, pair.g.warp),
                       expr_scale(-1.0, expr_product(pair.h.warp, pair.h.warp)));
  for (int i = 1; i < dim; ++i) t.at({i, i}) = diff;
  return t;
}

// Difference of Levi-Civita connections as a (1,2) tensor.
ExprTensor connection_difference(const MetricPair& pair) {
  const int dim = pair.g.dim();
  const ExprPtr& phi = pair.g.warp;
  const ExprPtr& psi = pair.h.warp;
  ExprTensor t(dim, 1, 2);
  // A^0_{ii} = -(phi phi' - psi psi'), A^i_{0i} = A^i_{i0} = phi'/phi - psi'/psi
  auto radial = expr_sum(
      expr_scale(-1.0, expr_product(phi, phi->derivative())),
      expr_product(psi, psi->derivative()));
  auto tangential = expr_sum(expr_quotient(phi->derivative(), phi),
                             expr_scale(-1.0, expr_quotient(psi->derivative(), psi)));
  for (int i = 1; i < dim; ++i) {
    t.at({0, i, i}) = radial;
    t.at({i, 0, i}) = tangential;
    t.at({i, i, 0}) = tangential;
  }
  return t;
}

// Curvature (0,4) tensor of a warped product over a flat torus.
ExprTensor curvature_tensor(const WarpedMetric& m) {
  const int dim = m.dim();
  const ExprPtr& phi = m.warp;
  ExprTensor t(dim, 0, 4);
  auto phi_ddphi = expr_product(phi, phi->derivative()->derivative());
  auto m_phi_ddphi = expr_scale(-1.0, phi_ddphi);
  auto dphi2 = expr_product(phi->derivative(), phi->derivative());
  auto m_phi2_dphi2 = expr_scale(-1.0, expr_product(expr_product(phi, phi), dphi2));
  auto p_phi2_dphi2 = expr_product(expr_product(phi, phi), dphi2);
  for (int i = 1; i < dim; ++i) {
    t.at({0, i, 0, i}) = m_phi_ddphi;
    t.at({i, 0, i, 0}) = m_phi_ddphi;
    t.at({0, i, i, 0}) = phi_ddphi;
    t.at({i, 0, 0, i}) = phi_ddphi;
  }
  for (int i = 1; i < dim; ++i)
    for (int j = 1; j < dim; ++j) {
      if (i == j) continue;
      t.at({i, j, i, j}) = m_phi2_dphi2;
      t.at({i, j, j, i}) = p_phi2_dphi2;
    }
  return t;
}

ExprTensor tensor_difference(const ExprTensor& a, const ExprTensor& b) {
  ExprTensor out = a;
  for (std::size_t i = 0; i < out.comp.size(); ++i)
    out.comp[i] = expr_sum(a.comp[i], expr_scale(-1.0, b.comp[i]));
  return out;
}

// Tail-boundedness verdict: log(ratio) fitted against log(1+x) on the upper
// half of the grid must not grow.
bool tail_bounded(const std::vector<double>& xs, const std::vector<double>& ratio,
                  double* slope_out, double slope_tol = 0.15) {
  std::vector<double> lx, lr;
  for (std::size_t i = xs.size() / 2; i < xs.size(); ++i) {
    if (ratio[i] > 1e-300) {
      lx.push_back(std::log(1.0 + xs[i]));
      lr.push_back(std::log(ratio[i]));
    }
  }
  if (lx.size() < 4) {  // ratio numerically zero on the tail
    if (slope_out) *slope_out = 0.0;
    return true;
  }
  const LineFit f = fit_line(lx, lr);
  if (slope_out) *slope_out = f.slope;
  return f.slope <= slope_tol;
}

std::vector<double> ratio_to_beta(const std::vector<double>& xs,
                                  const std::vector<double>& vals,
                                  const DecayProfile& beta) {
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    r[i] = vals[i] * std::exp(-beta.log_eval(1.0 + xs[i]));
  return r;
}

}  // namespace

WarpedMetric WarpedMetric::cusp(int cross_dim) {
  WarpedMetric m;
  m.cross_dim = cross_dim;
  m.warp = expr_exp(-1.0);
  return m;
}

WarpedMetric WarpedMetric::cylinder(int cross_dim) {
  WarpedMetric m;
  m.cross_dim = cross_dim;
  m.warp = expr_one();
  return m;
}

WarpedMetric WarpedMetric::perturbed(const WarpedMetric& base, double eps,
                                     ExprPtr envelope) {
  WarpedMetric m = base;
  m.warp = expr_product(base.warp,
                        expr_sum(expr_one(), expr_scale(eps, std::move(envelope))));
  return m;
}

std::vector<double> knorm_difference(const MetricPair& pair, int k,
                                     const std::vector<double>& xs) {
  if (k > pair.g.k_max || k > pair.h.k_max)
    throw std::invalid_argument("knorm_difference: order k exceeds available derivatives");
  const Connection conn(pair.g.warp);
  std::vector<double> out(xs.size(), 0.0);

  ExprTensor gh = metric_difference(pair);
  for (std::size_t i = 0; i < xs.size(); ++i)
    out[i] += tensor_norm(gh, pair.g.warp, xs[i]);

  ExprTensor t = connection_difference(pair);
  for (int j = 0; j < k; ++j) {
    if (j > 0) t = covariant_derivative(t, conn);
    for (std::size_t i = 0; i < xs.size(); ++i)
      out[i] += tensor_norm(t, pair.g.warp, xs[i]);
  }
  return out;
}

std::vector<double> gradient_characterization_norm(const MetricPair& pair, int k,
                                                   const std::vector<double>& xs) {
  if (k > pair.g.k_max || k > pair.h.k_max)
    throw std::invalid_argument("gradient_characterization_norm: order too high");
  const Connection conn(pair.g.warp);
  std::vector<double> out(xs.size(), 0.0);
  ExprTensor t = metric_difference(pair);
  for (int i = 0; i <= k; ++i) {
    if (i > 0) t = covariant_derivative(t, conn);
    for (std::size_t j = 0; j < xs.size(); ++j)
      out[j] += tensor_norm(t, pair.g.warp, xs[j]);
  }
  return out;
}

EquivalenceReport check_beta_equivalence(const MetricPair& pair, int k,
                                         const DecayProfile& beta, double x_max,
                                         int points) {
  EquivalenceReport rep;
  const std::vector<double> xs = linspace(0.0, x_max, points);

  const std::vector<double> fwd = knorm_difference(pair, k, xs);
  const std::vector<double> rf = ratio_to_beta(xs, fwd, beta);
  rep.C = *std::max_element(rf.begin(), rf.end());
  rep.pass = tail_bounded(xs, rf, &rep.tail_slope);

  MetricPair rev{pair.h, pair.g, pair.order};
  const std::vector<double> bwd = knorm_difference(rev, k, xs);
  const std::vector<double> rb = ratio_to_beta(xs, bwd, beta);
  rep.C_reversed = *std::max_element(rb.begin(), rb.end());
  rep.pass_reversed = tail_bounded(xs, rb, nullptr);

  rep.symmetric = (rep.pass == rep.pass_reversed);
  return rep;
}

CharacterizationReport nabla_characterization_check(const MetricPair& pair, int k,
                                                    const DecayProfile& beta,
                                                    double x_max, int points) {
  CharacterizationReport rep;
  const std::vector<double> xs = linspace(0.0, x_max, points);

  const std::vector<double> kn = knorm_difference(pair, k, xs);
  const std::vector<double> rk = ratio_to_beta(xs, kn, beta);
  rep.C_knorm = *std::max_element(rk.begin(), rk.end());
  rep.knorm_pass = tail_bounded(xs, rk, nullptr);

  const std::vector<double> gr = gradient_characterization_norm(pair, k, xs);
  const std::vector<double> rg = ratio_to_beta(xs, gr, beta);
  rep.C_gradient = *std::max_element(rg.begin(), rg.end());
  rep.gradient_pass = tail_bounded(xs, rg, nullptr);

  rep.agree = (rep.knorm_pass == rep.gradient_pass);
  return rep;
}

CurvatureDecayReport curvature_difference_decay(const MetricPair& pair, int k,
                                                const DecayProfile& beta,
                                                double x_max, int points) {
  if (k < 2)
    throw std::invalid_argument("curvature_difference_decay: requires k >= 2");
  CurvatureDecayReport rep;
  const std::vector<double> xs = linspace(0.0, x_max, points);
  const Connection conn_g(pair.g.warp);
  const Connection conn_h(pair.h.warp);

  ExprTensor rg = curvature_tensor(pair.g);
  ExprTensor rh = curvature_tensor(pair.h);
  ExprTensor diff = tensor_difference(rg, rh);

  std::vector<double> total(xs.size(), 0.0);
  std::vector<double> norm_g(xs.size(), 0.0), norm_h(xs.size(), 0.0);
  for (int i = 0; i <= k - 2; ++i) {
    if (i > 0) {
      diff = covariant_derivative(diff, conn_g);
      rg = covariant_derivative(rg, conn_g);
      rh = covariant_derivative(rh, conn_h);
    }
    for (std::size_t j = 0; j < xs.size(); ++j) {
      total[j] += tensor_norm(diff, pair.g.warp, xs[j]);
      norm_g[j] += tensor_norm(rg, pair.g.warp, xs[j]);
      norm_h[j] += tensor_norm(rh, pair.h.warp, xs[j]);
    }
  }
  const std::vector<double> ratio = ratio_to_beta(xs, total, beta);
  rep.C = *std::max_element(ratio.begin(), ratio.end());
  rep.pass = tail_bounded(xs, ratio, nullptr);

  // Bounded curvature of order k-2 transfers between the two metrics.
  double sg = 0.0, sh = 0.0;
  std::vector<double> ones(xs.size(), 1.0);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    sg = std::max(sg, norm_g[j]);
    sh = std::max(sh, norm_h[j]);
  }
  rep.bounded_g = tail_bounded(xs, norm_g, nullptr) && std::isfinite(sg);
  rep.bounded_h = tail_bounded(xs, norm_h, nullptr) && std::isfinite(sh);
  return rep;
}

SectionalCurvature sectional_curvature(const WarpedMetric& m, double x) {
  const double phi = m.warp_at(x, 0);
  const double dphi = m.warp_at(x, 1);
  const double ddphi = m.warp_at(x, 2);
  return {-ddphi / phi, -(dphi / phi) * (dphi / phi)};
}

InjectivityModel injectivity_envelope(const WarpedMetric& metric, double x_max,
                                      int points) {
  InjectivityModel model;
  model.xs = linspace(0.0, x_max, points);

  for (double x : model.xs) {
    const SectionalCurvature sc = sectional_curvature(metric, x);
    model.K = std::max({model.K, std::abs(sc.radial), std::abs(sc.tangential)});
  }
  const double cap = model.K > 0 ? M_PI / (12.0 * std::sqrt(model.K))
                                 : std::numeric_limits<double>::infinity();
  model.cap_disabled = !(model.K > 0);

  model.itilde.resize(model.xs.size());
  for (std::size_t i = 0; i < model.xs.size(); ++i) {
    const double inj = std::min(metric.core_floor,
                                metric.warp_at(model.xs[i]) * metric.systole / 2.0);
    model.itilde[i] = std::min(cap, inj);
  }

  const int m = metric.dim();
  const double sqrtK = std::sqrt(model.K);
  const double it_p = model.itilde.front();

  // itilde(x) >= C itilde(p)^m e^{-(m-1) sqrt K x}; fitted C with a tail-trend
  // audit so the fit is not drifting to zero.
  std::vector<double> ratio(model.xs.size());
  double cmin = 1e300;
  for (std::size_t i = 0; i < model.xs.size(); ++i) {
    const double rhs = std::pow(it_p, m) * std::exp(-(m - 1) * sqrtK * model.xs[i]);
    ratio[i] = model.itilde[i] / rhs;
    cmin = std::min(cmin, ratio[i]);
  }
  model.decay_constant = cmin;
  std::vector<double> lx, lr;
  for (std::size_t i = model.xs.size() / 2; i < model.xs.size(); ++i) {
    lx.push_back(model.xs[i]);
    lr.push_back(std::log(ratio[i]));
  }
  const LineFit f = fit_line(lx, lr);
  model.decay_bound_ok = cmin > 0.0 && f.slope >= -0.02;

  // Pairwise bound itilde(y) >= C itilde(x) e^{-(m-1) pi d(x,y) / (12 itilde(x))}
  // audited on subsampled pairs.
  double cpair = 1e300;
  const std::size_t stride = std::max<std::size_t>(1, model.xs.size() / 40);
  for (std::size_t i = 0; i < model.xs.size(); i += stride)
    for (std::size_t j = 0; j < model.xs.size(); j += stride) {
      const double d = std::abs(model.xs[i] - model.xs[j]);
      const double rhs = model.itilde[i] *
          std::exp(-(m - 1) * M_PI * d / (12.0 * model.itilde[i]));
      cpair = std::min(cpair, model.itilde[j] / rhs);
    }
  model.pair_constant = cpair;
  model.pair_bound_ok = cpair > 0.0;
  return model;
}

VolumeBounds ball_volume_bounds(double r, double K, int n) {
  if (!(r > 0.0) || n < 1)
    throw std::invalid_argument("ball_volume_bounds: need r > 0 and n >= 1");
  VolumeBounds vb;
  const double omega_n = 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
  std::vector<double> nodes, weights;
  gauss_legendre(96, 0.0, r, nodes, weights);
  const double sqrtK = std::sqrt(std::max(K, 0.0));
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double t = nodes[i];
    double s_lo, s_hi;
    if (K > 0.0) {
      s_lo = std::sin(t * sqrtK) / sqrtK;
      s_hi = std::sinh(t * sqrtK) / sqrtK;
    } else {
      s_lo = s_hi = t;
    }
    lo += weights[i] * std::pow(s_lo, n - 1);
    hi += weights[i] * std::pow(s_hi, n - 1);
  }
  vb.lower = omega_n * lo;
  vb.upper = omega_n * hi;
  vb.lower_valid = !(K > 0.0 && r > M_PI / sqrtK);
  return vb;
}

std::pair<double, double> quasi_isometry_ratio(const MetricPair& pair, double x) {
  const double phi = pair.g.warp_at(x);
  const double psi = pair.h.warp_at(x);
  const double rho = (psi / phi) * (psi / phi);
  return {std::min(1.0, rho), std::max(1.0, rho)};
}

}  // namespace scatlab
