#include "scatlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scatlab/numerics.hpp"

namespace scatlab {

EndModel EndModel::cusp(int n, int mode_count) {
  if (n < 1) throw std::invalid_argument("cusp: cross-section dimension must be >= 1");
  EndModel e;
  e.kind = Kind::Cusp;
  e.cross_dim = n;
  // Flat torus (R/2piZ)^n: eigenvalues |m|^2 with multiplicity.
  std::map<long, int> counts;
  const int M = 1 + static_cast<int>(std::ceil(std::pow(mode_count, 1.0 / n)));
  std::vector<int> m(n, -M);
  while (true) {
    long s = 0;
    for (int v : m) s += static_cast<long>(v) * v;
    counts[s]++;
    int i = n - 1;
    while (i >= 0 && m[i] == M) m[i--] = -M;
    if (i < 0) break;
    m[i]++;
  }
  for (const auto& [val, mult] : counts)
    for (int r = 0; r < mult && static_cast<int>(e.mode_eigenvalues.size()) < mode_count; ++r)
      e.mode_eigenvalues.push_back(static_cast<double>(val));
  return e;
}

EndModel EndModel::cylinder(std::vector<double> mu) {
  if (mu.empty() || mu.front() != 0.0)
    throw std::invalid_argument("cylinder: mode eigenvalues must start at 0");
  if (!std::is_sorted(mu.begin(), mu.end()))
    throw std::invalid_argument("cylinder: mode eigenvalues must be ascending");
  EndModel e;
  e.kind = Kind::Cylinder;
  e.mode_eigenvalues = std::move(mu);
  return e;
}

DiscreteOperator::DiscreteOperator(ExprPtr p, ExprPtr q, ExprPtr w, GridSpec grid,
                                   std::string provenance, Formulation formulation,
                                   int mode)
    : p_(std::move(p)),
      q_(std::move(q)),
      w_(std::move(w)),
      x_min_(grid.x_min),
      x_max_(grid.x_max),
      provenance_(std::move(provenance)),
      formulation_(formulation),
      mode_(mode) {
  const int n = grid.points;
  if (n < 3) throw std::invalid_argument("operator grid needs at least 3 interior nodes");
  dx_ = (grid.x_max - grid.x_min) / (n + 1);
  nodes_.resize(n);
  weights_.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes_[i] = grid.x_min + (i + 1) * dx_;
    weights_[i] = w_->eval(nodes_[i]);
    if (!(weights_[i] > 0.0)) {
      std::ostringstream os;
      os << "non-positive measure weight at node " << nodes_[i];
      throw std::invalid_argument(os.str());
    }
  }
  diag_.resize(n);
  off_.resize(n - 1);
  dsqrt_.resize(n);
  a_diag_.resize(n);
  a_super_.resize(n - 1);
  a_sub_.resize(n - 1);
  const double inv_dx2 = 1.0 / (dx_ * dx_);
  std::vector<double> p_half(n + 1);  // p at x_min + (i + 1/2) dx
  for (int i = 0; i <= n; ++i) {
    p_half[i] = p_->eval(grid.x_min + (i + 0.5) * dx_);
    if (!(p_half[i] > 0.0)) {
      std::ostringstream os;
      os << "ellipticity lost: p <= 0 at node " << grid.x_min + (i + 0.5) * dx_;
      throw std::invalid_argument(os.str());
    }
  }
  for (int i = 0; i < n; ++i) {
    dsqrt_[i] = std::sqrt(weights_[i] * dx_);
    a_diag_[i] = (p_half[i] + p_half[i + 1]) * inv_dx2 / weights_[i] +
                 q_->eval(nodes_[i]);
    diag_[i] = a_diag_[i];
  }
  for (int i = 0; i + 1 < n; ++i) {
    a_super_[i] = -p_half[i + 1] * inv_dx2 / weights_[i];
    a_sub_[i] = -p_half[i + 1] * inv_dx2 / weights_[i + 1];
    off_[i] = -p_half[i + 1] * inv_dx2 / std::sqrt(weights_[i] * weights_[i + 1]);
  }
}

std::vector<double> DiscreteOperator::apply(const std::vector<double>& f) const {
  const int n = size();
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    double v = a_diag_[i] * f[i];
    if (i > 0) v += a_sub_[i - 1] * f[i - 1];
    if (i + 1 < n) v += a_super_[i] * f[i + 1];
    g[i] = v;
  }
  return g;
}

double DiscreteOperator::inner(const std::vector<double>& f,
                               const std::vector<double>& g) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += f[i] * g[i] * weights_[i] * dx_;
  return s;
}

double DiscreteOperator::norm(const std::vector<double>& f) const {
  return std::sqrt(inner(f, f));
}

double DiscreteOperator::symmetry_defect() const {
  double defect = 0.0, scale = 0.0;
  for (int i = 0; i + 1 < size(); ++i) {
    const double lhs = weights_[i] * a_super_[i];
    const double rhs = weights_[i + 1] * a_sub_[i];
    defect = std::max(defect, std::abs(lhs - rhs));
    scale = std::max(scale, std::abs(lhs));
  }
  return scale > 0 ? defect / scale : 0.0;
}

double DiscreteOperator::spectral_upper_bound() const {
  double bound = 0.0;
  for (int i = 0; i < size(); ++i) {
    double r = std::abs(a_diag_[i]);
    if (i > 0) r += std::abs(a_sub_[i - 1]);
    if (i + 1 < size()) r += std::abs(a_super_[i]);
    bound = std::max(bound, r);
  }
  return bound;
}

double DiscreteOperator::points_per_wavelength(double lambda_top) const {
  if (lambda_top <= 0.0) return 1e300;
  return 2.0 * M_PI / (std::sqrt(lambda_top) * dx_);
}

nlohmann::json DiscreteOperator::to_json() const {
  return nlohmann::json{{"format", "tridiagonal-v1"},
                        {"x_min", x_min_},
                        {"x_max", x_max_},
                        {"dx", dx_},
                        {"nodes", nodes_},
                        {"weights", weights_},
                        {"sym_diag", diag_},
                        {"sym_off", off_},
                        {"provenance", provenance_}};
}

DiscreteOperator build_mode_operator(const EndModel& end, int mode,
                                     const GridSpec& grid, Formulation formulation) {
  if (mode < 0 || mode >= static_cast<int>(end.mode_eigenvalues.size()))
    throw std::invalid_argument("build_mode_operator: mode index out of range");
  const double lam = end.mode_eigenvalues[mode];
  std::ostringstream prov;
  if (end.kind == EndModel::Kind::Cylinder) {
    if (formulation != Formulation::Cylinder)
      throw std::invalid_argument("cylinder end uses the Cylinder formulation");
    prov << "cylinder mode " << mode;
    return DiscreteOperator(expr_one(), expr_const(lam), expr_one(), grid,
                            prov.str(), formulation, mode);
  }
  const int n = end.cross_dim;
  if (formulation == Formulation::CuspU) {
    if (grid.x_min < 1.0)
      throw std::invalid_argument("cusp u-grid starts at u >= 1");
    prov << "cusp(n=" << n << ") mode " << mode << " [u]";
    // -(1/w)(p f')' + q f with p = u^{1-n}, w = u^{-(n+1)}, q = lambda u^2
    auto u = expr_identity();
    auto p = expr_pow(u, 1.0 - n);
    auto w = expr_pow(u, -(n + 1.0));
    auto q = expr_scale(lam, expr_product(u, u));
    return DiscreteOperator(p, q, w, grid, prov.str(), formulation, mode);
  }
  if (formulation == Formulation::LogX) {
    prov << "cusp(n=" << n << ") mode " << mode << " [log]";
    // -f'' + (n^2/4 + lambda e^{2x}) f
    auto q = expr_sum(expr_const(0.25 * n * n), expr_scale(lam, expr_exp(2.0)));
    return DiscreteOperator(expr_one(), q, expr_one(), grid, prov.str(),
                            formulation, mode);
  }
  throw std::invalid_argument("unsupported formulation for cusp end");
}

DiscreteOperator to_log_coordinates(const DiscreteOperator& op, int cross_dim) {
  if (op.formulation() != Formulation::CuspU)
    throw std::invalid_argument("to_log_coordinates expects a CuspU operator");
  GridSpec g;
  g.x_min = std::log(op.x_min());
  g.x_max = std::log(op.x_max());
  g.points = op.size();
  const double lam_u2 = op.coeff_q()->eval(1.0);  // q(u) = lambda u^2, so q(1) = lambda
  EndModel end = EndModel::cusp(cross_dim, op.mode() + 1);
  end.mode_eigenvalues[op.mode()] = lam_u2;
  return build_mode_operator(end, op.mode(), g, Formulation::LogX);
}

std::vector<double> log_conjugate(const std::vector<double>& f_u,
                                  const std::vector<double>& u_nodes,
                                  const std::vector<double>& x_nodes, int cross_dim) {
  // (Vf)(x) = e^{-n x / 2} f(e^x), linear interpolation in u between nodes.
  std::vector<double> out(x_nodes.size());
  for (std::size_t i = 0; i < x_nodes.size(); ++i) {
    const double u = std::exp(x_nodes[i]);
    auto it = std::lower_bound(u_nodes.begin(), u_nodes.end(), u);
    double fu;
    if (it == u_nodes.begin())
      fu = f_u.front();
    else if (it == u_nodes.end())
      fu = f_u.back();
    else {
      const std::size_t j = it - u_nodes.begin();
      const double t = (u - u_nodes[j - 1]) / (u_nodes[j] - u_nodes[j - 1]);
      fu = (1.0 - t) * f_u[j - 1] + t * f_u[j];
    }
    out[i] = std::exp(-0.5 * cross_dim * x_nodes[i]) * fu;
  }
  return out;
}

std::vector<double> log_conjugate_inverse(const std::vector<double>& f_x,
                                          const std::vector<double>& x_nodes,
                                          const std::vector<double>& u_nodes,
                                          int cross_dim) {
  std::vector<double> out(u_nodes.size());
  for (std::size_t i = 0; i < u_nodes.size(); ++i) {
    const double x = std::log(u_nodes[i]);
    auto it = std::lower_bound(x_nodes.begin(), x_nodes.end(), x);
    double fx;
    if (it == x_nodes.begin())
      fx = f_x.front();
    else if (it == x_nodes.end())
      fx = f_x.back();
    else {
      const std::size_t j = it - x_nodes.begin();
      const double t = (x - x_nodes[j - 1]) / (x_nodes[j] - x_nodes[j - 1]);
      fx = (1.0 - t) * f_x[j - 1] + t * f_x[j];
    }
    out[i] = std::exp(0.5 * cross_dim * x) * fx;
  }
  return out;
}

namespace {

std::vector<double> central_difference(const std::vector<double>& f, double dx) {
  // Dirichlet zero-padding at both ends.
  const int n = static_cast<int>(f.size());
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) {
    const double fp = i + 1 < n ? f[i + 1] : 0.0;
    const double fm = i > 0 ? f[i - 1] : 0.0;
    d[i] = (fp - fm) / (2.0 * dx);
  }
  return d;
}

}  // namespace

double weighted_norm(const DiscreteOperator& op, const std::vector<double>& f,
                     const std::vector<double>& xi, int k, SobolevKind kind) {
  if (static_cast<int>(f.size()) != op.size() ||
      static_cast<int>(xi.size()) != op.size())
    throw std::invalid_argument("weighted_norm: size mismatch");
  if (kind == SobolevKind::W) {
    if (k * 2 >= op.size())
      throw std::invalid_argument("weighted_norm: stencil exceeds grid");
    double total = 0.0;
    std::vector<double> d = f;
    for (int i = 0; i <= k; ++i) {
      if (i > 0) d = central_difference(d, op.dx());
      for (int j = 0; j < op.size(); ++j)
        total += d[j] * d[j] * xi[j] * op.weights()[j] * op.dx();
    }
    return std::sqrt(total);
  }
  // H-kind: ||(A + Id)^{k/2} f||_{L^2_xi}
  if (k % 2 != 0)
    throw std::invalid_argument(
        "weighted_norm: odd H order requires spectral data; use even k");
  std::vector<double> g = f;
  for (int i = 0; i < k / 2; ++i) {
    std::vector<double> ag = op.apply(g);
    for (int j = 0; j < op.size(); ++j) g[j] = ag[j] + g[j];
  }
  double total = 0.0;
  for (int j = 0; j < op.size(); ++j)
    total += g[j] * g[j] * xi[j] * op.weights()[j] * op.dx();
  return std::sqrt(total);
}

double end_distance(const DiscreteOperator& op, double coord) {
  if (op.formulation() == Formulation::CuspU) return std::log(coord);
  return coord - op.x_min();
}

PerturbedOperator perturb_operator(const DiscreteOperator& op,
                                   const PerturbationSpec& spec,
                                   const DecayProfile& beta) {
  ExprPtr p = op.coeff_p();
  ExprPtr q = op.coeff_q();
  ExprPtr w = op.coeff_w();
  if (spec.shape_p) p = expr_product(p, expr_sum(expr_one(), spec.shape_p));
  if (spec.shape_q) q = expr_sum(q, spec.shape_q);
  if (spec.shape_w) w = expr_product(w, expr_sum(expr_one(), spec.shape_w));

  GridSpec g;
  g.x_min = op.x_min();
  g.x_max = op.x_max();
  g.points = op.size();
  DiscreteOperator hop(p, q, w, g, op.provenance() + " perturbed",
                       op.formulation(), op.mode());

  // Coefficient difference A_g - A_h = xi0 + xi1 d/dx + xi2 d^2/dx^2 with
  //   xi2 = pt/wt - p/w, xi1 = pt'/wt - p'/w, xi0 = q - qt.
  auto over_w = [&](const ExprPtr& num, const ExprPtr& den) {
    return expr_quotient(num, den);
  };
  ExprPtr xi2 = expr_sum(over_w(p, w), expr_scale(-1.0, over_w(op.coeff_p(), op.coeff_w())));
  ExprPtr xi1 = expr_sum(over_w(p->derivative(), w),
                         expr_scale(-1.0, over_w(op.coeff_p()->derivative(), op.coeff_w())));
  ExprPtr xi0 = expr_sum(op.coeff_q(), expr_scale(-1.0, q));

  PerturbedOperator out{std::move(hop), {}};
  auto& dec = out.decomposition;
  const auto& xs = op.nodes();
  dec.xi0.resize(xs.size());
  dec.xi1.resize(xs.size());
  dec.xi2.resize(xs.size());
  dec.fitted_C = 0.0;
  std::vector<double> env(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    dec.xi2[i] = xi2->eval(xs[i]);
    dec.xi1[i] = xi1->eval(xs[i]);
    dec.xi0[i] = xi0->eval(xs[i]);
    const double d = end_distance(op, xs[i]);
    env[i] = std::exp(beta.log_eval(1.0 + d));
    const double worst =
        std::max({std::abs(dec.xi0[i]), std::abs(dec.xi1[i]), std::abs(dec.xi2[i])});
    dec.fitted_C = std::max(dec.fitted_C, worst / env[i]);
  }
  // Decay audit: the worst coefficient against beta must not grow on the tail.
  std::vector<double> lx, lr;
  for (std::size_t i = xs.size() / 2; i < xs.size(); ++i) {
    const double worst =
        std::max({std::abs(dec.xi0[i]), std::abs(dec.xi1[i]), std::abs(dec.xi2[i])});
    if (worst > 1e-300) {
      lx.push_back(std::log(1.0 + end_distance(op, xs[i])));
      lr.push_back(std::log(worst / env[i]));
    }
  }
  if (lx.size() < 4)
    dec.decay_ok = true;
  else
    dec.decay_ok = fit_line(lx, lr).slope <= 0.15;
  return out;
}

}  // namespace scatlab
