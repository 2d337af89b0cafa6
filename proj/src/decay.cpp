#include "scatlab/decay.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scatlab/numerics.hpp"

namespace scatlab {

DecayProfile DecayProfile::power_law(double a) {
  if (!(a > 0.0))
    throw std::invalid_argument("power_law: exponent a must be positive, got " +
                                std::to_string(a));
  DecayProfile p;
  p.kind_ = Kind::PowerLaw;
  p.p1_ = a;
  return p;
}

DecayProfile DecayProfile::exponential(double c) {
  if (!(c >= 0.0))
    throw std::invalid_argument("exponential: rate c must be >= 0, got " +
                                std::to_string(c));
  DecayProfile p;
  p.kind_ = Kind::Exponential;
  p.p1_ = c;
  return p;
}

DecayProfile DecayProfile::stretched_exp(double c, double alpha) {
  if (!(c > 0.0))
    throw std::invalid_argument("stretched_exp: rate c must be positive, got " +
                                std::to_string(c));
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("stretched_exp: alpha must lie in (0,1), got " +
                                std::to_string(alpha));
  DecayProfile p;
  p.kind_ = Kind::StretchedExp;
  p.p1_ = c;
  p.p2_ = alpha;
  return p;
}

DecayProfile DecayProfile::product(std::vector<DecayProfile> factors) {
  if (factors.empty())
    throw std::invalid_argument("product: needs at least one factor");
  DecayProfile p;
  p.kind_ = Kind::Product;
  p.children_ = std::move(factors);
  return p;
}

DecayProfile DecayProfile::power(DecayProfile base, double exponent) {
  if (!(exponent > 0.0))
    throw std::invalid_argument("power: exponent must be positive, got " +
                                std::to_string(exponent));
  DecayProfile p;
  p.kind_ = Kind::Power;
  p.p1_ = exponent;
  p.children_.push_back(std::move(base));
  return p;
}

double DecayProfile::log_eval(double x) const {
  switch (kind_) {
    case Kind::PowerLaw:
      return -p1_ * std::log(x);
    case Kind::Exponential:
      return -p1_ * x;
    case Kind::StretchedExp:
      return -p1_ * std::pow(x, p2_);
    case Kind::Product: {
      double s = 0.0;
      for (const auto& c : children_) s += c.log_eval(x);
      return s;
    }
    case Kind::Power:
      return p1_ * children_[0].log_eval(x);
  }
  return 0.0;
}

bool DecayProfile::is_subexponential() const {
  switch (kind_) {
    case Kind::PowerLaw:
    case Kind::StretchedExp:
      return true;
    case Kind::Exponential:
      return p1_ == 0.0;
    case Kind::Product:
      return std::all_of(children_.begin(), children_.end(),
                         [](const DecayProfile& c) { return c.is_subexponential(); });
    case Kind::Power:
      return children_[0].is_subexponential();
  }
  return false;
}

ExprPtr DecayProfile::as_expr() const {
  switch (kind_) {
    case Kind::PowerLaw:
      return expr_pow(expr_identity(), -p1_);
    case Kind::Exponential:
      return expr_exp(-p1_);
    case Kind::StretchedExp:
      return expr_stretched_exp(p1_, p2_);
    case Kind::Product: {
      ExprPtr e = children_[0].as_expr();
      for (std::size_t i = 1; i < children_.size(); ++i)
        e = expr_product(e, children_[i].as_expr());
      return e;
    }
    case Kind::Power:
      return expr_pow(children_[0].as_expr(), p1_);
  }
  return expr_one();
}

nlohmann::json DecayProfile::to_json() const {
  nlohmann::json j;
  switch (kind_) {
    case Kind::PowerLaw:
      j = {{"kind", "power_law"}, {"params", {{"a", p1_}}}};
      break;
    case Kind::Exponential:
      j = {{"kind", "exponential"}, {"params", {{"c", p1_}}}};
      break;
    case Kind::StretchedExp:
      j = {{"kind", "stretched_exp"}, {"params", {{"c", p1_}, {"alpha", p2_}}}};
      break;
    case Kind::Product: {
      nlohmann::json factors = nlohmann::json::array();
      for (const auto& c : children_) factors.push_back(c.to_json());
      j = {{"kind", "product"}, {"factors", factors}};
      break;
    }
    case Kind::Power:
      j = {{"kind", "power"},
           {"base", children_[0].to_json()},
           {"params", {{"exponent", p1_}}}};
      break;
  }
  return j;
}

DecayProfile DecayProfile::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "power_law")
    return power_law(j.at("params").at("a").get<double>());
  if (kind == "exponential")
    return exponential(j.at("params").at("c").get<double>());
  if (kind == "stretched_exp")
    return stretched_exp(j.at("params").at("c").get<double>(),
                         j.at("params").at("alpha").get<double>());
  if (kind == "product") {
    std::vector<DecayProfile> factors;
    for (const auto& f : j.at("factors")) factors.push_back(from_json(f));
    return product(std::move(factors));
  }
  if (kind == "power")
    return power(from_json(j.at("base")),
                 j.at("params").at("exponent").get<double>());
  throw std::invalid_argument("unknown decay profile kind: " + kind);
}

DecayReport verify_moderate_decay(const DecayProfile& beta,
                                  const DecayGrid& grid) {
  if (grid.x_max < 100.0)
    throw std::invalid_argument("verify_moderate_decay: x_max must be >= 100");
  if (grid.points < 1000)
    throw std::invalid_argument("verify_moderate_decay: need >= 1000 grid points");
  if (grid.pair_points * grid.pair_points < 10000)
    throw std::invalid_argument("verify_moderate_decay: need >= 10^4 pairs");

  DecayReport rep;
  rep.is_subexponential = beta.is_subexponential();

  const std::vector<double> xs = geomspace(1.0, grid.x_max, grid.points);

  // Positivity and monotonicity on the sample grid (in log values the
  // positivity is automatic; a NaN marks an invalid profile).
  rep.monotone_ok = true;
  double prev = beta.log_eval(xs[0]);
  if (!std::isfinite(prev)) {
    rep.monotone_ok = false;
    rep.failure = "non-finite value at x=1";
  }
  for (std::size_t i = 1; i < xs.size() && rep.monotone_ok; ++i) {
    const double cur = beta.log_eval(xs[i]);
    if (!std::isfinite(cur) || cur > prev + 1e-12) {
      rep.monotone_ok = false;
      std::ostringstream os;
      os << "beta increases at x=" << xs[i];
      rep.failure = os.str();
    }
    prev = cur;
  }

  // Condition 1: sup x b(x). The grid supremum is always finite; divergence
  // shows up as a rising tail of log(x b(x)) against log x.
  double sup_log = -1e300;
  std::vector<double> tail_logx, tail_logxb;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lxb = std::log(xs[i]) + beta.log_eval(xs[i]);
    sup_log = std::max(sup_log, lxb);
    if (4 * i >= 3 * xs.size()) {
      tail_logx.push_back(std::log(xs[i]));
      tail_logxb.push_back(lxb);
    }
  }
  rep.sup_x_beta = std::exp(sup_log);
  const LineFit tail = fit_line(tail_logx, tail_logxb);
  rep.sup_finite = tail.slope <= 0.02;
  if (!rep.sup_finite && rep.failure.empty()) rep.failure = "x*beta(x) rises on the tail";

  // Condition 2: C_b = inf over the pair grid of b(x+y)/(b(x)b(y)).
  const std::vector<double> ps = geomspace(1.0, grid.x_max, grid.pair_points);
  double log_cb = 1e300;
  for (double x : ps)
    for (double y : ps) {
      const double q = beta.log_eval(x + y) - beta.log_eval(x) - beta.log_eval(y);
      log_cb = std::min(log_cb, q);
    }
  rep.c_beta_estimate = std::min(1.0, std::exp(log_cb));
  rep.c_beta_safe = 0.99 * rep.c_beta_estimate;

  // Exponential envelope b(x) >= C e^{-c x} with c = -log(C_b b(1)) and
  // C = b(2); the safe C_b keeps the fitted c conservative.
  rep.envelope_c = -std::log(rep.c_beta_safe) - beta.log_eval(1.0);
  rep.envelope_C = beta(2.0);
  rep.envelope_ok = true;
  const double log_env_C = std::log(rep.envelope_C);
  for (double x : xs) {
    if (beta.log_eval(x) < log_env_C - rep.envelope_c * x - 1e-9) {
      rep.envelope_ok = false;
      if (rep.failure.empty()) {
        std::ostringstream os;
        os << "envelope fails at x=" << x;
        rep.failure = os.str();
      }
      break;
    }
  }

  rep.passed = rep.monotone_ok && rep.sup_finite && rep.envelope_ok &&
               rep.c_beta_estimate > 0.0;
  return rep;
}

QuotientBoundReport check_quotient_bounds(const DecayProfile& beta,
                                          double c_beta,
                                          const std::vector<DistanceTriple>& triples) {
  QuotientBoundReport rep;
  rep.worst_margin = 1e300;
  const double log_cb = std::log(c_beta);
  for (const auto& t : triples) {
    if (t.d_xq < 0 || t.d_yq < 0 || t.d_xy < 0 ||
        t.d_xy > t.d_xq + t.d_yq + 1e-12 ||
        t.d_xy < std::abs(t.d_xq - t.d_yq) - 1e-12) {
      std::ostringstream os;
      os << "triple (" << t.d_xq << ", " << t.d_yq << ", " << t.d_xy
         << ") violates the triangle inequality";
      throw std::invalid_argument(os.str());
    }
    const double ratio = beta.log_eval(1.0 + t.d_xq) - beta.log_eval(1.0 + t.d_yq);
    const double lower = log_cb + beta.log_eval(1.0 + t.d_xy);
    const double upper = -lower;
    rep.worst_margin = std::min(rep.worst_margin,
                                std::min(ratio - lower, upper - ratio));
  }
  rep.pass = rep.worst_margin >= -1e-9;
  return rep;
}

}  // namespace scatlab
