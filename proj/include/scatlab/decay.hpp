#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scatlab/expr.hpp"

namespace scatlab {

// Weight functions on [1, oo): positive, continuous, non-increasing, with
//   1) sup x b(x) < oo
//   2) b(x+y) >= C_b b(x) b(y)
// The family is closed symbolic (power law, exponential, stretched
// exponential, products, positive powers), so log-values and derivatives are
// exact and underflow-free.
class DecayProfile {
public:
  enum class Kind { PowerLaw, Exponential, StretchedExp, Product, Power };

  static DecayProfile power_law(double a);                 // x^{-a}, a > 0
  static DecayProfile exponential(double c);               // e^{-c x}, c >= 0
  static DecayProfile stretched_exp(double c, double alpha);  // e^{-c x^a}
  static DecayProfile product(std::vector<DecayProfile> factors);
  static DecayProfile power(DecayProfile base, double exponent);  // exponent > 0

  double operator()(double x) const { return std::exp(log_eval(x)); }
  double log_eval(double x) const;
  bool is_subexponential() const;
  Kind kind() const { return kind_; }

  // Evaluator as a differentiable expression (for coefficient algebra).
  ExprPtr as_expr() const;

  nlohmann::json to_json() const;
  static DecayProfile from_json(const nlohmann::json& j);

private:
  DecayProfile() = default;
  Kind kind_ = Kind::PowerLaw;
  double p1_ = 0.0, p2_ = 0.0;  // scalar parameters
  std::vector<DecayProfile> children_;
};

struct DecayGrid {
  double x_max = 1e3;   // >= 100 required
  int points = 1200;    // >= 1000 required
  int pair_points = 128;  // pair grid is pair_points^2 >= 10^4 pairs
};

struct DecayReport {
  double sup_x_beta = 0.0;        // sup over grid of x b(x)
  double c_beta_estimate = 0.0;   // inf over pair grid of b(x+y)/(b(x)b(y))
  double c_beta_safe = 0.0;       // estimate * 0.99, used downstream
  double envelope_C = 0.0;        // b(x) >= C e^{-c x} on samples
  double envelope_c = 0.0;
  bool is_subexponential = false;
  bool monotone_ok = false;
  bool sup_finite = false;        // tail trend of x b(x) not increasing
  bool envelope_ok = false;
  bool passed = false;
  std::string failure;            // offending sample when a check fails
};

DecayReport verify_moderate_decay(const DecayProfile& beta,
                                  const DecayGrid& grid = {});

// One (d(x,q), d(y,q), d(x,y)) triple; must satisfy the triangle inequality.
struct DistanceTriple {
  double d_xq;
  double d_yq;
  double d_xy;
};

struct QuotientBoundReport {
  bool pass = false;
  double worst_margin = 0.0;  // min log-distance to either bound
};

// Checks C_b b(1+d(x,y)) <= b(1+d(x,q))/b(1+d(y,q)) <= 1/(C_b b(1+d(x,y)))
// for every triple. Throws std::invalid_argument on a triangle violation.
QuotientBoundReport check_quotient_bounds(const DecayProfile& beta,
                                          double c_beta,
                                          const std::vector<DistanceTriple>& triples);

}  // namespace scatlab
