#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace scatlab {

// Closed family of smooth scalar functions of one variable with exact
// derivatives of every order. Warp profiles, perturbation envelopes and
// Sturm-Liouville coefficients are built from these nodes, so covariant
// derivatives and coefficient algebra never fall back on finite differences.
class Expr {
public:
  using Ptr = std::shared_ptr<const Expr>;

  virtual ~Expr() = default;
  virtual double eval(double x) const = 0;
  virtual Ptr derivative() const = 0;
  virtual bool is_zero() const { return false; }

  double deriv_eval(double x, int order) const {
    if (order == 0) return eval(x);
    Ptr d = derivative();
    for (int i = 1; i < order; ++i) d = d->derivative();
    return d->eval(x);
  }
};

using ExprPtr = Expr::Ptr;

class ConstExpr final : public Expr {
public:
  explicit ConstExpr(double c) : c_(c) {}
  double eval(double) const override { return c_; }
  Ptr derivative() const override { return std::make_shared<ConstExpr>(0.0); }
  bool is_zero() const override { return c_ == 0.0; }
  double value() const { return c_; }

private:
  double c_;
};

inline ExprPtr expr_const(double c) { return std::make_shared<ConstExpr>(c); }
inline ExprPtr expr_zero() { return expr_const(0.0); }
inline ExprPtr expr_one() { return expr_const(1.0); }

// e^{a x}
class ExpExpr final : public Expr {
public:
  explicit ExpExpr(double a) : a_(a) {}
  double eval(double x) const override { return std::exp(a_ * x); }
  Ptr derivative() const override;

private:
  double a_;
};

// (1 + x)^{-gamma}, gamma real
class PowerDecayExpr final : public Expr {
public:
  explicit PowerDecayExpr(double gamma) : gamma_(gamma) {}
  double eval(double x) const override { return std::pow(1.0 + x, -gamma_); }
  Ptr derivative() const override;

private:
  double gamma_;
};

// x (identity), for polynomial coefficients such as u^{1-n} via PowExpr
class IdentityExpr final : public Expr {
public:
  double eval(double x) const override { return x; }
  Ptr derivative() const override { return expr_one(); }
};

class SumExpr final : public Expr {
public:
  SumExpr(ExprPtr a, ExprPtr b) : a_(std::move(a)), b_(std::move(b)) {}
  double eval(double x) const override { return a_->eval(x) + b_->eval(x); }
  Ptr derivative() const override;

private:
  ExprPtr a_, b_;
};

class ProductExpr final : public Expr {
public:
  ProductExpr(ExprPtr a, ExprPtr b) : a_(std::move(a)), b_(std::move(b)) {}
  double eval(double x) const override { return a_->eval(x) * b_->eval(x); }
  Ptr derivative() const override;

private:
  ExprPtr a_, b_;
};

class ScaleExpr final : public Expr {
public:
  ScaleExpr(double c, ExprPtr a) : c_(c), a_(std::move(a)) {}
  double eval(double x) const override { return c_ * a_->eval(x); }
  Ptr derivative() const override;
  bool is_zero() const override { return c_ == 0.0 || a_->is_zero(); }

private:
  double c_;
  ExprPtr a_;
};

class QuotientExpr final : public Expr {
public:
  QuotientExpr(ExprPtr a, ExprPtr b) : a_(std::move(a)), b_(std::move(b)) {}
  double eval(double x) const override { return a_->eval(x) / b_->eval(x); }
  Ptr derivative() const override;

private:
  ExprPtr a_, b_;
};

// f(x)^p for positive f, real p
class PowExpr final : public Expr {
public:
  PowExpr(ExprPtr base, double p) : base_(std::move(base)), p_(p) {}
  double eval(double x) const override { return std::pow(base_->eval(x), p_); }
  Ptr derivative() const override;

private:
  ExprPtr base_;
  double p_;
};

// exp(-c x^alpha), 0 < alpha < 1 (stretched exponential envelope)
class StretchedExpExpr final : public Expr {
public:
  StretchedExpExpr(double c, double alpha) : c_(c), alpha_(alpha) {
    if (x_floor_ <= 0) throw std::logic_error("bad floor");
  }
  double eval(double x) const override {
    return std::exp(-c_ * std::pow(std::max(x, x_floor_), alpha_));
  }
  Ptr derivative() const override;

private:
  double c_, alpha_;
  static constexpr double x_floor_ = 1e-12;
};

inline ExprPtr expr_sum(ExprPtr a, ExprPtr b) {
  if (a->is_zero()) return b;
  if (b->is_zero()) return a;
  return std::make_shared<SumExpr>(std::move(a), std::move(b));
}

inline ExprPtr expr_product(ExprPtr a, ExprPtr b) {
  if (a->is_zero() || b->is_zero()) return expr_zero();
  return std::make_shared<ProductExpr>(std::move(a), std::move(b));
}

inline ExprPtr expr_scale(double c, ExprPtr a) {
  if (c == 0.0 || a->is_zero()) return expr_zero();
  if (c == 1.0) return a;
  return std::make_shared<ScaleExpr>(c, std::move(a));
}

inline ExprPtr expr_quotient(ExprPtr a, ExprPtr b) {
  if (a->is_zero()) return expr_zero();
  return std::make_shared<QuotientExpr>(std::move(a), std::move(b));
}

inline ExprPtr expr_pow(ExprPtr base, double p) {
  if (p == 0.0) return expr_one();
  if (p == 1.0) return base;
  return std::make_shared<PowExpr>(std::move(base), p);
}

inline ExprPtr expr_exp(double a) { return std::make_shared<ExpExpr>(a); }
inline ExprPtr expr_power_decay(double gamma) {
  return std::make_shared<PowerDecayExpr>(gamma);
}
inline ExprPtr expr_identity() { return std::make_shared<IdentityExpr>(); }
inline ExprPtr expr_stretched_exp(double c, double alpha) {
  return std::make_shared<StretchedExpExpr>(c, alpha);
}

inline ExprPtr ExpExpr::derivative() const {
  return expr_scale(a_, std::make_shared<ExpExpr>(a_));
}

inline ExprPtr PowerDecayExpr::derivative() const {
  return expr_scale(-gamma_, std::make_shared<PowerDecayExpr>(gamma_ + 1.0));
}

inline ExprPtr SumExpr::derivative() const {
  return expr_sum(a_->derivative(), b_->derivative());
}

inline ExprPtr ProductExpr::derivative() const {
  return expr_sum(expr_product(a_->derivative(), b_),
                  expr_product(a_, b_->derivative()));
}

inline ExprPtr ScaleExpr::derivative() const {
  return expr_scale(c_, a_->derivative());
}

inline ExprPtr QuotientExpr::derivative() const {
  // (a/b)' = (a'b - ab')/b^2
  auto num = expr_sum(expr_product(a_->derivative(), b_),
                      expr_scale(-1.0, expr_product(a_, b_->derivative())));
  return expr_quotient(num, expr_product(b_, b_));
}

inline ExprPtr PowExpr::derivative() const {
  // p f^{p-1} f'
  return expr_scale(p_, expr_product(expr_pow(base_, p_ - 1.0),
                                     base_->derivative()));
}

inline ExprPtr StretchedExpExpr::derivative() const {
  // d/dx exp(-c x^a) = -c a x^{a-1} exp(-c x^a)
  auto self = std::make_shared<StretchedExpExpr>(c_, alpha_);
  auto xpow = expr_pow(expr_identity(), alpha_ - 1.0);
  return expr_scale(-c_ * alpha_, expr_product(xpow, self));
}

}  // namespace scatlab
