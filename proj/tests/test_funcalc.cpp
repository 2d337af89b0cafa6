#include <doctest.h>

#include <cmath>

#include "scatlab/funcalc.hpp"
#include "scatlab/numerics.hpp"

using namespace scatlab;

namespace {

DiscreteOperator cylinder_op(double L, int points, double mu = 0.0) {
  auto end = EndModel::cylinder({mu == 0.0 ? 0.0 : 0.0, 1.0});
  GridSpec grid;
  grid.x_max = L;
  grid.points = points;
  return build_mode_operator(end, 0, grid, Formulation::Cylinder);
}

std::vector<double> bump(const DiscreteOperator& op, double center, double width) {
  std::vector<double> f(op.size(), 0.0);
  for (int i = 0; i < op.size(); ++i) {
    const double r = (op.nodes()[i] - center) / width;
    if (std::abs(r) < 1.0) f[i] = std::exp(-r * r / (1.0 - r * r));
  }
  return f;
}

double rel_gap(const DiscreteOperator& op, const std::vector<double>& a,
               const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return op.norm(d) / op.norm(b);
}

}  // namespace

TEST_CASE("spectral decomposition quality") {
  auto op = cylinder_op(15.0, 300);
  auto spec = spectral_decompose(op);
  CHECK(spec.size() == 300);
  CHECK(std::is_sorted(spec.eigenvalues.begin(), spec.eigenvalues.end()));
  CHECK(spec.max_residual(op) < 1e-10 * op.spectral_upper_bound());
  CHECK(spec.orthonormality_defect() < 1e-10);
}

TEST_CASE("cosine propagator basics") {
  auto op = cylinder_op(15.0, 300);
  auto spec = spectral_decompose(op);
  auto f0 = bump(op, 7.5, 0.8);

  SUBCASE("s = 0 is the identity") {
    auto r = cosine_propagator(op, spec, f0, 0.0, PropagatorMethod::Spectral);
    CHECK(rel_gap(op, r.values, f0) < 1e-13);
  }
  SUBCASE("eigenvectors pick up cos(s sqrt(lambda))") {
    const int k = 11;
    std::vector<double> v(op.size());
    for (int i = 0; i < op.size(); ++i) v[i] = spec.vectors(i, k);
    const double s = 1.7;
    auto r = cosine_propagator(op, spec, v, s, PropagatorMethod::Spectral);
    const double c = std::cos(s * std::sqrt(spec.eigenvalues[k]));
    for (int i = 0; i < op.size(); i += 37)
      CHECK(r.values[i] == doctest::Approx(c * v[i]).epsilon(1e-9));
  }
  SUBCASE("leapfrog matches spectral at second order") {
    double prev = 0.0;
    for (int pts : {300, 600}) {
      auto opr = cylinder_op(15.0, pts);
      auto specr = spectral_decompose(opr);
      auto f = bump(opr, 7.5, 0.8);
      auto lep = cosine_propagator(opr, specr, f, 0.8, PropagatorMethod::Leapfrog);
      auto sp = cosine_propagator(opr, specr, f, 0.8, PropagatorMethod::Spectral);
      const double gap = rel_gap(opr, lep.values, sp.values);
      if (prev > 0.0) CHECK(gap < 0.35 * prev);
      prev = gap;
      CHECK(lep.energy_drift < 1e-8);
    }
  }
  SUBCASE("CFL violation is refused") {
    CHECK_THROWS_AS(cosine_propagator(op, spec, f0, 1.0,
                                      PropagatorMethod::Leapfrog, 0.9,
                                      10.0 / std::sqrt(op.spectral_upper_bound())),
                    std::invalid_argument);
  }
}

TEST_CASE("finite propagation speed") {
  auto op = cylinder_op(20.0, 1200);
  auto spec = spectral_decompose(op);
  auto f0 = bump(op, 10.0, 0.15);
  auto r = cosine_propagator(op, spec, f0, 0.5, PropagatorMethod::Leapfrog);
  const double leak = causal_leakage(op, f0, r.values, 0.5, 5.0 * op.dx());
  CHECK(leak <= 1e-6);
}

TEST_CASE("heat operator via the cosine transform") {
  auto op = cylinder_op(20.0, 500);
  auto spec = spectral_decompose(op);
  auto f0 = bump(op, 10.0, 2.0);
  const double omega_max = std::sqrt(spec.eigenvalues.back());
  for (double t : {0.1, 1.0}) {
    auto ts = heat_transform_spec(t, omega_max, 1e-12);
    auto recon = function_of_sqrt(spec, ts, f0);
    auto exact = heat_apply(spec, t, f0);
    CHECK(rel_gap(op, recon, exact) < 1e-6);
  }
  // The transform value at 0 is sqrt(pi / t).
  auto ts1 = heat_transform_spec(1.0, omega_max, 1e-12);
  CHECK(ts1.fhat(0.0) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
}

TEST_CASE("resolvent via the cosine transform") {
  auto op = cylinder_op(20.0, 400);
  auto spec = spectral_decompose(op);
  // Band-limit the data so the transform window needs only modest frequencies.
  std::vector<double> f0(op.size(), 0.0);
  for (int k = 0; k < 12; ++k)
    for (int i = 0; i < op.size(); ++i)
      f0[i] += spec.vectors(i, k) / (1.0 + k);
  const double lam0 = 1.0;
  TransformSpec ts;
  ts.fhat = [lam0](double y) {
    return M_PI / std::sqrt(lam0) * std::exp(-std::sqrt(lam0) * y);
  };
  CHECK(ts.fhat(0.0) == doctest::Approx(M_PI).epsilon(1e-12));
  ts.window = 30.0;
  ts.nodes = 60000;
  auto recon = function_of_sqrt(spec, ts, f0);
  auto exact = spec.apply_function(
      [lam0](double l) { return 1.0 / (lam0 + l); }, f0);
  CHECK(rel_gap(op, recon, exact) < 1e-5);
}

TEST_CASE("heat and resolvent spectral paths") {
  auto op = cylinder_op(15.0, 300);
  auto spec = spectral_decompose(op);
  auto f0 = bump(op, 7.0, 1.5);

  SUBCASE("t -> 0 recovers the data") {
    auto h = heat_apply(spec, 1e-8, f0);
    CHECK(rel_gap(op, h, f0) < 1e-6);
  }
  SUBCASE("heat quadratic form is non-increasing in t") {
    double prev = 1e300;
    for (double t : {0.1, 0.2, 0.5, 1.0, 2.0}) {
      auto h = heat_apply(spec, t, f0);
      const double q = op.inner(f0, h);
      CHECK(q <= prev + 1e-14);
      prev = q;
    }
  }
  SUBCASE("resolvent residual") {
    auto r = resolvent_apply(spec, -2.5, f0);
    CHECK_FALSE(r.conditioning_warning);
    auto ar = op.apply(r.values);
    std::vector<double> resid(op.size());
    for (int i = 0; i < op.size(); ++i)
      resid[i] = ar[i] - (-2.5) * r.values[i] - f0[i];
    CHECK(op.norm(resid) < 1e-10 * op.norm(f0));
  }
  SUBCASE("near-eigenvalue conditioning warning") {
    auto r = resolvent_apply(spec, spec.eigenvalues[3] + 1e-12, f0);
    CHECK(r.conditioning_warning);
  }
}

TEST_CASE("weighted propagator norms") {
  const int n = 1;
  auto end = EndModel::cusp(n, 1);
  GridSpec grid;
  grid.x_max = 25.0;
  grid.points = 320;
  auto op = build_mode_operator(end, 0, grid, Formulation::LogX);
  auto spec = spectral_decompose(op);

  SUBCASE("s = 0 has norm one") {
    std::vector<double> beta(op.size());
    for (int i = 0; i < op.size(); ++i)
      beta[i] = std::exp(-0.3 * op.nodes()[i]);
    CHECK(weighted_propagator_norm(op, spec, beta, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("unit weight keeps the propagator a contraction") {
    std::vector<double> ones(op.size(), 1.0);
    for (double s : {0.5, 2.0, 7.0})
      CHECK(weighted_propagator_norm(op, spec, ones, s) <= 1.0 + 1e-10);
  }
  SUBCASE("exponential weight gives at-most-linear log growth") {
    std::vector<double> beta(op.size());
    for (int i = 0; i < op.size(); ++i)
      beta[i] = std::exp(-0.1 * op.nodes()[i]);
    auto fit = weighted_opnorm_growth(op, spec, beta, linspace(0.0, 12.0, 13));
    CHECK(fit.max_residual <= 0.2);
    CHECK(fit.c >= 0.0);
    CHECK(fit.lemma_ratio_max < 1e6);
    CHECK(fit.lemma_ratio_max / fit.lemma_ratio_min < 50.0);
  }
}
