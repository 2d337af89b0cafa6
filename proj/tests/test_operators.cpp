#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "scatlab/funcalc.hpp"
#include "scatlab/numerics.hpp"
#include "scatlab/operators.hpp"

using namespace scatlab;

TEST_CASE("torus mode eigenvalues") {
  auto e1 = EndModel::cusp(1, 6);
  // circle: |m|^2 for m in Z -> 0, 1, 1, 4, 4, 9
  CHECK(e1.mode_eigenvalues == std::vector<double>{0, 1, 1, 4, 4, 9});
  auto e2 = EndModel::cusp(2, 5);
  CHECK(e2.mode_eigenvalues == std::vector<double>{0, 1, 1, 1, 1});
  CHECK_THROWS_AS(EndModel::cylinder({1.0, 2.0}), std::invalid_argument);
  auto cyl = EndModel::cylinder({0.0, 1.0, 4.0, 9.0});
  CHECK(cyl.mode_eigenvalues[2] == 4.0);
}

TEST_CASE("operator assembly and exact symmetry") {
  GridSpec grid;
  grid.x_min = 1.0;
  grid.x_max = 30.0;
  grid.points = 400;
  auto end = EndModel::cusp(2, 3);
  auto op = build_mode_operator(end, 0, grid, Formulation::CuspU);
  CHECK(op.symmetry_defect() < 1e-13);
  CHECK(op.size() == 400);
  for (double w : op.weights()) CHECK(w > 0.0);
  auto j = op.to_json();
  CHECK(j.at("format") == "tridiagonal-v1");
}

TEST_CASE("log-formulation eigenfunction residual") {
  // v = sin(lambda x) with lambda = m pi / X satisfies both Dirichlet ends and
  // (A - (n^2/4 + lambda^2)) v = O(dx^2) in the grid norm.
  const int n = 2;
  const double X = 10.0;
  auto end = EndModel::cusp(n, 1);
  double prev_res = 0.0;
  for (int pts : {400, 800}) {
    GridSpec grid;
    grid.x_max = X;
    grid.points = pts;
    auto op = build_mode_operator(end, 0, grid, Formulation::LogX);
    const double lambda = 3.0 * M_PI / X;
    std::vector<double> v(op.size());
    for (int i = 0; i < op.size(); ++i) v[i] = std::sin(lambda * op.nodes()[i]);
    const std::vector<double> av = op.apply(v);
    const double mu = 0.25 * n * n + lambda * lambda;
    std::vector<double> r(op.size());
    for (int i = 0; i < op.size(); ++i) r[i] = av[i] - mu * v[i];
    const double res = op.norm(r);
    if (prev_res > 0.0) CHECK(res < 0.3 * prev_res);  // O(dx^2)
    prev_res = res;
  }
}

TEST_CASE("cusp-u eigenfunction residual and boundary value") {
  const int n = 1;
  const double L = 20.0;
  auto end = EndModel::cusp(n, 1);
  GridSpec grid;
  grid.x_min = 1.0;
  grid.x_max = L;
  grid.points = 3000;
  auto op = build_mode_operator(end, 0, grid, Formulation::CuspU);
  const double lambda = 2.0 * M_PI / std::log(L);
  auto f = [&](double u) { return std::pow(u, 0.5 * n) * std::sin(lambda * std::log(u)); };
  CHECK(f(1.0) == doctest::Approx(0.0));
  std::vector<double> v(op.size());
  for (int i = 0; i < op.size(); ++i) v[i] = f(op.nodes()[i]);
  const std::vector<double> av = op.apply(v);
  const double mu = 0.25 * n * n + lambda * lambda;
  double worst = 0.0;
  // Interior residual only: the top truncation row sees the nonzero tail.
  for (int i = 0; i < op.size() - 200; ++i)
    worst = std::max(worst, std::abs(av[i] - mu * v[i]));
  CHECK(worst < 2e-3);
}

TEST_CASE("truncated free cusp spectrum approaches the threshold band") {
  // Lowest eigenvalue of the log formulation -> n^2/4 + (pi/X)^2.
  for (int n : {1, 2}) {
    auto end = EndModel::cusp(n, 1);
    GridSpec grid;
    grid.x_max = 30.0;
    grid.points = 1500;
    auto op = build_mode_operator(end, 0, grid, Formulation::LogX);
    const auto evs = smallest_eigenvalues(op, 3);
    const double expect = 0.25 * n * n + std::pow(M_PI / grid.x_max, 2);
    CHECK(evs[0] == doctest::Approx(expect).epsilon(1e-3));
  }
}

TEST_CASE("conjugation oracle") {
  const int n = 2;
  auto end = EndModel::cusp(n, 2);
  GridSpec grid;
  grid.x_min = 1.0;
  grid.x_max = 25.0;
  grid.points = 2400;
  auto op_u = build_mode_operator(end, 0, grid, Formulation::CuspU);
  auto op_x = to_log_coordinates(op_u, n);
  CHECK(op_x.formulation() == Formulation::LogX);
  CHECK(op_x.x_max() == doctest::Approx(std::log(25.0)));

  SUBCASE("round trip of the unitary map") {
    std::vector<double> f(op_u.size());
    for (int i = 0; i < op_u.size(); ++i)
      f[i] = std::exp(-std::pow(op_u.nodes()[i] - 5.0, 2));
    auto fx = log_conjugate(f, op_u.nodes(), op_x.nodes(), n);
    auto back = log_conjugate_inverse(fx, op_x.nodes(), op_u.nodes(), n);
    // Interpolation-limited rather than exact; interior nodes only.
    for (int i = 10; i < op_u.size() - 10; ++i)
      CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-3));
  }
  SUBCASE("eigenvalues agree within discretization tolerance") {
    const auto eu = smallest_eigenvalues(op_u, 4);
    const auto ex = smallest_eigenvalues(op_x, 4);
    const double dx = op_x.dx();
    for (int k = 0; k < 4; ++k) {
      const double rel = std::abs(eu[k] - ex[k]) / ex[k];
      CHECK(rel < 10.0 * dx * dx + 1e-4);
    }
  }
  SUBCASE("lowest mode of the free log operator is the Dirichlet box value") {
    const auto ex = smallest_eigenvalues(op_x, 1);
    const double X = std::log(25.0);
    CHECK(ex[0] == doctest::Approx(0.25 * n * n + std::pow(M_PI / X, 2))
                       .epsilon(2e-3));
  }
}

TEST_CASE("cylinder mode operator") {
  auto end = EndModel::cylinder({0.0, 1.0, 4.0});
  GridSpec grid;
  grid.x_max = 10.0;
  grid.points = 500;
  auto op = build_mode_operator(end, 2, grid, Formulation::Cylinder);
  const auto evs = smallest_eigenvalues(op, 1);
  CHECK(evs[0] == doctest::Approx(4.0 + std::pow(M_PI / 10.0, 2)).epsilon(1e-4));
  CHECK_THROWS_AS(build_mode_operator(end, 9, grid, Formulation::Cylinder),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_mode_operator(end, 0, grid, Formulation::LogX),
                  std::invalid_argument);
}

TEST_CASE("resolution metric") {
  auto end = EndModel::cylinder({0.0});
  GridSpec grid;
  grid.x_max = 10.0;
  grid.points = 100;
  auto op = build_mode_operator(end, 0, grid, Formulation::Cylinder);
  CHECK(op.points_per_wavelength(4.0) == doctest::Approx(M_PI / op.dx()));
  CHECK(op.points_per_wavelength(4000.0) < 20.0);  // under-resolved
}

TEST_CASE("weighted Sobolev norms") {
  auto end = EndModel::cylinder({0.0});
  GridSpec grid;
  grid.x_max = 20.0;
  grid.points = 600;
  auto op = build_mode_operator(end, 0, grid, Formulation::Cylinder);
  std::vector<double> ones(op.size(), 1.0);
  std::vector<double> f(op.size());
  for (int i = 0; i < op.size(); ++i) {
    const double x = op.nodes()[i];
    f[i] = std::exp(-std::pow(x - 10.0, 2)) * std::sin(x);
  }
  SUBCASE("k = 0 with unit weight is the plain norm") {
    CHECK(weighted_norm(op, f, ones, 0, SobolevKind::W) ==
          doctest::Approx(op.norm(f)).epsilon(1e-12));
    CHECK(weighted_norm(op, f, ones, 0, SobolevKind::H) ==
          doctest::Approx(op.norm(f)).epsilon(1e-12));
  }
  SUBCASE("H2 is controlled by W2 on smooth data") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(4.0, 16.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const double c = u(rng);
      std::vector<double> g(op.size());
      for (int i = 0; i < op.size(); ++i)
        g[i] = std::exp(-std::pow(op.nodes()[i] - c, 2));
      const double h2 = weighted_norm(op, g, ones, 2, SobolevKind::H);
      const double w2 = weighted_norm(op, g, ones, 2, SobolevKind::W);
      worst = std::max(worst, h2 / w2);
    }
    CHECK(worst < 3.0);
  }
  SUBCASE("odd H order is a capability error") {
    CHECK_THROWS_AS(weighted_norm(op, f, ones, 1, SobolevKind::H),
                    std::invalid_argument);
  }
}

TEST_CASE("weighted inclusion on the cusp model") {
  // || f ||_{W^2_beta} <= C || f ||_{H^2_{beta itilde^{-4n}}} across a family
  // of bumps: the ratio stays bounded.
  const int n = 1;
  auto end = EndModel::cusp(n, 1);
  GridSpec grid;
  grid.x_max = 20.0;
  grid.points = 700;
  auto op = build_mode_operator(end, 0, grid, Formulation::LogX);
  std::vector<double> beta_w(op.size()), beta_itilde(op.size());
  for (int i = 0; i < op.size(); ++i) {
    const double x = op.nodes()[i];
    const double beta = std::exp(-0.5 * x);
    const double itilde = std::min(M_PI / 12.0, 0.5 * std::exp(-x));
    beta_w[i] = beta;
    beta_itilde[i] = beta * std::pow(itilde, -4.0 * n);
  }
  double worst = 0.0;
  for (double c : {5.0, 8.0, 11.0, 14.0}) {
    std::vector<double> g(op.size());
    for (int i = 0; i < op.size(); ++i)
      g[i] = std::exp(-std::pow(op.nodes()[i] - c, 2));
    const double w2 = weighted_norm(op, g, beta_w, 2, SobolevKind::W);
    const double h2 = weighted_norm(op, g, beta_itilde, 2, SobolevKind::H);
    worst = std::max(worst, w2 / h2);
  }
  CHECK(worst < 10.0);
}

TEST_CASE("perturbed operators and the coefficient decomposition") {
  auto end = EndModel::cylinder({0.0});
  GridSpec grid;
  grid.x_max = 30.0;
  grid.points = 900;
  auto op = build_mode_operator(end, 0, grid, Formulation::Cylinder);
  auto beta = DecayProfile::exponential(0.5);

  SUBCASE("zero perturbation") {
    PerturbationSpec none;
    auto ph = perturb_operator(op, none, beta);
    for (double v : ph.decomposition.xi0) CHECK(v == 0.0);
    for (double v : ph.decomposition.xi1) CHECK(v == 0.0);
    for (double v : ph.decomposition.xi2) CHECK(v == 0.0);
    CHECK(ph.decomposition.fitted_C == 0.0);
  }
  SUBCASE("measure perturbation decays like beta with C = O(eps)") {
    const double eps = 1e-2;
    PerturbationSpec spec;
    spec.shape_w = expr_scale(eps, expr_exp(-0.5));
    auto ph = perturb_operator(op, spec, beta);
    CHECK(ph.decomposition.decay_ok);
    CHECK(ph.decomposition.fitted_C < 20.0 * eps);
    CHECK(ph.decomposition.fitted_C > 0.0);
    CHECK(ph.op.symmetry_defect() < 1e-13);
  }
  SUBCASE("reconstruction against the assembled difference") {
    PerturbationSpec spec;
    spec.shape_q = expr_scale(0.2, expr_exp(-0.5));
    spec.shape_w = expr_scale(0.05, expr_exp(-0.5));
    auto ph = perturb_operator(op, spec, beta);
    const auto& dec = ph.decomposition;
    double worst = 0.0;
    for (double freq : {0.4, 1.0}) {
      std::vector<double> f(op.size()), d1(op.size()), d2(op.size());
      for (int i = 0; i < op.size(); ++i) {
        const double x = op.nodes()[i];
        f[i] = std::sin(freq * x);
        d1[i] = freq * std::cos(freq * x);
        d2[i] = -freq * freq * std::sin(freq * x);
      }
      const auto ag = op.apply(f);
      const auto ah = ph.op.apply(f);
      // Interior comparison: the stencil rows at the ends see the boundary.
      for (int i = 2; i < op.size() - 2; ++i) {
        const double lhs = ag[i] - ah[i];
        const double rhs = dec.xi0[i] * f[i] + dec.xi1[i] * d1[i] + dec.xi2[i] * d2[i];
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
    CHECK(worst < 50.0 * op.dx() * op.dx());
  }
  SUBCASE("ellipticity loss is a construction error") {
    PerturbationSpec spec;
    spec.shape_p = expr_const(-1.5);  // p becomes negative
    CHECK_THROWS_AS(perturb_operator(op, spec, beta), std::invalid_argument);
  }
}

TEST_CASE("higher modes are pushed up by truncation depth") {
  // Bottom eigenvalue of the mode-k operator on [b, L] grows at least like
  // b^2 lambda_k: the potential term alone already gives lambda_k b^2, and
  // the log-log slope approaches 2 as b grows.
  const int n = 1;
  auto end = EndModel::cusp(n, 2);
  const double lambda1 = end.mode_eigenvalues[1];
  std::vector<double> logb, logev;
  double cmin = 1e300;
  for (double b : {4.0, 8.0, 16.0, 32.0}) {
    GridSpec grid;
    grid.x_min = b;
    grid.x_max = 128.0;
    grid.points = 2500;
    auto op = build_mode_operator(end, 1, grid, Formulation::CuspU);
    const double ev = smallest_eigenvalues(op, 1)[0];
    cmin = std::min(cmin, ev / (b * b * lambda1));
    logb.push_back(std::log(b));
    logev.push_back(std::log(ev));
  }
  CHECK(cmin >= 0.99);
  const LineFit f = fit_line(logb, logev);
  CHECK(f.slope > 1.5);
  CHECK(f.slope < 2.3);
}
