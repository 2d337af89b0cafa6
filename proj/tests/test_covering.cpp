#include <doctest.h>

#include <cmath>
#include <random>

#include "scatlab/covering.hpp"
#include "scatlab/numerics.hpp"

using namespace scatlab;

namespace {

FiniteMetricSpace line_space(int n) {
  std::vector<std::vector<double>> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = {static_cast<double>(i)};
  return FiniteMetricSpace::euclidean(std::move(pts));
}

FiniteMetricSpace hyperbolic_cloud(int n, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uang(0.0, 2.0 * M_PI), uarea(0.0, 1.0);
  std::vector<std::array<double, 2>> pts(n);
  for (int i = 0; i < n; ++i) {
    const double r = std::acosh(1.0 + uarea(rng) * (std::cosh(radius) - 1.0));
    const double er = std::tanh(r / 2.0);
    const double th = uang(rng);
    pts[i] = {er * std::cos(th), er * std::sin(th)};
  }
  return FiniteMetricSpace::hyperbolic_disk(pts);
}

}  // namespace

TEST_CASE("metric space audits") {
  auto space = hyperbolic_cloud(300, 4.0, 99);
  std::string msg;
  CHECK(space.audit(2000, 7, &msg));
  // An explicit matrix violating the triangle inequality is caught.
  auto bad = FiniteMetricSpace::from_matrix(
      {{0, 1, 10}, {1, 0, 1}, {10, 1, 0}});
  CHECK_FALSE(bad.audit(2000, 7, &msg));
}

TEST_CASE("single point cover") {
  auto space = line_space(1);
  auto rep = greedy_cover(space, {1.0});
  CHECK(rep.centers.size() == 1);
  CHECK(rep.covers);
  CHECK(rep.multiplicity == 1);
}

TEST_CASE("empty space") {
  auto space = FiniteMetricSpace::euclidean({});
  auto rep = greedy_cover(space, {});
  CHECK(rep.centers.empty());
}

TEST_CASE("unit line cover") {
  auto space = line_space(11);
  std::vector<double> h(11, 1.0);

  SUBCASE("a = 1: separation and coverage are exact") {
    auto rep = greedy_cover(space, h, 1.0);
    CHECK(rep.covers);
    CHECK(rep.separation >= 1.0);
    // Brute-force audit: every point inside some open ball.
    for (int p = 0; p < space.size(); ++p) {
      bool covered = false;
      for (std::size_t c = 0; c < rep.centers.size(); ++c)
        if (space.dist(p, rep.centers[c]) < rep.radii[c]) covered = true;
      CHECK(covered);
    }
    // Pairwise separation brute force.
    for (std::size_t i = 0; i < rep.centers.size(); ++i)
      for (std::size_t j = i + 1; j < rep.centers.size(); ++j)
        CHECK(space.dist(rep.centers[i], rep.centers[j]) >=
              std::min(rep.radii[i], rep.radii[j]) - 1e-12);
  }
  SUBCASE("a = 3: multiplicity bounded by points within distance 3") {
    auto rep = greedy_cover(space, h, 3.0);
    CHECK(rep.multiplicity <= 7);
    // Brute force recomputation.
    int worst = 0;
    for (int p = 0; p < space.size(); ++p) {
      int cnt = 0;
      for (std::size_t c = 0; c < rep.centers.size(); ++c)
        if (space.dist(p, rep.centers[c]) < 3.0 * rep.radii[c]) ++cnt;
      worst = std::max(worst, cnt);
    }
    CHECK(rep.multiplicity == worst);
  }
  SUBCASE("multiplicity is monotone in a") {
    int prev = 0;
    for (double a : {1.0, 1.5, 2.0, 3.0, 4.0}) {
      auto rep = greedy_cover(space, h, a);
      CHECK(rep.multiplicity >= prev);
      prev = rep.multiplicity;
    }
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(greedy_cover(space, h, 0.5), std::invalid_argument);
    std::vector<double> bad(11, 1.0);
    bad[3] = 0.0;
    CHECK_THROWS_AS(greedy_cover(space, bad), std::invalid_argument);
  }
}

TEST_CASE("kappa estimates") {
  SUBCASE("tiny space needs one ball") {
    auto space = line_space(3);  // diameter 2 < s - eps = 5
    auto est = kappa_estimate(space, 5.0, 0.0);
    CHECK(est.kappa == 1);
    CHECK(est.witness.size() == 1);
  }
  SUBCASE("uniform circle") {
    auto space = FiniteMetricSpace::circle(240, 12.0);
    auto est = kappa_estimate(space, 1.0, 0.0);
    // Brute-force the count of 3s-balls about the witness containing a point.
    int worst = 0;
    for (int p = 0; p < space.size(); ++p) {
      int cnt = 0;
      for (int c : est.witness)
        if (space.dist(p, c) < 3.0) ++cnt;
      worst = std::max(worst, cnt);
    }
    CHECK(est.kappa == worst);
    CHECK(est.kappa >= 3);
    CHECK(est.kappa <= 7);
  }
  SUBCASE("preconditions") {
    auto space = line_space(3);
    CHECK_THROWS_AS(kappa_estimate(space, 1.0, 1.0), std::invalid_argument);
  }
}

TEST_CASE("hyperbolic cloud: kappa growth is at most exponential in s") {
  auto space = hyperbolic_cloud(1500, 5.0, 1234);
  std::vector<double> ss = {1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<double> logk;
  for (double s : ss)
    logk.push_back(std::log(static_cast<double>(kappa_estimate(space, s, 0.0).kappa)));
  const LineFit f = fit_line(ss, logk);
  CHECK(f.max_residual <= 0.6);
  CHECK(f.slope < 3.0);
}
