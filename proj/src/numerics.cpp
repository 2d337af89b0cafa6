#include "scatlab/numerics.hpp"

#include <cmath>

namespace scatlab {

void gauss_legendre(int m, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (m < 1) throw std::invalid_argument("gauss_legendre: m must be >= 1");
  nodes.assign(m, 0.0);
  weights.assign(m, 0.0);
  // Newton iteration on Legendre polynomials, nodes on (-1, 1).
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[m - 1 - i] = x;
    weights[i] = w;
    weights[m - 1 - i] = w;
  }
  const double mid = 0.5 * (a + b), hl = 0.5 * (b - a);
  for (int i = 0; i < m; ++i) {
    nodes[i] = mid + hl * nodes[i];
    weights[i] *= hl;
  }
}

std::vector<double> trapezoid_weights(const std::vector<double>& grid) {
  const std::size_t n = grid.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = grid[i + 1] - grid[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

std::vector<double> simpson_weights(const std::vector<double>& grid) {
  const std::size_t n = grid.size();
  std::vector<double> w(n, 0.0);
  if (n < 3) return trapezoid_weights(grid);
  const double h = grid[1] - grid[0];
  std::size_t i = 0;
  while (i + 2 < n) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
    i += 2;
  }
  if (i + 1 < n) {  // leftover cell
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy * sxx - sx * sxy) / det;
  for (std::size_t i = 0; i < n; ++i)
    f.max_residual = std::max(f.max_residual,
                              std::abs(y[i] - f.intercept - f.slope * x[i]));
  return f;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  const double h = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) v[i] = a + i * h;
  v[n - 1] = b;
  return v;
}

std::vector<double> geomspace(double a, double b, int n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  const double r = std::log(b / a) / (n - 1);
  for (int i = 0; i < n; ++i) v[i] = a * std::exp(i * r);
  v[n - 1] = b;
  return v;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace scatlab
