#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace scatlab {

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int m, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

// Composite trapezoid weights for an arbitrary strictly increasing grid.
std::vector<double> trapezoid_weights(const std::vector<double>& grid);

// Composite Simpson weights for a uniform grid (odd point count preferred;
// falls back to trapezoid on the last cell when the count is even).
std::vector<double> simpson_weights(const std::vector<double>& grid);

// Least-squares line fit y ~ intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;  // max |y_i - fit(x_i)|
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Uniform grid with n points on [a, b] inclusive.
std::vector<double> linspace(double a, double b, int n);

// Geometric grid with n points on [a, b], a > 0.
std::vector<double> geomspace(double a, double b, int n);

// FNV-1a 64-bit digest of a byte buffer; used for artifact manifests.
std::uint64_t fnv1a64(const void* data, std::size_t len);

}  // namespace scatlab
