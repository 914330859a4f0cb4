#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qdim::numeric {

/// Solve A x = b for small dense systems (Gaussian elimination with partial
/// pivoting). A is row-major n*n. Throws FitError on a singular matrix.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n);

/// Ordinary least squares y ~ columns. `columns[k][i]` is regressor k at
/// sample i. Returns fitted coefficients; *sse_out (optional) receives the
/// residual sum of squares.
std::vector<double> linear_least_squares(const std::vector<std::span<const double>>& columns,
                                         std::span<const double> y, double* sse_out = nullptr);

/// Golden-section minimization of a unimodal function on [lo, hi].
/// Deterministic, bounded iterations.
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double x_tolerance, int max_iterations = 200);

}  // namespace qdim::numeric
