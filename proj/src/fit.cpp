#include "qdim/fit.hpp"

#include <cmath>
#include <cstdlib>

#include "qdim/errors.hpp"

namespace qdim::numeric {

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (!(best > 0.0)) throw FitError("singular normal equations");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] * inv;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * x[c];
    x[ri] = s / a[ri * n + ri];
  }
  return x;
}

std::vector<double> linear_least_squares(const std::vector<std::span<const double>>& columns,
                                         std::span<const double> y, double* sse_out) {
  const std::size_t k = columns.size();
  const std::size_t m = y.size();
  std::vector<double> ata(k * k, 0.0);
  std::vector<double> aty(k, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = r; c < k; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += columns[r][i] * columns[c][i];
      ata[r * k + c] = s;
      ata[c * k + r] = s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += columns[r][i] * y[i];
    aty[r] = s;
  }
  std::vector<double> coeffs = solve_dense(std::move(ata), std::move(aty), k);
  if (sse_out != nullptr) {
    double sse = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double fit = 0.0;
      for (std::size_t c = 0; c < k; ++c) fit += coeffs[c] * columns[c][i];
      const double r = y[i] - fit;
      sse += r * r;
    }
    *sse_out = sse;
  }
  return coeffs;
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double x_tolerance, int max_iterations) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iterations && (b - a) > x_tolerance; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace qdim::numeric
