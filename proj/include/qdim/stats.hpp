#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace qdim {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Sample standard deviation (n-1 denominator), two-pass so the result does
/// not depend on accumulation order beyond normal FP rounding.
inline double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

/// Root mean square deviation from a fixed reference level (not the sample
/// mean), n-1 denominator.
inline double rms_about(std::span<const double> xs, double reference) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - reference) * (x - reference);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace qdim
