#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "bidbench/errors.hpp"

namespace bidbench {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw ArgumentError("mean of an empty range");
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

/// Sample standard deviation (n-1 denominator).
inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) throw ArgumentError("sample_sd needs at least two values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) {
    const double d = x - m;
    ss += d * d;
  }
  return std::sqrt(ss / double(v.size() - 1));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Solve A x = rhs for a symmetric positive definite A (row-major n x n) by
/// in-place Cholesky. The only linear systems in this library are small
/// (at most (d+2) x (d+2) normal equations), so a dependency on a full
/// linear-algebra package would be disproportionate.
inline std::vector<double> solve_spd(std::vector<double> a, std::vector<double> rhs,
                                     std::size_t n) {
  if (a.size() != n * n || rhs.size() != n) throw ArgumentError("solve_spd: dimension mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0) || !std::isfinite(diag))
      throw DegenerateDataError("matrix not positive definite");
    diag = std::sqrt(diag);
    a[j * n + j] = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / diag;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {  // L y = rhs
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * rhs[k];
    rhs[i] = s / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {  // L^T x = y
    double s = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * rhs[k];
    rhs[i] = s / a[i * n + i];
  }
  return rhs;
}

}  // namespace bidbench
