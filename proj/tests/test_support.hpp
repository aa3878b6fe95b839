#pragma once

// Shared oracles and helpers for the test suites. Everything here is
// deliberately independent of the library's own integration/backprop paths
// so it can serve as a cross-check.

#include <array>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "flowmap/ode_system.hpp"
#include "flowmap/vec.hpp"

namespace testsupport {

/// Dense 2x2 matrix in row-major order.
using Mat2 = std::array<double, 4>;

inline Mat2 mul(const Mat2& x, const Mat2& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
          x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}

inline Mat2 add(const Mat2& x, const Mat2& y) {
  return {x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]};
}

inline Mat2 scale(const Mat2& x, double s) { return {x[0] * s, x[1] * s, x[2] * s, x[3] * s}; }

inline double norm_inf(const Mat2& x) {
  return std::max(std::abs(x[0]) + std::abs(x[1]), std::abs(x[2]) + std::abs(x[3]));
}

/// Matrix exponential by scaling-and-squaring with a Taylor series; brute
/// force but accurate far beyond the tolerances used in the tests.
inline Mat2 expm(Mat2 m) {
  int squarings = 0;
  while (norm_inf(m) > 0.25) {
    m = scale(m, 0.5);
    ++squarings;
  }
  Mat2 result{1.0, 0.0, 0.0, 1.0};
  Mat2 term{1.0, 0.0, 0.0, 1.0};
  for (int k = 1; k <= 30; ++k) {
    term = scale(mul(term, m), 1.0 / k);
    result = add(result, term);
  }
  for (int s = 0; s < squarings; ++s) result = mul(result, result);
  return result;
}

/// Truncated exponential series sum_{k=0..order} m^k / k!.
inline Mat2 expm_truncated(const Mat2& m, int order) {
  Mat2 result{1.0, 0.0, 0.0, 1.0};
  Mat2 term{1.0, 0.0, 0.0, 1.0};
  for (int k = 1; k <= order; ++k) {
    term = scale(mul(term, m), 1.0 / k);
    result = add(result, term);
  }
  return result;
}

inline flowmap::Vec apply(const Mat2& m, const flowmap::Vec& x) {
  return {m[0] * x[0] + m[1] * x[1], m[2] * x[0] + m[3] * x[1]};
}

/// Solves the 2x2 system m u = rhs by Cramer's rule.
inline flowmap::Vec solve2(const Mat2& m, const flowmap::Vec& rhs) {
  const double det = m[0] * m[3] - m[1] * m[2];
  return {(rhs[0] * m[3] - m[1] * rhs[1]) / det, (m[0] * rhs[1] - rhs[0] * m[2]) / det};
}

/// Exact flow of dx/dt = A x + b over time dt: e^{A dt} x + A^{-1}(e^{A dt} - I) b.
inline flowmap::Vec linear_flow(const Mat2& a, const flowmap::Vec& b, const flowmap::Vec& x,
                                double dt) {
  const Mat2 e = expm(scale(a, dt));
  flowmap::Vec result = apply(e, x);
  const Mat2 e_minus_i = add(e, Mat2{-1.0, 0.0, 0.0, -1.0});
  const flowmap::Vec affine = solve2(a, apply(e_minus_i, b));
  result[0] += affine[0];
  result[1] += affine[1];
  return result;
}

/// Fresh scratch directory under the current working directory (the build
/// tree when run through ctest).
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::current_path() / ("scratch_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport
