#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace flowmap {

/// State vectors are plain std::vector<double>; dimensions here are tiny
/// (2-4 for the benchmark systems, network widths up to a few hundred).
using Vec = std::vector<double>;

[[nodiscard]] inline bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

[[nodiscard]] inline double norm_l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

[[nodiscard]] inline double norm_linf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

[[nodiscard]] inline double dist_l2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

[[nodiscard]] inline double dist_linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace flowmap
