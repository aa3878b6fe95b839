#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "flowmap/dataset.hpp"
#include "flowmap/vec.hpp"

namespace flowmap {

/// Worst-case and average-case error over J pairs.
struct ErrorReport {
  double max_linf = 0.0;
  double mean_l2 = 0.0;
  std::size_t count = 0;
};

namespace detail {

inline void require_comparable(const std::vector<Vec>& outputs, const std::vector<Vec>& references) {
  if (outputs.empty() || references.empty()) {
    throw std::invalid_argument("error metric: empty input");
  }
  if (outputs.size() != references.size()) {
    throw std::invalid_argument("error metric: length mismatch");
  }
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].size() != references[i].size()) {
      throw std::invalid_argument("error metric: dimension mismatch");
    }
  }
}

}  // namespace detail

/// Max over pairs of the largest absolute component difference.
[[nodiscard]] inline double max_linf_error(const std::vector<Vec>& outputs,
                                           const std::vector<Vec>& references) {
  detail::require_comparable(outputs, references);
  double worst = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    worst = std::max(worst, dist_linf(outputs[i], references[i]));
  }
  return worst;
}

/// Arithmetic mean of per-pair Euclidean norms (mean of norms, not RMS).
[[nodiscard]] inline double mean_l2_error(const std::vector<Vec>& outputs,
                                          const std::vector<Vec>& references) {
  detail::require_comparable(outputs, references);
  double sum = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    sum += dist_l2(outputs[i], references[i]);
  }
  return sum / static_cast<double>(outputs.size());
}

[[nodiscard]] inline ErrorReport error_report(const std::vector<Vec>& outputs,
                                              const std::vector<Vec>& references) {
  return {max_linf_error(outputs, references), mean_l2_error(outputs, references),
          outputs.size()};
}

/// Mean L2 distance between scheme targets y2 and reference targets z2 for
/// two sets generated from identical inputs.
[[nodiscard]] inline double target_mean_l2_error(const LearningSet& targets,
                                                 const LearningSet& reference) {
  if (!same_inputs(targets, reference)) {
    throw std::invalid_argument("target_mean_l2_error: sets do not share y1 inputs");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    sum += dist_l2(targets.pairs[j].y2, reference.pairs[j].y2);
  }
  return sum / static_cast<double>(targets.size());
}

/// Least-squares slope of log(error) against log(dt); the empirical order
/// of accuracy when errors follow a power law in the step size.
[[nodiscard]] inline double fit_order(std::span<const double> dts, std::span<const double> errors) {
  if (dts.size() != errors.size()) throw std::invalid_argument("fit_order: length mismatch");
  if (dts.size() < 3) throw std::invalid_argument("fit_order: need at least 3 points");
  for (std::size_t i = 0; i < dts.size(); ++i) {
    if (!(dts[i] > 0.0) || !(errors[i] > 0.0)) {
      throw std::invalid_argument("fit_order: dts and errors must be positive");
    }
    if (i > 0 && !(dts[i] < dts[i - 1])) {
      throw std::invalid_argument("fit_order: dts must be strictly decreasing");
    }
  }

  const auto n = static_cast<double>(dts.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double x = std::log(dts[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace flowmap
