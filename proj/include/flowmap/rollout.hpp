#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowmap/csv.hpp"
#include "flowmap/errors.hpp"
#include "flowmap/integrators.hpp"
#include "flowmap/network.hpp"
#include "flowmap/ode_system.hpp"
#include "flowmap/vec.hpp"

namespace flowmap {

/// States on the uniform grid t0 + k*dt, k = 0..steps; states[0] is the
/// supplied initial condition.
struct Trajectory {
  enum class Source { resnet, reference, scheme };

  std::vector<double> times;
  std::vector<Vec> states;
  Source source = Source::reference;

  [[nodiscard]] std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
  [[nodiscard]] const Vec& final_state() const { return states.back(); }
};

namespace detail {

inline void require_rollout_inputs(double dt, std::size_t steps) {
  if (!(dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
  if (steps < 1) throw std::invalid_argument("simulate: steps must be >= 1");
}

}  // namespace detail

/// Applies the trained ResNet repeatedly: p^{k+1} = p^k + N(p^k). When the
/// network was trained in scaled coordinates, pass the system's scale
/// factor; inputs are scaled down and recorded states scaled back up.
[[nodiscard]] inline Trajectory simulate_resnet(const NetParams& params, const Vec& x0, double t0,
                                                double dt, std::size_t steps,
                                                double scale_to_raw = 1.0) {
  detail::require_rollout_inputs(dt, steps);
  if (x0.size() != params.arch.input_dim) {
    throw std::invalid_argument("simulate_resnet: state/network dimension mismatch");
  }
  if (!(scale_to_raw > 0.0)) throw std::invalid_argument("simulate_resnet: bad scale factor");

  Trajectory traj;
  traj.source = Trajectory::Source::resnet;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(t0);
  traj.states.push_back(x0);

  Vec p(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) p[i] = x0[i] / scale_to_raw;

  ForwardCache cache;
  for (std::size_t k = 1; k <= steps; ++k) {
    forward_into(params, p, cache);
    const Vec& increment = cache.output();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += increment[i];
    if (!all_finite(p)) {
      throw NonFiniteStateError("simulate_resnet: non-finite state at step " + std::to_string(k),
                                k);
    }
    Vec raw(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) raw[i] = scale_to_raw * p[i];
    traj.times.push_back(t0 + static_cast<double>(k) * dt);
    traj.states.push_back(std::move(raw));
  }
  return traj;
}

/// Refined-mesh rk4 trajectory on the same grid; the accuracy yardstick.
[[nodiscard]] inline Trajectory simulate_reference(const OdeSystem& system, const Vec& x0,
                                                   double t0, double dt, std::size_t steps,
                                                   std::size_t substeps = 1000) {
  detail::require_rollout_inputs(dt, steps);

  Trajectory traj;
  traj.source = Trajectory::Source::reference;
  traj.times.push_back(t0);
  traj.states.push_back(x0);
  Vec state = x0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k - 1) * dt;
    try {
      state = reference_step(system, state, t, dt, substeps);
    } catch (const NonFiniteStateError& e) {
      throw NonFiniteStateError(
          "simulate_reference: non-finite state at step " + std::to_string(k) + ": " + e.what(),
          k);
    }
    traj.times.push_back(t0 + static_cast<double>(k) * dt);
    traj.states.push_back(state);
  }
  return traj;
}

/// Trajectory of the bare one-step scheme itself; the baseline the
/// scheme-trained ResNet is meant to replicate.
[[nodiscard]] inline Trajectory simulate_scheme(const OdeSystem& system, StepScheme scheme,
                                                const Vec& x0, double t0, double dt,
                                                std::size_t steps) {
  detail::require_rollout_inputs(dt, steps);

  Trajectory traj;
  traj.source = Trajectory::Source::scheme;
  traj.times.push_back(t0);
  traj.states.push_back(x0);
  Vec state = x0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k - 1) * dt;
    try {
      state = scheme_step(system, scheme, state, t, dt);
    } catch (const NonFiniteStateError& e) {
      throw NonFiniteStateError(
          "simulate_scheme: non-finite state at step " + std::to_string(k) + ": " + e.what(), k);
    }
    traj.times.push_back(t0 + static_cast<double>(k) * dt);
    traj.states.push_back(state);
  }
  return traj;
}

/// Largest per-step L2 deviation between two trajectories on one grid.
[[nodiscard]] inline double max_trajectory_deviation(const Trajectory& a, const Trajectory& b) {
  if (a.states.size() != b.states.size()) {
    throw std::invalid_argument("trajectory deviation: grid mismatch");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    worst = std::max(worst, dist_l2(a.states[k], b.states[k]));
  }
  return worst;
}

/// Rows as `k,t,x_0..x_{n-1}`. `stride` thins the output for plotting
/// (every stride-th point); trajectories themselves are always dense.
[[nodiscard]] inline std::string trajectory_csv(const Trajectory& traj, std::size_t stride = 1) {
  if (traj.states.empty()) throw std::invalid_argument("trajectory_csv: empty trajectory");
  if (stride < 1) throw std::invalid_argument("trajectory_csv: stride must be >= 1");
  const std::size_t n = traj.states.front().size();
  std::ostringstream out;
  out << "k,t";
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i;
  out << '\n';
  for (std::size_t k = 0; k < traj.states.size(); k += stride) {
    out << k << ',' << format_double(traj.times[k]);
    for (double v : traj.states[k]) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

}  // namespace flowmap
