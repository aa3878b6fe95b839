#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "flowmap/errors.hpp"
#include "flowmap/ode_system.hpp"
#include "flowmap/vec.hpp"

namespace flowmap {

enum class SchemeKind { euler, rk2, rk4_38 };

/// One-step explicit scheme used to generate training targets. The formal
/// order is a property of the kind; the one-step target error is one order
/// higher (the step is taken exactly once, from an exact initial state).
struct StepScheme {
  SchemeKind kind = SchemeKind::euler;

  [[nodiscard]] int formal_order() const {
    switch (kind) {
      case SchemeKind::euler: return 1;
      case SchemeKind::rk2: return 2;
      case SchemeKind::rk4_38: return 4;
    }
    return 0;
  }

  [[nodiscard]] int target_error_order() const { return formal_order() + 1; }

  [[nodiscard]] std::string_view id() const {
    switch (kind) {
      case SchemeKind::euler: return "euler";
      case SchemeKind::rk2: return "rk2";
      case SchemeKind::rk4_38: return "rk4";
    }
    return "?";
  }
};

[[nodiscard]] inline StepScheme scheme_from_string(std::string_view id) {
  if (id == "euler") return {SchemeKind::euler};
  if (id == "rk2") return {SchemeKind::rk2};
  if (id == "rk4" || id == "rk4_38") return {SchemeKind::rk4_38};
  throw std::invalid_argument("unknown scheme '" + std::string(id) + "' (euler|rk2|rk4)");
}

namespace detail {

inline void require_step_inputs(const OdeSystem& system, std::span<const double> x, double dt) {
  if (x.size() != system.dim()) throw std::invalid_argument("step: state/dim mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
}

inline void require_finite_result(std::span<const double> x, const char* where) {
  if (!all_finite(x)) {
    throw NonFiniteStateError(std::string(where) + " produced a non-finite state");
  }
}

/// Scratch space for the four-stage step; reused across substeps so the
/// refined-mesh reference does not allocate per step.
struct Rk4Workspace {
  Vec k1, k2, k3, k4, stage;

  explicit Rk4Workspace(std::size_t n) : k1(n), k2(n), k3(n), k4(n), stage(n) {}
};

/// 3/8-rule tableau: nodes {0, 1/3, 2/3, 1}, weights (1,3,3,1)/8.
inline void rk4_38_step_into(const OdeSystem& system, std::span<const double> x, double t,
                             double dt, Rk4Workspace& ws, std::span<double> out) {
  const std::size_t n = x.size();
  system.eval_into(x, t, ws.k1);

  for (std::size_t i = 0; i < n; ++i) ws.stage[i] = x[i] + dt / 3.0 * ws.k1[i];
  system.eval_into(ws.stage, t + dt / 3.0, ws.k2);

  for (std::size_t i = 0; i < n; ++i) ws.stage[i] = x[i] - dt / 3.0 * ws.k1[i] + dt * ws.k2[i];
  system.eval_into(ws.stage, t + 2.0 * dt / 3.0, ws.k3);

  for (std::size_t i = 0; i < n; ++i) {
    ws.stage[i] = x[i] + dt * (ws.k1[i] - ws.k2[i] + ws.k3[i]);
  }
  system.eval_into(ws.stage, t + dt, ws.k4);

  for (std::size_t i = 0; i < n; ++i) {
    out[i] = x[i] + dt / 8.0 * (ws.k1[i] + 3.0 * ws.k2[i] + 3.0 * ws.k3[i] + ws.k4[i]);
  }
}

}  // namespace detail

/// Forward Euler: x + dt * F(x, t).
[[nodiscard]] inline Vec euler_step(const OdeSystem& system, std::span<const double> x, double t,
                                    double dt) {
  detail::require_step_inputs(system, x, dt);
  Vec out = system.eval(x, t);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + dt * out[i];
  detail::require_finite_result(out, "euler_step");
  return out;
}

/// Heun's two-stage method: k1 = F(x,t), k2 = F(x + dt*k1, t + dt),
/// result x + dt*(k1 + k2)/2.
[[nodiscard]] inline Vec rk2_step(const OdeSystem& system, std::span<const double> x, double t,
                                  double dt) {
  detail::require_step_inputs(system, x, dt);
  const std::size_t n = x.size();
  Vec k1 = system.eval(x, t);
  Vec stage(n);
  for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + dt * k1[i];
  Vec k2 = system.eval(stage, t + dt);
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + dt * 0.5 * (k1[i] + k2[i]);
  detail::require_finite_result(out, "rk2_step");
  return out;
}

/// Fourth-order Runge-Kutta, 3/8-rule variant (not the classical tableau):
/// k2 and k3 sit at t + dt/3 and t + 2dt/3, weights dt/8 * (1,3,3,1).
[[nodiscard]] inline Vec rk4_38_step(const OdeSystem& system, std::span<const double> x, double t,
                                     double dt) {
  detail::require_step_inputs(system, x, dt);
  detail::Rk4Workspace ws(x.size());
  Vec out(x.size());
  detail::rk4_38_step_into(system, x, t, dt, ws, out);
  detail::require_finite_result(out, "rk4_38_step");
  return out;
}

/// High-accuracy reference: the rk4 step composed over a refined mesh with
/// inner step dt/substeps (default 1000 mirrors the evaluation protocol).
[[nodiscard]] inline Vec reference_step(const OdeSystem& system, std::span<const double> x,
                                        double t, double dt, std::size_t substeps = 1000) {
  detail::require_step_inputs(system, x, dt);
  if (substeps < 1) throw std::invalid_argument("reference_step: substeps must be >= 1");

  const std::size_t n = x.size();
  const double h = dt / static_cast<double>(substeps);
  detail::Rk4Workspace ws(n);
  Vec state(x.begin(), x.end());
  Vec next(n);
  for (std::size_t s = 0; s < substeps; ++s) {
    detail::rk4_38_step_into(system, state, t + static_cast<double>(s) * h, h, ws, next);
    state.swap(next);
  }
  detail::require_finite_result(state, "reference_step");
  return state;
}

/// Dispatch on the scheme kind.
[[nodiscard]] inline Vec scheme_step(const OdeSystem& system, StepScheme scheme,
                                     std::span<const double> x, double t, double dt) {
  switch (scheme.kind) {
    case SchemeKind::euler: return euler_step(system, x, t, dt);
    case SchemeKind::rk2: return rk2_step(system, x, t, dt);
    case SchemeKind::rk4_38: return rk4_38_step(system, x, t, dt);
  }
  throw std::logic_error("scheme_step: bad scheme kind");
}

}  // namespace flowmap
