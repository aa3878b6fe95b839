#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "flowmap/ode_system.hpp"

namespace flowmap {

/// Knobs for catalog entries the literature leaves open.
struct CatalogConfig {
  /// Exponent eta in the toggle-switch reduction z = x1 / (1 + [IPTG]/K)^eta.
  double toggle_eta = 2.0;
};

namespace detail {

/// Planar affine system dx/dt = A x + b.
[[nodiscard]] inline OdeSystem make_linear2(std::string name, std::array<double, 4> a,
                                            std::array<double, 2> b, Domain domain, double dt) {
  RhsFn rhs = [a, b](std::span<const double> x, double /*t*/, std::span<double> out) {
    out[0] = a[0] * x[0] + a[1] * x[1] + b[0];
    out[1] = a[2] * x[0] + a[3] * x[1] + b[1];
  };
  return OdeSystem(std::move(name), 2, std::move(rhs), std::move(domain), dt);
}

}  // namespace detail

/// The benchmark suite: six planar linear systems plus the nonlinear,
/// non-autonomous, second-order and differential-algebraic examples, each
/// reduced to a standard autonomous first-order form where needed.
[[nodiscard]] inline std::vector<OdeSystem> catalog(const CatalogConfig& config = {}) {
  using detail::make_linear2;
  constexpr double pi = std::numbers::pi;

  std::vector<OdeSystem> systems;

  systems.push_back(make_linear2("saddle", {1.0, 1.0, 1.0, -1.0}, {-2.0, 0.0},
                                 Domain::box({{0.0, 2.0}, {0.0, 2.0}}), 0.1));
  systems.push_back(make_linear2("nodal_sink", {-2.0, 1.0, 1.0, -2.0}, {-2.0, 1.0},
                                 Domain::box({{-2.0, 0.0}, {-1.0, 1.0}}), 0.1));
  systems.push_back(make_linear2("improper_node", {1.0, -4.0, 4.0, -7.0}, {0.0, 0.0},
                                 Domain::box({{-1.0, 1.0}, {-1.0, 1.0}}), 0.1));
  systems.push_back(make_linear2("star_point", {-1.0, 0.0, 0.0, -1.0}, {0.0, 0.0},
                                 Domain::box({{-1.0, 1.0}, {-1.0, 1.0}}), 0.1));
  systems.push_back(make_linear2("center_point", {1.0, 2.0, -5.0, -1.0}, {0.0, 0.0},
                                 Domain::box({{-1.0, 1.0}, {-1.0, 1.0}}), 0.1));
  systems.push_back(make_linear2("spiral_point", {-1.0, -1.0, 2.0, -1.0}, {-1.0, 5.0},
                                 Domain::disk(-2.0, 1.0, 1.0), 0.1));

  // Damped pendulum, omega^2 = 8.91, gamma = 0.2.
  systems.emplace_back(
      "pendulum", 2,
      [](std::span<const double> x, double, std::span<double> out) {
        out[0] = x[1];
        out[1] = -0.2 * x[1] - 8.91 * std::sin(x[0]);
      },
      Domain::box({{-pi, pi}, {-2.0 * pi, 2.0 * pi}}), 0.1);

  // Four critical points: saddle at the origin, spiral at (0,1),
  // stable node at (-2,-2), unstable node at (3,-2).
  systems.emplace_back(
      "four_critical", 2,
      [](std::span<const double> x, double, std::span<double> out) {
        out[0] = -(x[0] - x[1]) * (1.0 - x[0] - x[1]);
        out[1] = x[0] * (2.0 + x[1]);
      },
      Domain::box({{-4.0, 4.0}, {-3.0, 3.0}}), 0.05);

  // Cubic system with the unit circle as a barrier.
  systems.emplace_back(
      "cubic_barrier", 2,
      [](std::span<const double> x, double, std::span<double> out) {
        const double r = x[0] * x[0] + x[1] * x[1] - 1.0;
        out[0] = x[1] - x[0] * r;
        out[1] = -x[0] - x[1] * r;
      },
      Domain::box({{-2.0, 2.0}, {-2.0, 2.0}}), 0.1);

  // Modified Lotka-Volterra predator-prey model.
  systems.emplace_back(
      "lotka_volterra", 2,
      [](std::span<const double> x, double, std::span<double> out) {
        out[0] = x[0] * (1.0 - 0.2 * x[0] - 2.0 * x[1] / (x[0] + 6.0));
        out[1] = x[1] * (-0.25 + x[0] / (x[0] + 6.0));
      },
      Domain::box({{0.0, 5.0}, {0.0, 5.0}}), 0.1);

  // Non-autonomous 3-D system; kept in original form here, and registered
  // again below in the time-augmented 4-D form used for learning.
  systems.push_back(
      OdeSystem(
          "nonauto3d", 3,
          [](std::span<const double> x, double t, std::span<double> out) {
            const double et = std::exp(-t);
            out[0] = x[0] + x[2] - t + et;
            out[1] = x[0] + x[1] + 5.0;
            out[2] = -2.0 * x[0] - x[2] - 2.0 * t - et;
          },
          Domain::box({{-5.0, 5.0}, {-10.0, 0.0}, {-6.0, 4.0}}), 0.05,
          /*is_autonomous=*/false)
          .with_time_interval(1.0, 2.0));
  systems.push_back(autonomize(systems.back()));

  // Van der Pol oscillator, mu = 0.2, as a first-order system with
  // x1 = u and x2 = u'.
  systems.emplace_back(
      "van_der_pol", 2,
      [](std::span<const double> x, double, std::span<double> out) {
        out[0] = x[1];
        out[1] = -x[0] + 0.2 * (1.0 - x[0] * x[0]) * x[1];
      },
      Domain::box({{-3.0, 3.0}, {-20.0, 20.0}}), 0.05);

  // FitzHugh-Nagumo with external stimulus k = 0.5.
  systems.emplace_back(
      "fitzhugh_nagumo", 2,
      [](std::span<const double> x, double, std::span<double> out) {
        out[0] = 3.0 * (x[0] + x[1] - x[0] * x[0] * x[0] / 3.0 - 0.5);
        out[1] = -(x[0] + 0.8 * x[1] - 0.7) / 3.0;
      },
      Domain::box({{-5.0, 5.0}, {-5.0, 5.0}}), 0.05);

  // Genetic toggle switch with the algebraic variable z substituted into
  // the x2 equation. gamma = 1, so z^gamma = z.
  {
    const double alpha1 = 156.25;
    const double alpha2 = 15.6;
    const double beta = 2.5;
    const double iptg_over_k = 1e-5 / 2.9618e-5;
    const double z_denom = std::pow(1.0 + iptg_over_k, config.toggle_eta);
    systems.emplace_back(
        "toggle", 2,
        [alpha1, alpha2, beta, z_denom](std::span<const double> x, double, std::span<double> out) {
          const double z = x[0] / z_denom;
          out[0] = alpha1 / (1.0 + std::pow(x[1], beta)) - x[0];
          out[1] = alpha2 / (1.0 + z) - x[1];
        },
        Domain::box({{0.0, 20.0}, {0.0, 20.0}}), 0.05);
    systems.push_back(scale_system(systems.back(), 20.0));
  }

  // Nonlinear electric network with both algebraic constraints solved in
  // closed form: v1 = (G0-Ginf)*U0*tanh(x1/U0) + Ginf*x1, v2 = -x2 - v1.
  {
    const double cap = 1e-2;
    const double ind = 1.0;
    const double u0 = 1.0;
    const double g0 = -0.1;
    const double ginf = 0.25;
    systems.emplace_back(
        "electric_network", 2,
        [cap, ind, u0, g0, ginf](std::span<const double> x, double, std::span<double> out) {
          const double v1 = (g0 - ginf) * u0 * std::tanh(x[0] / u0) + ginf * x[0];
          const double v2 = -x[1] - v1;
          out[0] = v2 / cap;
          out[1] = x[0] / ind;
        },
        Domain::box({{-2.0, 2.0}, {-0.2, 0.2}}), 0.05);
  }

  return systems;
}

/// Look up a catalog system by its stable identifier.
[[nodiscard]] inline OdeSystem find_system(std::string_view id, const CatalogConfig& config = {}) {
  for (auto& system : catalog(config)) {
    if (system.name() == id) return system;
  }
  throw std::invalid_argument("unknown system id '" + std::string(id) + "'");
}

[[nodiscard]] inline std::vector<std::string> system_ids(const CatalogConfig& config = {}) {
  std::vector<std::string> ids;
  for (const auto& system : catalog(config)) ids.push_back(system.name());
  return ids;
}

}  // namespace flowmap
