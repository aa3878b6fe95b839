#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "flowmap/catalog.hpp"
#include "flowmap/rollout.hpp"
#include "test_support.hpp"

using namespace flowmap;

TEST_CASE("zero-parameter net rolls out a constant trajectory", "[rollout]") {
  NetParams params = init_params(Architecture(2, 1, 4), 1);
  zero_final_layer(params);

  const Trajectory traj = simulate_resnet(params, Vec{0.7, -0.2}, 0.0, 0.1, 15);
  REQUIRE(traj.states.size() == 16);
  for (const auto& state : traj.states) CHECK(state == Vec{0.7, -0.2});

  // The scale path is a no-op for a dead network too.
  const Trajectory scaled = simulate_resnet(params, Vec{19.0, 17.0}, 0.0, 0.1, 5, 20.0);
  for (const auto& state : scaled.states) {
    CHECK(state[0] == Catch::Approx(19.0).epsilon(1e-15));
    CHECK(state[1] == Catch::Approx(17.0).epsilon(1e-15));
  }
}

TEST_CASE("one resnet step equals resnet_forward", "[rollout]") {
  const NetParams params = init_params(Architecture(2, 2, 6), 9);
  const Vec x0{0.3, 0.4};
  const Trajectory traj = simulate_resnet(params, x0, 0.0, 0.1, 1);
  CHECK(traj.states[1] == resnet_forward(params, x0));
}

TEST_CASE("scaled rollouts equal unscaled rollouts of scaled inputs", "[rollout]") {
  const NetParams params = init_params(Architecture(2, 1, 8), 31);
  const Vec x0{8.0, -12.0};
  const double factor = 4.0;  // power of two keeps x0/factor exact

  const Trajectory raw = simulate_resnet(params, x0, 0.0, 0.1, 10, factor);
  Vec x0_scaled(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) x0_scaled[i] = x0[i] / factor;
  const Trajectory scaled = simulate_resnet(params, x0_scaled, 0.0, 0.1, 10);

  for (std::size_t k = 1; k < raw.states.size(); ++k) {
    for (std::size_t i = 0; i < x0.size(); ++i) {
      CHECK(raw.states[k][i] == factor * scaled.states[k][i]);
    }
  }
}

TEST_CASE("reference trajectory matches the analytic star-point decay", "[rollout]") {
  const auto star = find_system("star_point");
  const Trajectory traj = simulate_reference(star, Vec{1.0, 1.0}, 0.0, 0.1, 10);
  REQUIRE(traj.states.size() == 11);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double expected = std::exp(-0.1 * static_cast<double>(k));
    CHECK(traj.states[k][0] == Catch::Approx(expected).margin(1e-10));
    CHECK(traj.states[k][1] == Catch::Approx(expected).margin(1e-10));
  }
}

TEST_CASE("rollout preconditions", "[rollout]") {
  const auto star = find_system("star_point");
  const NetParams params = init_params(Architecture(2, 1, 4), 1);
  CHECK_THROWS_AS(simulate_reference(star, Vec{1.0, 1.0}, 0.0, 0.1, 0), std::invalid_argument);
  CHECK_THROWS_AS(simulate_reference(star, Vec{1.0, 1.0}, 0.0, 0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(simulate_resnet(params, Vec{1.0, 1.0, 1.0}, 0.0, 0.1, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate_resnet(params, Vec{1.0, 1.0}, 0.0, 0.1, 5, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      simulate_scheme(star, scheme_from_string("rk2"), Vec{1.0, 1.0}, 0.0, 0.1, 0),
      std::invalid_argument);
}

TEST_CASE("damped pendulum dissipates energy along the reference path", "[rollout]") {
  const auto pendulum = find_system("pendulum");
  const Trajectory traj = simulate_reference(pendulum, Vec{2.0, 0.0}, 0.0, 0.1, 100);

  auto energy = [](const Vec& x) {
    return 0.5 * x[1] * x[1] + 8.91 * (1.0 - std::cos(x[0]));
  };
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    CHECK(energy(traj.states[k]) <= energy(traj.states[k - 1]) + 1e-9);
  }
}

TEST_CASE("scheme trajectories", "[rollout]") {
  const auto sink = find_system("nodal_sink");
  const Vec x0{0.0, -0.5};

  // One step reproduces the stepper exactly.
  for (const char* id : {"euler", "rk2", "rk4"}) {
    const StepScheme scheme = scheme_from_string(id);
    const Trajectory traj = simulate_scheme(sink, scheme, x0, 0.0, 0.1, 1);
    CHECK(traj.states[1] == scheme_step(sink, scheme, x0, 0.0, 0.1));
  }

  // Short-horizon rk4 rollout tracks the reference closely.
  const Trajectory rk4 =
      simulate_scheme(sink, scheme_from_string("rk4"), x0, 0.0, 0.01, 5);
  const Trajectory ref = simulate_reference(sink, x0, 0.0, 0.01, 5);
  CHECK(max_trajectory_deviation(rk4, ref) <= 1e-8);

  // Euler at the default lag visibly diverges from the pendulum reference.
  const auto pendulum = find_system("pendulum");
  const Trajectory euler =
      simulate_scheme(pendulum, scheme_from_string("euler"), Vec{2.0, 0.0}, 0.0, 0.1, 100);
  const Trajectory pend_ref = simulate_reference(pendulum, Vec{2.0, 0.0}, 0.0, 0.1, 100);
  CHECK(dist_l2(euler.final_state(), pend_ref.final_state()) > 0.1);
}

TEST_CASE("time grids are exact", "[rollout]") {
  const auto star = find_system("star_point");
  const double t0 = 1.1;
  const double dt = 0.05;
  const Trajectory traj = simulate_reference(star, Vec{0.5, 0.5}, t0, dt, 40);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    CHECK(traj.times[k] == t0 + static_cast<double>(k) * dt);
  }
}

TEST_CASE("trajectory csv layout", "[rollout]") {
  const auto star = find_system("star_point");
  const Trajectory traj = simulate_reference(star, Vec{1.0, -1.0}, 0.0, 0.5, 2, 10);
  const std::string csv = trajectory_csv(traj);
  CHECK(csv.rfind("k,t,x_0,x_1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  CHECK_THROWS_AS(max_trajectory_deviation(traj, simulate_reference(star, Vec{1.0, -1.0}, 0.0,
                                                                    0.5, 3, 10)),
                  std::invalid_argument);
}
