// Minimal end-to-end use of the library: train a small ResNet on rk4
// targets for the nodal sink system, compare against the scheme's target
// error, and roll the trained net out along a trajectory.

#include <cstdio>

#include "flowmap/flowmap.hpp"

int main() {
  using namespace flowmap;

  const OdeSystem system = find_system("nodal_sink");
  const double dt = system.default_dt();

  const LearningSet targets = generate_pairs(system, scheme_from_string("rk4"), dt, 500, 1);
  const LearningSet reference = generate_reference_pairs(system, dt, 500, 1);
  std::printf("target mean-L2 error vs reference: %.3e\n",
              target_mean_l2_error(targets, reference));

  TrainConfig cfg;
  cfg.iterations = 500;
  cfg.learning_rate = 0.3;
  cfg.seed = 1;
  cfg.trace_every = 100;
  const TrainRecord record = train(Architecture(2, 1, 6), targets, reference, cfg);
  for (std::size_t i = 0; i < record.iteration_indices.size(); ++i) {
    std::printf("iteration %4zu: net mean-L2 vs reference %.3e\n", record.iteration_indices[i],
                record.mean_l2_vs_reference[i]);
  }

  const Trajectory net = simulate_resnet(record.final_params, {0.0, -0.5}, 0.0, dt, 20);
  const Trajectory ref = simulate_reference(system, {0.0, -0.5}, 0.0, dt, 20);
  std::printf("max trajectory deviation over 20 steps: %.3e\n",
              max_trajectory_deviation(net, ref));
  return 0;
}
