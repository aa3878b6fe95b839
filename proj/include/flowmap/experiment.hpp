#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowmap/catalog.hpp"
#include "flowmap/csv.hpp"
#include "flowmap/dataset.hpp"
#include "flowmap/metrics.hpp"
#include "flowmap/rollout.hpp"
#include "flowmap/training.hpp"
#include "flowmap/version.hpp"

namespace flowmap {

enum class ExperimentKind { arch_sweep, target_study, density_study, trajectory, order_study };

[[nodiscard]] inline std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::arch_sweep: return "arch_sweep";
    case ExperimentKind::target_study: return "target_study";
    case ExperimentKind::density_study: return "density_study";
    case ExperimentKind::trajectory: return "trajectory";
    case ExperimentKind::order_study: return "order_study";
  }
  return "?";
}

[[nodiscard]] inline ExperimentKind experiment_from_string(std::string_view id) {
  if (id == "arch_sweep") return ExperimentKind::arch_sweep;
  if (id == "target_study") return ExperimentKind::target_study;
  if (id == "density_study") return ExperimentKind::density_study;
  if (id == "trajectory") return ExperimentKind::trajectory;
  if (id == "order_study") return ExperimentKind::order_study;
  throw std::invalid_argument("unknown experiment '" + std::string(id) +
                              "' (arch_sweep|target_study|density_study|trajectory|order_study)");
}

struct ArchCell {
  std::size_t layers = 0;
  std::size_t neurons = 0;
};

/// Declarative experiment description. Zero/empty fields are filled with
/// per-system defaults by resolve_config; explicit values always win.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::target_study;
  std::string system_id = "nodal_sink";
  double dt = 0.0;            // 0 -> system default time lag
  std::size_t pairs = 0;      // J; 0 -> 500 for the linear systems, 2000 otherwise
  std::size_t iterations = 500;  // K
  double learning_rate = 0.0;  // 0 -> per-system default
  double lr_decay = 0.0;       // 0 -> per-system default
  bool shuffle = true;
  std::uint64_t seed = 0;
  std::size_t runs = 10;
  std::size_t trace_every = 1;

  std::vector<ArchCell> arch_grid;  // arch_sweep; empty -> per-system default grid
  ArchCell arch;                    // single-net experiments; zero -> per-system optimum

  std::vector<std::string> schemes = {"euler", "rk2", "rk4"};

  std::vector<std::size_t> pair_counts = {100, 500, 2000, 10000};  // density study
  std::size_t update_budget = 1000000;

  Vec x0;                // trajectory start; empty -> per-system default
  double t0 = 0.0;
  double horizon = 0.0;  // final time T; 0 -> per-system default
  std::size_t thin = 1;  // write every thin-th trajectory point

  std::vector<double> order_dts = {0.2, 0.1, 0.05, 0.025};

  std::string output_dir = ".";
  unsigned jobs = 1;
  std::size_t reference_substeps = 1000;
  double toggle_eta = 2.0;
};

namespace detail {

[[nodiscard]] inline bool is_linear_system(std::string_view id) {
  return id == "saddle" || id == "nodal_sink" || id == "improper_node" || id == "star_point" ||
         id == "center_point" || id == "spiral_point";
}

struct TrajectoryDefaults {
  Vec x0;
  double t0;
  double horizon;
};

[[nodiscard]] inline TrajectoryDefaults default_trajectory(std::string_view id) {
  if (id == "saddle") return {{1.5, 0.0}, 0.0, 2.0};
  if (id == "nodal_sink") return {{0.0, -0.5}, 0.0, 2.0};
  if (id == "improper_node" || id == "star_point" || id == "center_point") {
    return {{0.5, 0.5}, 0.0, 2.0};
  }
  if (id == "spiral_point") return {{-2.0, 1.5}, 0.0, 2.0};
  if (id == "pendulum") return {{2.0, 0.0}, 0.0, 10.0};
  if (id == "four_critical") return {{2.0, 1.0}, 0.0, 4.0};
  if (id == "cubic_barrier") return {{2.0, 0.0}, 0.0, 7.0};
  if (id == "lotka_volterra") return {{3.0, 3.0}, 0.0, 20.0};
  if (id == "nonauto3d") return {{2.0, -9.0, 0.0}, 1.1, 2.0};
  if (id == "nonauto3d_aut") return {{2.0, -9.0, 0.0, 1.1}, 1.1, 2.0};
  if (id == "van_der_pol") return {{-3.0, 2.0}, 0.0, 10.0};
  if (id == "fitzhugh_nagumo") return {{-1.0, 2.0}, 0.0, 1.0};
  if (id == "toggle" || id == "toggle_scaled") return {{19.0, 17.0}, 0.0, 5.0};
  if (id == "electric_network") return {{1.0, 0.15}, 0.0, 0.5};
  throw std::invalid_argument("no default trajectory for system '" + std::string(id) + "'");
}

[[nodiscard]] inline ArchCell default_arch(std::string_view id) {
  if (id == "saddle") return {1, 2};
  if (is_linear_system(id)) return {1, 6};
  if (id == "nonauto3d" || id == "nonauto3d_aut") return {1, 8};
  if (id == "pendulum" || id == "toggle" || id == "toggle_scaled") return {2, 40};
  if (id == "cubic_barrier") return {3, 80};
  if (id == "lotka_volterra") return {2, 128};
  return {2, 64};
}

struct LrDefaults {
  double learning_rate;
  double decay;
};

/// Empirical per-system SGD schedules: chosen so the default iteration
/// budgets train to the target-error level on the small linear nets and
/// stay stable on the wide nonlinear ones. Always overridable.
[[nodiscard]] inline LrDefaults default_learning_rate(std::string_view id) {
  if (is_linear_system(id)) return {0.3, 0.999};
  if (id == "pendulum" || id == "toggle" || id == "toggle_scaled") return {0.005, 0.995};
  if (id == "nonauto3d" || id == "nonauto3d_aut") return {0.01, 0.999};
  if (id == "four_critical" || id == "fitzhugh_nagumo") return {0.002, 0.999};
  if (id == "cubic_barrier" || id == "lotka_volterra") return {0.001, 0.999};
  if (id == "van_der_pol") return {0.0005, 0.999};
  if (id == "electric_network") return {0.0002, 0.999};
  return {0.005, 0.999};
}

[[nodiscard]] inline std::vector<ArchCell> default_arch_grid(std::string_view id) {
  std::vector<ArchCell> grid;
  if (is_linear_system(id) || id == "nonauto3d" || id == "nonauto3d_aut") {
    for (std::size_t layers = 1; layers <= 4; ++layers) {
      for (std::size_t neurons : {2, 4, 6, 8, 10}) grid.push_back({layers, neurons});
    }
  } else {
    for (std::size_t layers = 1; layers <= 3; ++layers) {
      for (std::size_t neurons : {40, 64, 80, 128}) grid.push_back({layers, neurons});
    }
  }
  return grid;
}

}  // namespace detail

/// Fills unset fields with the per-system defaults; idempotent.
[[nodiscard]] inline ExperimentConfig resolve_config(ExperimentConfig cfg) {
  const OdeSystem system = find_system(cfg.system_id, {cfg.toggle_eta});
  if (cfg.dt == 0.0) cfg.dt = system.default_dt();
  if (cfg.pairs == 0) cfg.pairs = detail::is_linear_system(cfg.system_id) ? 500 : 2000;
  const auto lr_defaults = detail::default_learning_rate(cfg.system_id);
  if (cfg.learning_rate == 0.0) cfg.learning_rate = lr_defaults.learning_rate;
  if (cfg.lr_decay == 0.0) cfg.lr_decay = lr_defaults.decay;
  if (cfg.arch.layers == 0 || cfg.arch.neurons == 0) {
    cfg.arch = detail::default_arch(cfg.system_id);
  }
  if (cfg.arch_grid.empty()) cfg.arch_grid = detail::default_arch_grid(cfg.system_id);
  if (cfg.x0.empty() || cfg.horizon == 0.0) {
    const auto defaults = detail::default_trajectory(cfg.system_id);
    if (cfg.x0.empty()) {
      cfg.x0 = defaults.x0;
      cfg.t0 = defaults.t0;
    }
    if (cfg.horizon == 0.0) cfg.horizon = defaults.horizon;
  }
  if (cfg.schemes.empty()) cfg.schemes = {"euler", "rk2", "rk4"};
  return cfg;
}

/// FLOWMAP_SEED overrides the configured seed (used by CI reruns).
[[nodiscard]] inline ExperimentConfig apply_env_overrides(ExperimentConfig cfg) {
  if (const char* env_seed = std::getenv("FLOWMAP_SEED")) {
    cfg.seed = std::stoull(env_seed);
  }
  return cfg;
}

[[nodiscard]] inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& cell : cfg.arch_grid) {
    grid.push_back({{"layers", cell.layers}, {"neurons", cell.neurons}});
  }
  return nlohmann::json{{"version", kVersion},
                        {"experiment", std::string(to_string(cfg.experiment))},
                        {"system", cfg.system_id},
                        {"dt", cfg.dt},
                        {"pairs", cfg.pairs},
                        {"iterations", cfg.iterations},
                        {"learning_rate", cfg.learning_rate},
                        {"lr_decay", cfg.lr_decay},
                        {"shuffle", cfg.shuffle},
                        {"seed", cfg.seed},
                        {"runs", cfg.runs},
                        {"trace_every", cfg.trace_every},
                        {"arch", {{"layers", cfg.arch.layers}, {"neurons", cfg.arch.neurons}}},
                        {"arch_grid", grid},
                        {"schemes", cfg.schemes},
                        {"pair_counts", cfg.pair_counts},
                        {"update_budget", cfg.update_budget},
                        {"x0", cfg.x0},
                        {"t0", cfg.t0},
                        {"horizon", cfg.horizon},
                        {"thin", cfg.thin},
                        {"order_dts", cfg.order_dts},
                        {"output_dir", cfg.output_dir},
                        {"jobs", cfg.jobs},
                        {"reference_substeps", cfg.reference_substeps},
                        {"toggle_eta", cfg.toggle_eta}};
}

/// Parses the JSON manifest; unknown keys are rejected so typos surface.
[[nodiscard]] inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {
      "version",     "experiment",  "system",      "dt",          "pairs",
      "iterations",  "learning_rate", "lr_decay",  "shuffle",     "seed",
      "runs",        "trace_every", "arch",        "arch_grid",   "schemes",
      "pair_counts", "update_budget", "x0",        "t0",          "horizon",
      "thin",        "order_dts",   "output_dir",  "jobs",        "reference_substeps",
      "toggle_eta"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool found = false;
    for (const auto& k : known) found |= (k == key);
    if (!found) throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  ExperimentConfig cfg;
  if (j.contains("experiment")) cfg.experiment = experiment_from_string(j.at("experiment").get<std::string>());
  if (j.contains("system")) cfg.system_id = j.at("system").get<std::string>();
  if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
  if (j.contains("pairs")) cfg.pairs = j.at("pairs").get<std::size_t>();
  if (j.contains("iterations")) cfg.iterations = j.at("iterations").get<std::size_t>();
  if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("lr_decay")) cfg.lr_decay = j.at("lr_decay").get<double>();
  if (j.contains("shuffle")) cfg.shuffle = j.at("shuffle").get<bool>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("runs")) cfg.runs = j.at("runs").get<std::size_t>();
  if (j.contains("trace_every")) cfg.trace_every = j.at("trace_every").get<std::size_t>();
  if (j.contains("arch")) {
    cfg.arch.layers = j.at("arch").at("layers").get<std::size_t>();
    cfg.arch.neurons = j.at("arch").at("neurons").get<std::size_t>();
  }
  if (j.contains("arch_grid")) {
    for (const auto& cell : j.at("arch_grid")) {
      cfg.arch_grid.push_back(
          {cell.at("layers").get<std::size_t>(), cell.at("neurons").get<std::size_t>()});
    }
  }
  if (j.contains("schemes")) cfg.schemes = j.at("schemes").get<std::vector<std::string>>();
  if (j.contains("pair_counts")) cfg.pair_counts = j.at("pair_counts").get<std::vector<std::size_t>>();
  if (j.contains("update_budget")) cfg.update_budget = j.at("update_budget").get<std::size_t>();
  if (j.contains("x0")) cfg.x0 = j.at("x0").get<Vec>();
  if (j.contains("t0")) cfg.t0 = j.at("t0").get<double>();
  if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<double>();
  if (j.contains("thin")) cfg.thin = j.at("thin").get<std::size_t>();
  if (j.contains("order_dts")) cfg.order_dts = j.at("order_dts").get<std::vector<double>>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<unsigned>();
  if (j.contains("reference_substeps")) cfg.reference_substeps = j.at("reference_substeps").get<std::size_t>();
  if (j.contains("toggle_eta")) cfg.toggle_eta = j.at("toggle_eta").get<double>();
  return cfg;
}

namespace detail {

inline std::string write_output(const ExperimentConfig& cfg, const std::string& filename,
                                const std::string& csv_content) {
  std::filesystem::create_directories(cfg.output_dir);
  const std::string path = (std::filesystem::path(cfg.output_dir) / filename).string();
  write_text_file(path, csv_content);
  write_text_file(sidecar_path(path), config_to_json(cfg).dump(2) + "\n");
  return path;
}

[[nodiscard]] inline TrainConfig train_config_for(const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.iterations = cfg.iterations;
  tc.learning_rate = cfg.learning_rate;
  tc.lr_decay = cfg.lr_decay;
  tc.shuffle_each_iteration = cfg.shuffle;
  tc.seed = cfg.seed;
  tc.trace_every = cfg.trace_every;
  return tc;
}

/// Iterations giving a fixed total number of parameter updates: K = budget/J,
/// rounded to nearest, at least 1.
[[nodiscard]] inline std::size_t density_iterations(std::size_t update_budget,
                                                    std::size_t pair_count) {
  if (pair_count == 0) throw std::invalid_argument("density_iterations: J must be positive");
  const auto k = static_cast<std::size_t>(
      std::llround(static_cast<double>(update_budget) / static_cast<double>(pair_count)));
  return k < 1 ? 1 : k;
}

}  // namespace detail

/// Trains one multi-seed cell per architecture in the grid against the
/// refined-mesh reference targets and tabulates the averaged errors.
/// Diverged runs are counted per cell, never fatal.
[[nodiscard]] inline std::vector<std::string> run_arch_sweep(ExperimentConfig cfg) {
  cfg = resolve_config(std::move(cfg));
  const OdeSystem system = find_system(cfg.system_id, {cfg.toggle_eta});
  const LearningSet reference =
      generate_reference_pairs(system, cfg.dt, cfg.pairs, cfg.seed, cfg.reference_substeps);
  const TrainConfig tc = detail::train_config_for(cfg);

  std::ostringstream out;
  out << "layers,neurons,avg_max_linf,avg_mean_l2,diverged_runs";
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    out << ",run" << r << "_max_linf,run" << r << "_mean_l2";
  }
  out << '\n';

  for (const auto& cell : cfg.arch_grid) {
    const Architecture arch(system.dim(), cell.layers, cell.neurons);
    const MultiSeedResult result =
        train_multi_seed(arch, reference, reference, tc, cfg.runs, cfg.jobs);
    out << cell.layers << ',' << cell.neurons << ',' << format_double(result.avg_max_linf) << ','
        << format_double(result.avg_mean_l2) << ',' << result.diverged_count;
    for (const auto& run : result.runs) {
      out << ',' << format_double(run.max_linf) << ',' << format_double(run.mean_l2);
    }
    out << '\n';
  }

  return {detail::write_output(cfg, "arch_sweep.csv", out.str())};
}

/// For each scheme: targets at lag dt, one trained network, and the
/// per-iteration mean-L2 error against the reference targets next to the
/// scheme's constant target error.
[[nodiscard]] inline std::vector<std::string> run_target_study(ExperimentConfig cfg) {
  cfg = resolve_config(std::move(cfg));
  const OdeSystem system = find_system(cfg.system_id, {cfg.toggle_eta});
  const Architecture arch(system.dim(), cfg.arch.layers, cfg.arch.neurons);
  const LearningSet reference =
      generate_reference_pairs(system, cfg.dt, cfg.pairs, cfg.seed, cfg.reference_substeps);
  const TrainConfig tc = detail::train_config_for(cfg);

  std::ostringstream out;
  out << "scheme,iteration,net_error,target_error\n";
  for (const auto& scheme_id : cfg.schemes) {
    const StepScheme scheme = scheme_from_string(scheme_id);
    const LearningSet targets = generate_pairs(system, scheme, cfg.dt, cfg.pairs, cfg.seed);
    const double target_error = target_mean_l2_error(targets, reference);
    const TrainRecord record = train(arch, targets, reference, tc);
    for (std::size_t i = 0; i < record.iteration_indices.size(); ++i) {
      out << scheme_id << ',' << record.iteration_indices[i] << ','
          << format_double(record.mean_l2_vs_reference[i]) << ',' << format_double(target_error)
          << '\n';
    }
  }

  return {detail::write_output(cfg, "target_study.csv", out.str())};
}

/// Varies the learning-set size under a fixed total update budget
/// (K = budget / J) and records each error trace against update count.
[[nodiscard]] inline std::vector<std::string> run_density_study(ExperimentConfig cfg) {
  cfg = resolve_config(std::move(cfg));
  const OdeSystem system = find_system(cfg.system_id, {cfg.toggle_eta});
  const Architecture arch(system.dim(), cfg.arch.layers, cfg.arch.neurons);

  std::ostringstream out;
  out << "J,iteration,updates,mean_l2\n";
  for (const std::size_t pair_count : cfg.pair_counts) {
    const LearningSet reference =
        generate_reference_pairs(system, cfg.dt, pair_count, cfg.seed, cfg.reference_substeps);
    TrainConfig tc = detail::train_config_for(cfg);
    tc.iterations = detail::density_iterations(cfg.update_budget, pair_count);
    const TrainRecord record = train(arch, reference, reference, tc);
    for (std::size_t i = 0; i < record.iteration_indices.size(); ++i) {
      out << pair_count << ',' << record.iteration_indices[i] << ','
          << record.iteration_indices[i] * pair_count << ','
          << format_double(record.mean_l2_vs_reference[i]) << '\n';
    }
  }

  return {detail::write_output(cfg, "density_study.csv", out.str())};
}

/// Trains one network per scheme and rolls each out from the configured
/// initial condition, next to the reference trajectory. States are written
/// in raw coordinates; scaled systems are handled through their scale
/// factor.
[[nodiscard]] inline std::vector<std::string> run_trajectory(ExperimentConfig cfg) {
  cfg = resolve_config(std::move(cfg));
  const OdeSystem system = find_system(cfg.system_id, {cfg.toggle_eta});
  const double scale = system.scale_to_raw();
  const auto steps =
      static_cast<std::size_t>(std::llround((cfg.horizon - cfg.t0) / cfg.dt));
  if (steps < 1) throw std::invalid_argument("trajectory: horizon shorter than one step");
  if (cfg.x0.size() != system.dim()) {
    throw std::invalid_argument("trajectory: x0 dimension mismatch");
  }

  // The reference is integrated in the system's own (possibly scaled)
  // coordinates and recorded in raw ones.
  Vec x0_system(cfg.x0.size());
  for (std::size_t i = 0; i < cfg.x0.size(); ++i) x0_system[i] = cfg.x0[i] / scale;
  Trajectory reference_traj =
      simulate_reference(system, x0_system, cfg.t0, cfg.dt, steps, cfg.reference_substeps);
  for (auto& state : reference_traj.states) {
    for (double& v : state) v *= scale;
  }
  std::vector<std::string> written;
  written.push_back(detail::write_output(cfg, "trajectory_reference.csv",
                                         trajectory_csv(reference_traj, cfg.thin)));

  const LearningSet reference_set =
      generate_reference_pairs(system, cfg.dt, cfg.pairs, cfg.seed, cfg.reference_substeps);
  for (const auto& scheme_id : cfg.schemes) {
    const StepScheme scheme = scheme_from_string(scheme_id);
    const LearningSet targets = generate_pairs(system, scheme, cfg.dt, cfg.pairs, cfg.seed);
    TrainConfig tc = detail::train_config_for(cfg);
    tc.trace_every = tc.iterations;  // only the final trace is needed here
    const TrainRecord record =
        train(Architecture(system.dim(), cfg.arch.layers, cfg.arch.neurons), targets,
              reference_set, tc);
    written.push_back(detail::write_output(cfg, "params_" + scheme_id + ".json",
                                           net_params_to_json(record.final_params).dump(2) +
                                               "\n"));
    const Trajectory net_traj =
        simulate_resnet(record.final_params, cfg.x0, cfg.t0, cfg.dt, steps, scale);
    written.push_back(detail::write_output(cfg, "trajectory_" + scheme_id + ".csv",
                                           trajectory_csv(net_traj, cfg.thin)));
  }
  return written;
}

/// Target error against the reference over a ladder of time lags, with the
/// fitted log-log slope per scheme.
[[nodiscard]] inline std::vector<std::string> run_order_study(ExperimentConfig cfg) {
  cfg = resolve_config(std::move(cfg));
  const OdeSystem system = find_system(cfg.system_id, {cfg.toggle_eta});
  if (cfg.order_dts.size() < 3) {
    throw std::invalid_argument("order_study: need at least 3 time lags");
  }

  std::ostringstream out;
  out << "scheme,dt,target_error,fitted_slope\n";
  for (const auto& scheme_id : cfg.schemes) {
    const StepScheme scheme = scheme_from_string(scheme_id);
    std::vector<double> errors;
    for (const double dt : cfg.order_dts) {
      const LearningSet reference =
          generate_reference_pairs(system, dt, cfg.pairs, cfg.seed, cfg.reference_substeps);
      const LearningSet targets = generate_pairs(system, scheme, dt, cfg.pairs, cfg.seed);
      errors.push_back(target_mean_l2_error(targets, reference));
    }
    const double slope = fit_order(cfg.order_dts, errors);
    for (std::size_t i = 0; i < cfg.order_dts.size(); ++i) {
      out << scheme_id << ',' << format_double(cfg.order_dts[i]) << ','
          << format_double(errors[i]) << ',' << format_double(slope) << '\n';
    }
  }

  return {detail::write_output(cfg, "order_study.csv", out.str())};
}

/// Dispatch on cfg.experiment; returns the paths written.
[[nodiscard]] inline std::vector<std::string> run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::arch_sweep: return run_arch_sweep(cfg);
    case ExperimentKind::target_study: return run_target_study(cfg);
    case ExperimentKind::density_study: return run_density_study(cfg);
    case ExperimentKind::trajectory: return run_trajectory(cfg);
    case ExperimentKind::order_study: return run_order_study(cfg);
  }
  throw std::logic_error("run_experiment: bad experiment kind");
}

}  // namespace flowmap
