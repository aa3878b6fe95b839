// Command-line harness around the experiment runners. A run is described by
// an optional JSON config file plus flag overrides; every invocation is
// deterministic under a fixed --seed (FLOWMAP_SEED overrides for CI).

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowmap/flowmap.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> items;
  std::string::size_type start = 0;
  while (start <= csv.size()) {
    auto comma = csv.find(',', start);
    if (comma == std::string::npos) {
      items.push_back(csv.substr(start));
      break;
    }
    items.push_back(csv.substr(start, comma - start));
    start = comma + 1;
  }
  return items;
}

std::vector<flowmap::ArchCell> parse_grid(const std::string& text) {
  std::vector<flowmap::ArchCell> grid;
  for (const auto& cell : split_list(text)) {
    const auto x = cell.find('x');
    if (x == std::string::npos) {
      throw std::invalid_argument("bad grid cell '" + cell + "' (expected LxN, e.g. 1x6)");
    }
    grid.push_back({std::stoul(cell.substr(0, x)), std::stoul(cell.substr(x + 1))});
  }
  return grid;
}

void print_error_json(const std::string& type, const std::string& message) {
  const nlohmann::json err{{"error", {{"type", type}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowmap: residual-network one-step ODE solver experiments"};

  std::string config_path;
  std::string experiment;
  std::string system_id;
  std::string schemes;
  std::string grid;
  std::string arch;
  std::string x0;
  std::string j_list;
  std::string order_dts;
  double dt = -1.0;
  double lr = -1.0;
  double lr_decay = -1.0;
  double t0 = 0.0;
  double horizon = -1.0;
  double toggle_eta = -1.0;
  long long pairs = -1;
  long long iterations = -1;
  long long seed = -1;
  long long runs = -1;
  long long trace_every = -1;
  long long budget = -1;
  long long substeps = -1;
  unsigned jobs = 0;
  std::string out_dir;
  bool list_systems = false;

  app.add_option("--config", config_path, "JSON config file (flags override its fields)");
  app.add_option("--experiment", experiment,
                 "arch_sweep|target_study|density_study|trajectory|order_study");
  app.add_option("--system", system_id, "benchmark system id (see --list-systems)");
  app.add_option("--dt", dt, "time lag (default: the system's)");
  app.add_option("--pairs", pairs, "learning pairs J");
  app.add_option("--iterations", iterations, "training iterations K (full passes)");
  app.add_option("--lr", lr, "SGD learning rate");
  app.add_option("--lr-decay", lr_decay, "per-iteration learning-rate decay");
  app.add_option("--seed", seed, "base RNG seed");
  app.add_option("--runs", runs, "independent runs for multi-seed averaging");
  app.add_option("--trace-every", trace_every, "iterations between error-trace samples");
  app.add_option("--schemes", schemes, "comma list from euler,rk2,rk4");
  app.add_option("--grid", grid, "architecture grid, e.g. 1x2,1x6,2x8");
  app.add_option("--arch", arch, "single architecture LxN, e.g. 1x6");
  app.add_option("--x0", x0, "trajectory start, comma-separated");
  auto* t0_opt = app.add_option("--t0", t0, "trajectory initial time");
  app.add_option("--horizon", horizon, "trajectory final time T");
  long long thin = -1;
  app.add_option("--thin", thin, "write every Nth trajectory point (plot thinning)");
  app.add_option("--j-list", j_list, "density study pair counts, comma-separated");
  app.add_option("--budget", budget, "density study total update budget");
  app.add_option("--order-dts", order_dts, "order study time lags, comma-separated");
  app.add_option("--substeps", substeps, "reference integrator substeps per lag");
  app.add_option("--toggle-eta", toggle_eta, "exponent eta in the toggle-switch reduction");
  app.add_option("--jobs", jobs, "worker threads for sweep cells / runs");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--list-systems", list_systems, "print the benchmark system ids and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_systems) {
      for (const auto& id : flowmap::system_ids()) std::cout << id << "\n";
      return 0;
    }

    flowmap::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config file " + config_path);
      cfg = flowmap::config_from_json(nlohmann::json::parse(in));
    }

    if (!experiment.empty()) cfg.experiment = flowmap::experiment_from_string(experiment);
    else if (config_path.empty()) throw std::invalid_argument("--experiment (or --config) is required");
    if (!system_id.empty()) cfg.system_id = system_id;
    if (dt >= 0.0) cfg.dt = dt;
    if (pairs >= 0) cfg.pairs = static_cast<std::size_t>(pairs);
    if (iterations >= 0) cfg.iterations = static_cast<std::size_t>(iterations);
    if (lr >= 0.0) cfg.learning_rate = lr;
    if (lr_decay >= 0.0) cfg.lr_decay = lr_decay;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (runs >= 0) cfg.runs = static_cast<std::size_t>(runs);
    if (trace_every >= 0) cfg.trace_every = static_cast<std::size_t>(trace_every);
    if (!schemes.empty()) cfg.schemes = split_list(schemes);
    if (!grid.empty()) cfg.arch_grid = parse_grid(grid);
    if (!arch.empty()) {
      const auto cells = parse_grid(arch);
      if (cells.size() != 1) throw std::invalid_argument("--arch takes a single LxN cell");
      cfg.arch = cells.front();
    }
    if (!x0.empty()) {
      cfg.x0.clear();
      for (const auto& field : split_list(x0)) cfg.x0.push_back(std::stod(field));
    }
    if (t0_opt->count() > 0) cfg.t0 = t0;
    if (horizon >= 0.0) cfg.horizon = horizon;
    if (thin >= 1) cfg.thin = static_cast<std::size_t>(thin);
    if (!j_list.empty()) {
      cfg.pair_counts.clear();
      for (const auto& field : split_list(j_list)) {
        cfg.pair_counts.push_back(std::stoul(field));
      }
    }
    if (budget >= 0) cfg.update_budget = static_cast<std::size_t>(budget);
    if (!order_dts.empty()) {
      cfg.order_dts.clear();
      for (const auto& field : split_list(order_dts)) cfg.order_dts.push_back(std::stod(field));
    }
    if (substeps > 0) cfg.reference_substeps = static_cast<std::size_t>(substeps);
    if (toggle_eta >= 0.0) cfg.toggle_eta = toggle_eta;
    if (jobs > 0) cfg.jobs = jobs;
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    cfg = flowmap::apply_env_overrides(cfg);
    cfg = flowmap::resolve_config(cfg);

    const auto written = flowmap::run_experiment(cfg);
    for (const auto& path : written) std::cout << path << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    print_error_json("invalid_argument", e.what());
    return 2;
  } catch (const flowmap::TrainDivergedError& e) {
    print_error_json("train_diverged", e.what());
    return 3;
  } catch (const std::exception& e) {
    print_error_json("runtime_error", e.what());
    return 1;
  }
}
