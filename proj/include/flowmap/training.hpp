#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowmap/csv.hpp"
#include "flowmap/dataset.hpp"
#include "flowmap/errors.hpp"
#include "flowmap/metrics.hpp"
#include "flowmap/network.hpp"
#include "flowmap/parallel.hpp"

namespace flowmap {

struct TrainConfig {
  std::size_t iterations = 500;  // K: full passes over the learning set
  double learning_rate = 1e-2;
  double lr_decay = 0.999;  // geometric, applied once per iteration
  bool shuffle_each_iteration = true;
  std::uint64_t seed = 0;
  std::size_t trace_every = 1;  // iterations between error-trace samples

  void validate() const {
    if (iterations < 1) throw std::invalid_argument("TrainConfig: iterations must be >= 1");
    if (learning_rate < 0.0) throw std::invalid_argument("TrainConfig: negative learning rate");
    if (!(lr_decay > 0.0)) throw std::invalid_argument("TrainConfig: lr_decay must be positive");
    if (trace_every < 1) throw std::invalid_argument("TrainConfig: trace_every must be >= 1");
  }
};

/// Per-iteration error trace against the reference targets, plus the final
/// parameters. updates_performed is always K * J: one update per pair per
/// iteration.
struct TrainRecord {
  std::vector<std::size_t> iteration_indices;
  std::vector<double> mean_l2_vs_reference;
  NetParams final_params;
  std::size_t updates_performed = 0;

  [[nodiscard]] double final_mean_l2() const {
    if (mean_l2_vs_reference.empty()) throw std::logic_error("TrainRecord: empty trace");
    return mean_l2_vs_reference.back();
  }
};

/// ResNet outputs on the reference inputs, scored against the reference
/// targets with both error functionals.
[[nodiscard]] inline ErrorReport evaluate_params(const NetParams& params,
                                                 const LearningSet& reference) {
  std::vector<Vec> outputs;
  outputs.reserve(reference.size());
  std::vector<Vec> targets;
  targets.reserve(reference.size());
  ForwardCache cache;
  for (const auto& pair : reference.pairs) {
    forward_into(params, pair.y1, cache);
    Vec out = cache.output();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += pair.y1[i];
    outputs.push_back(std::move(out));
    targets.push_back(pair.y2);
  }
  return error_report(outputs, targets);
}

/// Trains from the given initial parameters: K full passes over the learning
/// set, one forward/backward/update per pair, visiting order reshuffled each
/// iteration when configured. Throws TrainDivergedError with the iteration
/// and pair index on a non-finite loss.
[[nodiscard]] inline TrainRecord train_from(NetParams params, const LearningSet& learning,
                                            const LearningSet& reference, const TrainConfig& cfg) {
  cfg.validate();
  if (!same_inputs(learning, reference)) {
    throw std::invalid_argument("train: learning and reference sets must share y1 inputs");
  }
  if (params.arch.input_dim != learning.dim()) {
    throw std::invalid_argument("train: architecture/system dimension mismatch");
  }

  const std::size_t pair_count = learning.size();
  const std::size_t n = learning.dim();

  std::vector<std::size_t> order(pair_count);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(cfg.seed, /*stream=*/1);  // init_params consumes stream 0

  TrainRecord record;
  ForwardCache cache;
  Gradients grads;
  Vec residual(n);
  double lr = cfg.learning_rate;

  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    if (cfg.shuffle_each_iteration) shuffle_rng.shuffle(order);

    for (std::size_t j : order) {
      const DataPair& pair = learning.pairs[j];
      forward_into(params, pair.y1, cache);
      const Vec& core_out = cache.output();

      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = pair.y1[i] + core_out[i] - pair.y2[i];
        residual[i] = 2.0 * diff;
        loss += diff * diff;
      }
      if (!std::isfinite(loss)) {
        throw TrainDivergedError("training diverged (non-finite loss) at iteration " +
                                     std::to_string(it) + ", pair " + std::to_string(j),
                                 it, j);
      }

      backward_into(params, cache, residual, grads);
      try {
        sgd_update_in_place(params, grads, lr);
      } catch (const NonFiniteStateError& e) {
        throw TrainDivergedError("training diverged (" + std::string(e.what()) +
                                     ") at iteration " + std::to_string(it) + ", pair " +
                                     std::to_string(j),
                                 it, j);
      }
    }
    lr *= cfg.lr_decay;

    if (it % cfg.trace_every == 0 || it == cfg.iterations) {
      record.iteration_indices.push_back(it);
      record.mean_l2_vs_reference.push_back(evaluate_params(params, reference).mean_l2);
    }
  }

  record.final_params = std::move(params);
  record.updates_performed = cfg.iterations * pair_count;
  return record;
}

/// As train_from, with parameters freshly initialized from cfg.seed.
[[nodiscard]] inline TrainRecord train(const Architecture& arch, const LearningSet& learning,
                                       const LearningSet& reference, const TrainConfig& cfg) {
  return train_from(init_params(arch, cfg.seed), learning, reference, cfg);
}

struct RunOutcome {
  std::uint64_t seed = 0;
  bool diverged = false;
  double max_linf = std::numeric_limits<double>::quiet_NaN();
  double mean_l2 = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

/// Averages over independently initialized runs; diverged runs are excluded
/// from the averages and counted.
struct MultiSeedResult {
  double avg_max_linf = std::numeric_limits<double>::quiet_NaN();
  double avg_mean_l2 = std::numeric_limits<double>::quiet_NaN();
  std::size_t diverged_count = 0;
  std::vector<RunOutcome> runs;
};

/// Trains `runs` networks differing only in init seed (cfg.seed + run index)
/// and averages the final error functionals across the runs that finish.
[[nodiscard]] inline MultiSeedResult train_multi_seed(const Architecture& arch,
                                                      const LearningSet& learning,
                                                      const LearningSet& reference,
                                                      const TrainConfig& cfg, std::size_t runs,
                                                      unsigned jobs = 1) {
  if (runs < 1) throw std::invalid_argument("train_multi_seed: runs must be >= 1");

  MultiSeedResult result;
  result.runs.resize(runs);
  parallel_for_index(runs, jobs, [&](std::size_t r) {
    TrainConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + r;
    RunOutcome& outcome = result.runs[r];
    outcome.seed = run_cfg.seed;
    try {
      const TrainRecord record = train(arch, learning, reference, run_cfg);
      const ErrorReport report = evaluate_params(record.final_params, reference);
      outcome.max_linf = report.max_linf;
      outcome.mean_l2 = report.mean_l2;
    } catch (const TrainDivergedError& e) {
      outcome.diverged = true;
      outcome.error = e.what();
    }
  });

  double sum_linf = 0.0;
  double sum_l2 = 0.0;
  std::size_t ok = 0;
  for (const auto& outcome : result.runs) {
    if (outcome.diverged) {
      ++result.diverged_count;
    } else {
      sum_linf += outcome.max_linf;
      sum_l2 += outcome.mean_l2;
      ++ok;
    }
  }
  if (ok > 0) {
    result.avg_max_linf = sum_linf / static_cast<double>(ok);
    result.avg_mean_l2 = sum_l2 / static_cast<double>(ok);
  }
  return result;
}

/// Trace rows as `iteration,mean_l2`.
[[nodiscard]] inline std::string train_record_csv(const TrainRecord& record) {
  std::ostringstream out;
  out << "iteration,mean_l2\n";
  for (std::size_t i = 0; i < record.iteration_indices.size(); ++i) {
    out << record.iteration_indices[i] << ',' << format_double(record.mean_l2_vs_reference[i])
        << '\n';
  }
  return out.str();
}

}  // namespace flowmap
