#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "flowmap/catalog.hpp"
#include "flowmap/training.hpp"
#include "test_support.hpp"

using namespace flowmap;

namespace {

LearningSet single_pair_set(const Vec& y1, const Vec& y2, const std::string& scheme) {
  LearningSet set;
  set.system_id = "manual";
  set.scheme = scheme;
  set.dt = 0.1;
  set.seed = 0;
  set.pairs.push_back({y1, y2, 0.0});
  return set;
}

}  // namespace

TEST_CASE("identity network with zero learning rate traces ||z2 - y1||", "[training]") {
  const Vec y1{0.2, -0.4};
  const Vec z2{0.45, 0.12};
  const auto learning = single_pair_set(y1, Vec{0.5, 0.1}, "euler");
  const auto reference = single_pair_set(y1, z2, "reference");

  NetParams params = init_params(Architecture(2, 1, 4), 5);
  zero_final_layer(params);

  TrainConfig cfg;
  cfg.iterations = 1;
  cfg.learning_rate = 0.0;
  cfg.seed = 5;

  const TrainRecord record = train_from(params, learning, reference, cfg);
  REQUIRE(record.iteration_indices == std::vector<std::size_t>{1});
  CHECK(record.final_mean_l2() == Catch::Approx(dist_l2(y1, z2)).epsilon(1e-15));
  CHECK(record.updates_performed == 1);
  CHECK(record.final_params == params);  // lr = 0 never moves the parameters
}

TEST_CASE("training is deterministic and counts updates", "[training]") {
  const auto saddle = find_system("saddle");
  const auto targets = generate_pairs(saddle, scheme_from_string("rk4"), 0.1, 40, 2);
  const auto reference = generate_reference_pairs(saddle, 0.1, 40, 2, 200);

  TrainConfig cfg;
  cfg.iterations = 30;
  cfg.seed = 8;
  cfg.trace_every = 10;

  const TrainRecord a = train(Architecture(2, 1, 2), targets, reference, cfg);
  const TrainRecord b = train(Architecture(2, 1, 2), targets, reference, cfg);
  CHECK(a.iteration_indices == b.iteration_indices);
  CHECK(a.mean_l2_vs_reference == b.mean_l2_vs_reference);
  CHECK(a.final_params == b.final_params);
  CHECK(a.updates_performed == 30 * 40);
  CHECK(a.iteration_indices == std::vector<std::size_t>{10, 20, 30});
}

TEST_CASE("training preconditions", "[training]") {
  const auto saddle = find_system("saddle");
  const auto targets = generate_pairs(saddle, scheme_from_string("euler"), 0.1, 10, 2);
  const auto reference = generate_reference_pairs(saddle, 0.1, 10, 2, 100);
  const auto other_seed = generate_reference_pairs(saddle, 0.1, 10, 3, 100);

  TrainConfig cfg;
  cfg.iterations = 1;
  CHECK_THROWS_AS(train(Architecture(2, 1, 2), targets, other_seed, cfg), std::invalid_argument);
  CHECK_THROWS_AS(train(Architecture(3, 1, 2), targets, reference, cfg), std::invalid_argument);

  TrainConfig bad = cfg;
  bad.iterations = 0;
  CHECK_THROWS_AS(train(Architecture(2, 1, 2), targets, reference, bad), std::invalid_argument);
  bad = cfg;
  bad.learning_rate = -1.0;
  CHECK_THROWS_AS(train(Architecture(2, 1, 2), targets, reference, bad), std::invalid_argument);
}

TEST_CASE("a tiny SGD step never increases the sample loss", "[training]") {
  const auto sink = find_system("nodal_sink");
  const auto targets = generate_pairs(sink, scheme_from_string("rk2"), 0.1, 50, 21);

  NetParams params = init_params(Architecture(2, 2, 8), 4);
  ForwardCache cache;
  Gradients grads;
  auto sample_loss = [&](const NetParams& p, const DataPair& pair) {
    const Vec out = resnet_forward(p, pair.y1);
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = out[i] - pair.y2[i];
      loss += d * d;
    }
    return loss;
  };

  for (const auto& pair : targets.pairs) {
    const double before = sample_loss(params, pair);
    forward_into(params, pair.y1, cache);
    Vec residual(2);
    for (std::size_t i = 0; i < 2; ++i) {
      residual[i] = 2.0 * (pair.y1[i] + cache.output()[i] - pair.y2[i]);
    }
    backward_into(params, cache, residual, grads);
    NetParams stepped = params;
    sgd_update_in_place(stepped, grads, 1e-6);
    CHECK(sample_loss(stepped, pair) <= before + 1e-12);
  }
}

TEST_CASE("divergence aborts with the iteration and pair index", "[training]") {
  const auto saddle = find_system("saddle");
  const auto targets = generate_pairs(saddle, scheme_from_string("euler"), 0.1, 20, 2);
  const auto reference = generate_reference_pairs(saddle, 0.1, 20, 2, 100);

  TrainConfig cfg;
  cfg.iterations = 50;
  cfg.learning_rate = 1e6;

  try {
    (void)train(Architecture(2, 1, 4), targets, reference, cfg);
    FAIL("expected TrainDivergedError");
  } catch (const TrainDivergedError& e) {
    CHECK(e.iteration() >= 1);
    CHECK(e.pair_index() < 20);
  }
}

TEST_CASE("traced error decreases over training on the saddle system", "[training][slow]") {
  const auto saddle = find_system("saddle");
  const auto targets = generate_pairs(saddle, scheme_from_string("rk4"), 0.1, 500, 6);
  const auto reference = generate_reference_pairs(saddle, 0.1, 500, 6);

  int improved = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TrainConfig cfg;
    cfg.iterations = 500;
    cfg.learning_rate = 0.005;
    cfg.seed = seed;
    cfg.trace_every = 5;
    const TrainRecord record = train(Architecture(2, 1, 2), targets, reference, cfg);
    const double at5 = record.mean_l2_vs_reference.front();
    const double at500 = record.final_mean_l2();
    if (at500 < at5) ++improved;
  }
  CHECK(improved >= 9);
}

TEST_CASE("trained error converges to the target error level", "[training][slow]") {
  // Single-scheme version of the convergence claim; the acceptance suite
  // runs all three schemes.
  const auto sink = find_system("nodal_sink");
  const auto targets = generate_pairs(sink, scheme_from_string("rk4"), 0.1, 500, 1);
  const auto reference = generate_reference_pairs(sink, 0.1, 500, 1);
  const double target_error = target_mean_l2_error(targets, reference);

  TrainConfig cfg;
  cfg.iterations = 500;
  cfg.learning_rate = 0.3;
  cfg.seed = 1;
  cfg.trace_every = 100;
  const TrainRecord record = train(Architecture(2, 1, 6), targets, reference, cfg);

  const double ratio = record.final_mean_l2() / target_error;
  INFO("final " << record.final_mean_l2() << " target " << target_error << " ratio " << ratio);
  CHECK(ratio >= 1.0 / 3.0);
  CHECK(ratio <= 3.0);
}

TEST_CASE("multi-seed averaging", "[training]") {
  const auto saddle = find_system("saddle");
  const auto reference = generate_reference_pairs(saddle, 0.1, 60, 12, 200);

  TrainConfig cfg;
  cfg.iterations = 40;
  cfg.seed = 100;

  const MultiSeedResult single = train_multi_seed(Architecture(2, 1, 2), reference, reference,
                                                  cfg, 1);
  const TrainRecord direct = train(Architecture(2, 1, 2), reference, reference, cfg);
  const ErrorReport report = evaluate_params(direct.final_params, reference);
  REQUIRE(single.runs.size() == 1);
  CHECK(single.avg_mean_l2 == report.mean_l2);
  CHECK(single.avg_max_linf == report.max_linf);
  CHECK(single.diverged_count == 0);

  const MultiSeedResult again = train_multi_seed(Architecture(2, 1, 2), reference, reference,
                                                 cfg, 3);
  const MultiSeedResult parallel = train_multi_seed(Architecture(2, 1, 2), reference, reference,
                                                    cfg, 3, /*jobs=*/2);
  CHECK(again.avg_mean_l2 == parallel.avg_mean_l2);
  CHECK(again.avg_max_linf == parallel.avg_max_linf);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(again.runs[r].mean_l2 == parallel.runs[r].mean_l2);
    CHECK(again.runs[r].seed == 100 + r);
  }
}

TEST_CASE("diverged runs are excluded and counted", "[training]") {
  const auto saddle = find_system("saddle");
  const auto reference = generate_reference_pairs(saddle, 0.1, 20, 12, 100);

  TrainConfig cfg;
  cfg.iterations = 30;
  cfg.learning_rate = 1e6;  // every run blows up

  const MultiSeedResult result =
      train_multi_seed(Architecture(2, 1, 4), reference, reference, cfg, 3);
  CHECK(result.diverged_count == 3);
  CHECK(std::isnan(result.avg_mean_l2));
  CHECK(std::isnan(result.avg_max_linf));
  for (const auto& run : result.runs) {
    CHECK(run.diverged);
    CHECK_FALSE(run.error.empty());
  }
}

TEST_CASE("train record csv", "[training]") {
  TrainRecord record;
  record.iteration_indices = {1, 2};
  record.mean_l2_vs_reference = {0.5, 0.25};
  CHECK(train_record_csv(record) == "iteration,mean_l2\n1,0.5\n2,0.25\n");
}
