#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "flowmap/catalog.hpp"
#include "flowmap/dataset.hpp"
#include "flowmap/metrics.hpp"
#include "test_support.hpp"

using namespace flowmap;

TEST_CASE("sample_domain: uniform box sampling", "[dataset]") {
  const auto domain = Domain::box({{0.0, 1.0}, {0.0, 1.0}});
  const auto points = sample_domain(domain, 10000, 123);
  REQUIRE(points.size() == 10000);

  double mean0 = 0.0;
  double mean1 = 0.0;
  for (const auto& p : points) {
    REQUIRE(domain.contains(p));
    mean0 += p[0];
    mean1 += p[1];
  }
  mean0 /= 10000.0;
  mean1 /= 10000.0;
  CHECK(mean0 > 0.47);
  CHECK(mean0 < 0.53);
  CHECK(mean1 > 0.47);
  CHECK(mean1 < 0.53);

  CHECK(sample_domain(domain, 100, 123) ==
        std::vector<Vec>(points.begin(), points.begin() + 100));
  CHECK_THROWS_AS(sample_domain(domain, 0, 1), std::invalid_argument);
}

TEST_CASE("sample_domain: disk rejection sampling stays inside", "[dataset]") {
  const auto disk = Domain::disk(-2.0, 1.0, 1.0);
  for (const auto& p : sample_domain(disk, 2000, 7)) {
    const double dx = p[0] + 2.0;
    const double dy = p[1] - 1.0;
    CHECK(dx * dx + dy * dy <= 1.0);
  }
}

TEST_CASE("generate_pairs: targets are one scheme step from y1", "[dataset]") {
  const auto saddle = find_system("saddle");
  const auto set = generate_pairs(saddle, scheme_from_string("euler"), 0.1, 500, 11);

  CHECK(set.size() == 500);
  CHECK(set.system_id == "saddle");
  CHECK(set.scheme == "euler");
  CHECK(set.dt == 0.1);
  for (const auto& pair : set.pairs) {
    REQUIRE(saddle.domain().contains(pair.y1));
    CHECK(pair.t0 == 0.0);
    CHECK(pair.y2 == euler_step(saddle, pair.y1, pair.t0, 0.1));
  }

  // Equilibria are fixed points of every scheme.
  const auto pendulum = find_system("pendulum");
  for (const char* id : {"euler", "rk2", "rk4"}) {
    CHECK(scheme_step(pendulum, scheme_from_string(id), Vec{0.0, 0.0}, 0.0, 0.1) ==
          Vec{0.0, 0.0});
  }
}

TEST_CASE("generate_pairs: autonomized systems read t0 off the state", "[dataset]") {
  const auto augmented = find_system("nonauto3d_aut");
  const auto set = generate_pairs(augmented, scheme_from_string("rk2"), 0.05, 50, 3);
  for (const auto& pair : set.pairs) {
    CHECK(pair.t0 == pair.y1.back());
    CHECK(pair.t0 >= 1.0);
    CHECK(pair.t0 <= 2.0);
    // The appended coordinate advances by exactly dt under every scheme.
    CHECK(pair.y2.back() == Catch::Approx(pair.y1.back() + 0.05).epsilon(1e-15));
  }
}

TEST_CASE("generate_reference_pairs shares the sampling path", "[dataset]") {
  const auto sink = find_system("nodal_sink");
  const auto targets = generate_pairs(sink, scheme_from_string("rk4"), 0.1, 200, 17);
  const auto reference = generate_reference_pairs(sink, 0.1, 200, 17);

  REQUIRE(same_inputs(targets, reference));
  CHECK(reference.scheme == "reference");

  // Targets differ from the reference at the scheme's error level.
  const double diff = target_mean_l2_error(targets, reference);
  CHECK(diff > 0.0);
  CHECK(diff < 1e-4);
}

TEST_CASE("reference targets on star point match the analytic decay", "[dataset]") {
  const auto star = find_system("star_point");
  const auto reference = generate_reference_pairs(star, 0.1, 100, 29);
  const double decay = std::exp(-0.1);
  for (const auto& pair : reference.pairs) {
    CHECK(pair.y2[0] == Catch::Approx(decay * pair.y1[0]).margin(1e-12));
    CHECK(pair.y2[1] == Catch::Approx(decay * pair.y1[1]).margin(1e-12));
  }
}

TEST_CASE("reference targets match the closed-form affine flow", "[dataset]") {
  struct LinearCase {
    const char* id;
    testsupport::Mat2 a;
    Vec b;
  };
  const LinearCase cases[] = {
      {"saddle", {1.0, 1.0, 1.0, -1.0}, {-2.0, 0.0}},
      {"nodal_sink", {-2.0, 1.0, 1.0, -2.0}, {-2.0, 1.0}},
      {"improper_node", {1.0, -4.0, 4.0, -7.0}, {0.0, 0.0}},
      {"star_point", {-1.0, 0.0, 0.0, -1.0}, {0.0, 0.0}},
      {"center_point", {1.0, 2.0, -5.0, -1.0}, {0.0, 0.0}},
      {"spiral_point", {-1.0, -1.0, 2.0, -1.0}, {-1.0, 5.0}},
  };

  for (const auto& linear : cases) {
    INFO(linear.id);
    const auto system = find_system(linear.id);
    const auto reference = generate_reference_pairs(system, 0.1, 100, 31);
    for (const auto& pair : reference.pairs) {
      const Vec exact = testsupport::linear_flow(linear.a, linear.b, pair.y1, 0.1);
      CHECK(dist_l2(pair.y2, exact) <= 1e-10);
    }
  }
}

TEST_CASE("learning sets are reproducible bit-for-bit", "[dataset]") {
  const auto vdp = find_system("van_der_pol");
  const auto a = generate_pairs(vdp, scheme_from_string("rk2"), 0.05, 64, 99);
  const auto b = generate_pairs(vdp, scheme_from_string("rk2"), 0.05, 64, 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a.pairs[j].y1 == b.pairs[j].y1);
    CHECK(a.pairs[j].y2 == b.pairs[j].y2);
  }

  // Per-pair streams: a shorter set is a prefix of a longer one.
  const auto shorter = generate_pairs(vdp, scheme_from_string("rk2"), 0.05, 16, 99);
  for (std::size_t j = 0; j < shorter.size(); ++j) {
    CHECK(shorter.pairs[j].y1 == a.pairs[j].y1);
    CHECK(shorter.pairs[j].y2 == a.pairs[j].y2);
  }
}

TEST_CASE("blow-ups are reported with the offending pair index", "[dataset]") {
  const OdeSystem explosive(
      "explosive", 1,
      [](std::span<const double>, double, std::span<double> out) { out[0] = 1e308; },
      Domain::box({{1.0, 2.0}}), 0.1);
  try {
    (void)generate_pairs(explosive, scheme_from_string("euler"), 10.0, 5, 1);
    FAIL("expected NonFiniteStateError");
  } catch (const NonFiniteStateError& e) {
    CHECK(e.index() == 0);
  }
}

TEST_CASE("learning set csv round trip", "[dataset]") {
  const auto dir = testsupport::scratch_dir("dataset_csv");
  const auto sink = find_system("nodal_sink");
  const auto set = generate_pairs(sink, scheme_from_string("rk4"), 0.1, 32, 5);

  const std::string path = (dir / "pairs.csv").string();
  write_learning_set(set, path);
  REQUIRE(std::filesystem::exists(path));
  REQUIRE(std::filesystem::exists(dir / "pairs.meta.json"));

  const LearningSet loaded = read_learning_set(path);
  CHECK(loaded.system_id == set.system_id);
  CHECK(loaded.scheme == set.scheme);
  CHECK(loaded.dt == set.dt);
  CHECK(loaded.seed == set.seed);
  REQUIRE(loaded.size() == set.size());
  for (std::size_t j = 0; j < set.size(); ++j) {
    CHECK(loaded.pairs[j].y1 == set.pairs[j].y1);
    CHECK(loaded.pairs[j].y2 == set.pairs[j].y2);
    CHECK(loaded.pairs[j].t0 == set.pairs[j].t0);
  }

  const CsvTable table = read_csv(path);
  REQUIRE(table.header.size() == 6);
  CHECK(table.header[0] == "j");
  CHECK(table.header[1] == "y1_0");
  CHECK(table.header[3] == "y2_0");
  CHECK(table.header[5] == "t0");
}
