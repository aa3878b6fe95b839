#pragma once

#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flowmap/csv.hpp"
#include "flowmap/errors.hpp"
#include "flowmap/integrators.hpp"
#include "flowmap/ode_system.hpp"
#include "flowmap/rng.hpp"
#include "flowmap/vec.hpp"

namespace flowmap {

/// One learning pair: initial state y1 = x(t0) and target y2 ~ x(t0 + dt).
struct DataPair {
  Vec y1;
  Vec y2;
  double t0 = 0.0;
};

/// The learning set S = {(y1_j, y2_j)}: uniformly sampled initial states
/// with one-step targets, all sharing one system, scheme and time lag.
struct LearningSet {
  std::vector<DataPair> pairs;
  std::string system_id;
  std::string scheme;  // "euler" | "rk2" | "rk4" | "reference"
  double dt = 0.0;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t size() const { return pairs.size(); }
  [[nodiscard]] std::size_t dim() const { return pairs.empty() ? 0 : pairs.front().y1.size(); }
};

/// `count` i.i.d. uniform points from the domain. Point k is drawn from its
/// own seed-derived stream, so prefixes are stable under count changes and
/// generation can be split across workers without reordering effects.
[[nodiscard]] inline std::vector<Vec> sample_domain(const Domain& domain, std::size_t count,
                                                    std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_domain: count must be >= 1");
  const auto bbox = domain.bounding_box();
  const std::size_t n = domain.dim();

  std::vector<Vec> points;
  points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(seed, k);
    Vec x(n);
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) x[i] = rng.uniform(bbox[i].lo, bbox[i].hi);
      if (domain.contains(x)) break;  // boxes always pass; disks reject
    }
    points.push_back(x);
  }
  return points;
}

namespace detail {

inline double initial_time_for(const OdeSystem& system, const Vec& y1) {
  // Time-augmented systems carry t0 as their last state coordinate;
  // everything else is autonomous-by-construction and uses t0 = 0.
  return system.has_time_coordinate() ? y1.back() : 0.0;
}

template <class StepFn>
[[nodiscard]] LearningSet generate_with(const OdeSystem& system, std::string scheme_id, double dt,
                                        std::size_t count, std::uint64_t seed, StepFn&& step) {
  if (!(dt > 0.0)) throw std::invalid_argument("generate_pairs: dt must be positive");

  LearningSet set;
  set.system_id = system.name();
  set.scheme = std::move(scheme_id);
  set.dt = dt;
  set.seed = seed;
  set.pairs.reserve(count);

  auto initial_states = sample_domain(system.domain(), count, seed);
  for (std::size_t j = 0; j < initial_states.size(); ++j) {
    DataPair pair;
    pair.y1 = std::move(initial_states[j]);
    pair.t0 = initial_time_for(system, pair.y1);
    try {
      pair.y2 = step(pair.y1, pair.t0);
    } catch (const NonFiniteStateError& e) {
      throw NonFiniteStateError(
          "target generation blew up at pair " + std::to_string(j) + ": " + e.what(), j);
    }
    set.pairs.push_back(std::move(pair));
  }
  return set;
}

}  // namespace detail

/// Learning set with targets from ONE step of the chosen scheme at lag dt.
[[nodiscard]] inline LearningSet generate_pairs(const OdeSystem& system, StepScheme scheme,
                                                double dt, std::size_t count, std::uint64_t seed) {
  return detail::generate_with(
      system, std::string(scheme.id()), dt, count, seed,
      [&](const Vec& y1, double t0) { return scheme_step(system, scheme, y1, t0, dt); });
}

/// Evaluation set with the same sampling protocol but refined-mesh rk4
/// targets (inner step dt/substeps); tagged "reference".
[[nodiscard]] inline LearningSet generate_reference_pairs(const OdeSystem& system, double dt,
                                                          std::size_t count, std::uint64_t seed,
                                                          std::size_t substeps = 1000) {
  return detail::generate_with(
      system, "reference", dt, count, seed,
      [&](const Vec& y1, double t0) { return reference_step(system, y1, t0, dt, substeps); });
}

/// True when both sets were generated from the same inputs: equal length and
/// bit-identical y1 states (the usual precondition for error comparisons).
[[nodiscard]] inline bool same_inputs(const LearningSet& a, const LearningSet& b) {
  if (a.size() != b.size() || a.size() == 0) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a.pairs[j].y1 != b.pairs[j].y1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Serialization: CSV body plus JSON sidecar with the generation metadata.
// ---------------------------------------------------------------------------

/// "foo.csv" / "foo.json" -> "foo.meta.json"; other names get ".meta.json"
/// appended.
[[nodiscard]] inline std::string sidecar_path(const std::string& path) {
  for (const std::string_view ext : {".csv", ".json"}) {
    if (path.size() > ext.size() &&
        path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
      return path.substr(0, path.size() - ext.size()) + ".meta.json";
    }
  }
  return path + ".meta.json";
}

[[nodiscard]] inline std::string learning_set_csv(const LearningSet& set) {
  if (set.pairs.empty()) throw std::invalid_argument("learning_set_csv: empty set");
  const std::size_t n = set.dim();
  std::ostringstream out;
  out << "j";
  for (std::size_t i = 0; i < n; ++i) out << ",y1_" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",y2_" << i;
  out << ",t0\n";
  for (std::size_t j = 0; j < set.pairs.size(); ++j) {
    const auto& p = set.pairs[j];
    out << j;
    for (double v : p.y1) out << ',' << format_double(v);
    for (double v : p.y2) out << ',' << format_double(v);
    out << ',' << format_double(p.t0) << '\n';
  }
  return out.str();
}

[[nodiscard]] inline nlohmann::json learning_set_metadata(const LearningSet& set) {
  return nlohmann::json{{"system_id", set.system_id},
                        {"scheme", set.scheme},
                        {"dt", set.dt},
                        {"seed", set.seed},
                        {"J", set.size()},
                        {"dim", set.dim()}};
}

inline void write_learning_set(const LearningSet& set, const std::string& csv_path) {
  write_text_file(csv_path, learning_set_csv(set));
  write_text_file(sidecar_path(csv_path), learning_set_metadata(set).dump(2) + "\n");
}

[[nodiscard]] inline LearningSet read_learning_set(const std::string& csv_path) {
  const CsvTable table = read_csv(csv_path);
  std::ifstream meta_in(sidecar_path(csv_path));
  if (!meta_in) throw std::runtime_error("missing sidecar for " + csv_path);
  const auto meta = nlohmann::json::parse(meta_in);

  LearningSet set;
  set.system_id = meta.at("system_id").get<std::string>();
  set.scheme = meta.at("scheme").get<std::string>();
  set.dt = meta.at("dt").get<double>();
  set.seed = meta.at("seed").get<std::uint64_t>();
  const auto n = meta.at("dim").get<std::size_t>();

  if (table.header.size() != 2 + 2 * n) {
    throw std::runtime_error("learning set csv/sidecar dim mismatch in " + csv_path);
  }
  for (const auto& row : table.rows) {
    DataPair pair;
    pair.y1.resize(n);
    pair.y2.resize(n);
    for (std::size_t i = 0; i < n; ++i) pair.y1[i] = parse_double(row[1 + i]);
    for (std::size_t i = 0; i < n; ++i) pair.y2[i] = parse_double(row[1 + n + i]);
    pair.t0 = parse_double(row[1 + 2 * n]);
    set.pairs.push_back(std::move(pair));
  }
  if (set.pairs.size() != meta.at("J").get<std::size_t>()) {
    throw std::runtime_error("learning set row count disagrees with sidecar in " + csv_path);
  }
  return set;
}

}  // namespace flowmap
