#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flowmap/errors.hpp"
#include "flowmap/vec.hpp"

namespace flowmap {

/// Region initial states are drawn from: an axis-aligned box, or a disk
/// (2-D only; membership is the closed inequality).
class Domain {
 public:
  enum class Kind { box, disk };

  struct Interval {
    double lo;
    double hi;
  };

  [[nodiscard]] static Domain box(std::vector<Interval> intervals) {
    if (intervals.empty()) throw std::invalid_argument("Domain: box needs at least one interval");
    for (const auto& iv : intervals) {
      if (!(iv.lo <= iv.hi)) throw std::invalid_argument("Domain: interval with lo > hi");
    }
    Domain d;
    d.kind_ = Kind::box;
    d.intervals_ = std::move(intervals);
    return d;
  }

  [[nodiscard]] static Domain disk(double cx, double cy, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("Domain: disk radius must be positive");
    Domain d;
    d.kind_ = Kind::disk;
    d.center_ = {cx, cy};
    d.radius_ = radius;
    return d;
  }

  [[nodiscard]] Kind kind() const { return kind_; }

  [[nodiscard]] std::size_t dim() const {
    return kind_ == Kind::box ? intervals_.size() : 2;
  }

  [[nodiscard]] const std::vector<Interval>& intervals() const {
    if (kind_ != Kind::box) throw std::logic_error("Domain: not a box");
    return intervals_;
  }

  [[nodiscard]] std::pair<double, double> center() const {
    if (kind_ != Kind::disk) throw std::logic_error("Domain: not a disk");
    return center_;
  }

  [[nodiscard]] double radius() const {
    if (kind_ != Kind::disk) throw std::logic_error("Domain: not a disk");
    return radius_;
  }

  /// Tightest axis-aligned box covering the domain; the disk sampler
  /// rejection-samples from this.
  [[nodiscard]] std::vector<Interval> bounding_box() const {
    if (kind_ == Kind::box) return intervals_;
    return {{center_.first - radius_, center_.first + radius_},
            {center_.second - radius_, center_.second + radius_}};
  }

  [[nodiscard]] bool contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    if (kind_ == Kind::box) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < intervals_[i].lo || x[i] > intervals_[i].hi) return false;
      }
      return true;
    }
    const double dx = x[0] - center_.first;
    const double dy = x[1] - center_.second;
    return dx * dx + dy * dy <= radius_ * radius_;
  }

  /// Box with every interval divided by `factor` (> 0).
  [[nodiscard]] Domain scaled(double factor) const {
    if (kind_ == Kind::box) {
      std::vector<Interval> scaled_ivs;
      scaled_ivs.reserve(intervals_.size());
      for (const auto& iv : intervals_) {
        scaled_ivs.push_back({iv.lo / factor, iv.hi / factor});
      }
      return box(std::move(scaled_ivs));
    }
    return disk(center_.first / factor, center_.second / factor, radius_ / factor);
  }

 private:
  Domain() = default;

  Kind kind_ = Kind::box;
  std::vector<Interval> intervals_;
  std::pair<double, double> center_{0.0, 0.0};
  double radius_ = 0.0;
};

/// Right-hand side evaluator: writes dx/dt into `out` (size == dim).
using RhsFn = std::function<void(std::span<const double> x, double t, std::span<double> out)>;

/// A named dynamical system dx/dt = F(x, t) together with its domain of
/// interest and default time lag. Values are immutable after construction
/// and safe to evaluate concurrently.
class OdeSystem {
 public:
  OdeSystem(std::string name, std::size_t dim, RhsFn rhs, Domain domain, double default_dt,
            bool is_autonomous = true)
      : name_(std::move(name)),
        dim_(dim),
        rhs_(std::move(rhs)),
        domain_(std::move(domain)),
        default_dt_(default_dt),
        is_autonomous_(is_autonomous) {
    if (dim_ == 0) throw std::invalid_argument("OdeSystem: dim must be positive");
    if (!(default_dt_ > 0.0)) throw std::invalid_argument("OdeSystem: default_dt must be positive");
    if (domain_.dim() != dim_) throw std::invalid_argument("OdeSystem: domain/dim mismatch");
    if (!rhs_) throw std::invalid_argument("OdeSystem: missing rhs");
  }

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] const Domain& domain() const { return domain_; }
  [[nodiscard]] double default_dt() const { return default_dt_; }
  [[nodiscard]] bool is_autonomous() const { return is_autonomous_; }

  /// True when the last state coordinate is an appended time variable
  /// (result of autonomize); data generation then reads t0 off the state.
  [[nodiscard]] bool has_time_coordinate() const { return has_time_coordinate_; }

  /// Multiply states of this system by this factor to recover the
  /// coordinates of the system it was scaled from (1 when unscaled).
  [[nodiscard]] double scale_to_raw() const { return scale_to_raw_; }

  /// Time range of interest; required for autonomization of
  /// non-autonomous systems.
  [[nodiscard]] const std::optional<Domain::Interval>& time_interval() const {
    return time_interval_;
  }

  void eval_into(std::span<const double> x, double t, std::span<double> out) const {
    rhs_(x, t, out);
  }

  [[nodiscard]] Vec eval(std::span<const double> x, double t) const {
    Vec out(dim_);
    rhs_(x, t, out);
    return out;
  }

  [[nodiscard]] OdeSystem with_time_interval(double lo, double hi) const {
    if (!(lo <= hi)) throw std::invalid_argument("OdeSystem: bad time interval");
    OdeSystem s = *this;
    s.time_interval_ = Domain::Interval{lo, hi};
    return s;
  }

  [[nodiscard]] OdeSystem with_name(std::string name) const {
    OdeSystem s = *this;
    s.name_ = std::move(name);
    return s;
  }

  friend OdeSystem autonomize(const OdeSystem& system);
  friend OdeSystem scale_system(const OdeSystem& system, double factor);

 private:
  std::string name_;
  std::size_t dim_;
  RhsFn rhs_;
  Domain domain_;
  double default_dt_;
  bool is_autonomous_;
  bool has_time_coordinate_ = false;
  double scale_to_raw_ = 1.0;
  std::optional<Domain::Interval> time_interval_;
};

/// Rewrites a non-autonomous system as an autonomous one by appending the
/// time variable as an extra state coordinate with unit derivative. The
/// domain gains the system's time interval of interest as its last axis.
[[nodiscard]] inline OdeSystem autonomize(const OdeSystem& system) {
  if (system.is_autonomous()) {
    throw std::invalid_argument("autonomize: system is already autonomous");
  }
  if (!system.time_interval()) {
    throw std::invalid_argument("autonomize: system has no time interval of interest");
  }
  if (system.domain().kind() != Domain::Kind::box) {
    throw std::invalid_argument("autonomize: only box domains can be extended");
  }

  const std::size_t n = system.dim();
  RhsFn base = system.rhs_;
  RhsFn augmented = [base, n](std::span<const double> x, double /*t*/, std::span<double> out) {
    base(x.first(n), x[n], out.first(n));
    out[n] = 1.0;
  };

  auto intervals = system.domain().intervals();
  intervals.push_back(*system.time_interval());

  OdeSystem result(system.name() + "_aut", n + 1, std::move(augmented),
                   Domain::box(std::move(intervals)), system.default_dt(),
                   /*is_autonomous=*/true);
  result.has_time_coordinate_ = true;
  return result;
}

/// Change of variables u = x / factor: rhs_u(u, t) = rhs(factor*u, t) / factor,
/// domain shrunk by the same factor. Trajectories of the result, multiplied
/// by factor, coincide with trajectories of the original.
[[nodiscard]] inline OdeSystem scale_system(const OdeSystem& system, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("scale_system: factor must be positive");
  if (system.has_time_coordinate()) {
    throw std::invalid_argument("scale_system: cannot scale a time-augmented system");
  }

  const std::size_t n = system.dim();
  RhsFn base = system.rhs_;
  RhsFn scaled = [base, factor, n](std::span<const double> u, double t, std::span<double> out) {
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = factor * u[i];
    base(x, t, out);
    for (std::size_t i = 0; i < n; ++i) out[i] /= factor;
  };

  OdeSystem result(system.name() + "_scaled", n, std::move(scaled),
                   system.domain().scaled(factor), system.default_dt(), system.is_autonomous());
  result.scale_to_raw_ = system.scale_to_raw_ * factor;
  result.time_interval_ = system.time_interval_;
  return result;
}

}  // namespace flowmap
