#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmex/statespace.hpp"

namespace cmex {

/// Dense probability density over the linear state space, with tracked mass.
/// Tiny negative components (rounding debris) are clamped on construction;
/// anything below the clamp floor is a numerical failure upstream.
class ProbabilityVector {
 public:
  static constexpr double kConstructClamp = 1e-14;

  ProbabilityVector() = default;

  explicit ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {
    for (double& v : values_) {
      if (v < 0.0) {
        if (v < -kConstructClamp) throw std::invalid_argument("probability: negative component");
        v = 0.0;
      }
    }
    recompute_mass();
  }

  static ProbabilityVector delta(const StateSpace& space, std::span<const int> x) {
    std::vector<double> v(static_cast<std::size_t>(space.size()), 0.0);
    v[static_cast<std::size_t>(space.index_of(x) - 1)] = 1.0;
    return ProbabilityVector(std::move(v));
  }

  static ProbabilityVector zeros(std::int64_t dim) {
    return ProbabilityVector(std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  }

  std::int64_t dim() const { return static_cast<std::int64_t>(values_.size()); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }

  double operator[](std::int64_t i) const { return values_[static_cast<std::size_t>(i)]; }

  double mass() const { return mass_; }

  void recompute_mass() { mass_ = std::accumulate(values_.begin(), values_.end(), 0.0); }

  /// Clamp components in [-floor, 0) to zero, returning the clamped mass;
  /// throws if any component is below -floor. The running total is kept as
  /// a diagnostic on the vector.
  double clamp_negatives(double floor) {
    double clamped = 0.0;
    for (double& v : values_) {
      if (v < 0.0) {
        if (v < -floor) throw std::runtime_error("probability: component below clamp floor");
        clamped -= v;
        v = 0.0;
      }
    }
    clamped_total_ += clamped;
    recompute_mass();
    return clamped;
  }

  double clamped_mass() const { return clamped_total_; }

  /// Index (0-based) of the largest component; lowest index wins ties.
  std::int64_t argmax() const {
    std::int64_t best = 0;
    for (std::int64_t i = 1; i < dim(); ++i)
      if (values_[static_cast<std::size_t>(i)] > values_[static_cast<std::size_t>(best)]) best = i;
    return best;
  }

 private:
  std::vector<double> values_;
  double mass_ = 0.0;
  double clamped_total_ = 0.0;
};

/// Uniform substep plan T = n * tau.
struct StepPlan {
  double tau = 0.0;
  std::int64_t n = 0;
  double horizon = 0.0;

  StepPlan(double tau_, std::int64_t n_) : tau(tau_), n(n_), horizon(tau_ * static_cast<double>(n_)) {
    if (!(tau > 0.0) || n < 1) throw std::invalid_argument("step plan: need tau > 0 and n >= 1");
  }

  /// Split horizon into round(T/tau) steps; tau must divide T to 1e-12 relative.
  static StepPlan from_horizon(double horizon, double tau) {
    if (!(tau > 0.0) || !(horizon > 0.0))
      throw std::invalid_argument("step plan: need positive tau and horizon");
    const double ratio = horizon / tau;
    const std::int64_t n = static_cast<std::int64_t>(std::llround(ratio));
    if (n < 1 || std::abs(static_cast<double>(n) * tau - horizon) > 1e-12 * std::max(1.0, std::abs(horizon)))
      throw std::invalid_argument("step plan: tau does not divide the horizon");
    return StepPlan(tau, n);
  }
};

}  // namespace cmex
