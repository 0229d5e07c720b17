#pragma once

// Trajectory-level Monte Carlo: Gillespie SSA, explicit tau-leap, and the
// accelerated tau-leap family (sequential, half-split, symmetric), plus
// seeded ensembles with deterministic parallel aggregation.
//
// Negative-population policy: offending components are clamped to zero and
// counted, never aborted on. Upper caps do not constrain the dynamics; they
// only clip final states into the histogram box (also counted).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cmex/model.hpp"
#include "cmex/rng.hpp"
#include "cmex/statespace.hpp"

namespace cmex {

struct TrajectoryResult {
  State final_state;
  std::uint64_t steps_taken = 0;
  std::uint64_t boundary_clamps = 0;
  double wall_time = 0.0;  // seconds; informational, outside the determinism contract
};

struct EnsembleDiagnostics {
  std::uint64_t negative_clamps = 0;  // components clamped to 0 during dynamics
  std::uint64_t cap_clips = 0;        // components clipped to the cap at histogram time
};

struct EnsembleResult {
  std::map<std::int64_t, std::uint64_t> histogram;  // 1-based state index -> count
  std::uint64_t n_samples = 0;
  std::string method;
  double tau = 0.0;
  double horizon = 0.0;
  std::uint64_t master_seed = 0;
  std::vector<int> caps;
  EnsembleDiagnostics diagnostics;
  std::uint64_t total_steps = 0;
};

enum class SampleMethod { ssa, tau_leap, accelerated, accelerated_split, symmetric };

inline const char* method_name(SampleMethod m) {
  switch (m) {
    case SampleMethod::ssa: return "ssa";
    case SampleMethod::tau_leap: return "tau-leap";
    case SampleMethod::accelerated: return "accelerated";
    case SampleMethod::accelerated_split: return "accelerated-split";
    case SampleMethod::symmetric: return "symmetric";
  }
  return "?";
}

namespace detail {

inline std::uint64_t clamp_negative(State& x) {
  std::uint64_t clamps = 0;
  for (int& c : x)
    if (c < 0) {
      c = 0;
      ++clamps;
    }
  return clamps;
}

inline void apply_firings(State& x, const std::vector<int>& column, std::int64_t k) {
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] += column[i] * static_cast<int>(k);
}

}  // namespace detail

/// One Gillespie event. Advances t past T (without firing) when the waiting
/// time overshoots, or freezes at T when no reaction can fire. Returns true
/// iff a reaction fired. Consumes two uniforms per fired event.
inline bool ssa_step(const ReactionModel& model, State& x, double& t, double horizon,
                     RngStream& rng, std::vector<double>& propensity_buf) {
  const int m = model.num_reactions();
  propensity_buf.resize(static_cast<std::size_t>(m));
  model.propensities_into(x, propensity_buf);
  double a0 = 0.0;
  for (double a : propensity_buf) a0 += a;
  if (a0 <= 0.0) {
    t = horizon;
    return false;
  }
  const double dt = rng.exponential(a0);
  if (t + dt > horizon) {
    t = horizon;
    return false;
  }
  t += dt;
  const double target = rng.uniform() * a0;
  double cum = 0.0;
  int chosen = m - 1;
  for (int r = 0; r < m; ++r) {
    cum += propensity_buf[static_cast<std::size_t>(r)];
    if (target < cum) {
      chosen = r;
      break;
    }
  }
  detail::apply_firings(x, model.stoich_column(chosen), 1);
  return true;
}

inline TrajectoryResult ssa_run(const ReactionModel& model, const State& x0, double horizon,
                                RngStream& rng) {
  const auto start = std::chrono::steady_clock::now();
  TrajectoryResult out;
  out.final_state = x0;
  double t = 0.0;
  std::vector<double> buf;
  while (t < horizon) {
    if (ssa_step(model, out.final_state, t, horizon, rng, buf)) ++out.steps_taken;
    out.boundary_clamps += detail::clamp_negative(out.final_state);
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// One explicit tau-leap: every channel draws K_r ~ Poisson(a_r(x) tau) from
/// the same pre-leap state, then the combined update is applied.
inline std::uint64_t tau_leap_step(const ReactionModel& model, State& x, double tau,
                                   RngStream& rng, std::vector<double>& propensity_buf) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau-leap: need tau > 0");
  const int m = model.num_reactions();
  propensity_buf.resize(static_cast<std::size_t>(m));
  model.propensities_into(x, propensity_buf);
  for (int r = 0; r < m; ++r) {
    const std::int64_t k = sample_poisson(rng, propensity_buf[static_cast<std::size_t>(r)] * tau);
    if (k != 0) detail::apply_firings(x, model.stoich_column(r), k);
  }
  return detail::clamp_negative(x);
}

/// Accelerated tau-leap step: channels fire sequentially r = M..1, each with
/// its propensity re-evaluated at the current intermediate state.
inline std::uint64_t accelerated_step(const ReactionModel& model, State& x, double tau,
                                      RngStream& rng) {
  if (!(tau > 0.0)) throw std::invalid_argument("accelerated: need tau > 0");
  std::uint64_t clamps = 0;
  for (int r = model.num_reactions() - 1; r >= 0; --r) {
    const std::int64_t k = sample_poisson(rng, model.propensity(r, x) * tau);
    if (k != 0) detail::apply_firings(x, model.stoich_column(r), k);
    clamps += detail::clamp_negative(x);
  }
  return clamps;
}

/// Half-split accelerated step: the first block r = M..ceil(M/2) fires with
/// propensities frozen at the step's start state; the second block
/// r = ceil(M/2)-1..1 fires with propensities frozen at the state reached
/// after the first block. Falls back to the plain accelerated step for M < 2.
inline std::uint64_t accelerated_half_split_step(const ReactionModel& model, State& x, double tau,
                                                 RngStream& rng) {
  if (!(tau > 0.0)) throw std::invalid_argument("accelerated-split: need tau > 0");
  const int m = model.num_reactions();
  if (m < 2) return accelerated_step(model, x, tau, rng);
  const int split = (m + 1) / 2;  // ceil(M/2), 1-based
  std::uint64_t clamps = 0;
  State frozen = x;
  for (int r = m; r >= split; --r) {
    const std::int64_t k = sample_poisson(rng, model.propensity(r - 1, frozen) * tau);
    if (k != 0) detail::apply_firings(x, model.stoich_column(r - 1), k);
    clamps += detail::clamp_negative(x);
  }
  frozen = x;
  for (int r = split - 1; r >= 1; --r) {
    const std::int64_t k = sample_poisson(rng, model.propensity(r - 1, frozen) * tau);
    if (k != 0) detail::apply_firings(x, model.stoich_column(r - 1), k);
    clamps += detail::clamp_negative(x);
  }
  return clamps;
}

/// Symmetric accelerated step: palindromic half-leap sweeps, reverse order
/// r = M..1 then forward order r = 1..M, every Poisson mean taken as
/// a_r(current state) * tau/2.
inline std::uint64_t symmetric_accelerated_step(const ReactionModel& model, State& x, double tau,
                                                RngStream& rng) {
  if (!(tau > 0.0)) throw std::invalid_argument("symmetric: need tau > 0");
  const double half = tau / 2.0;
  std::uint64_t clamps = 0;
  for (int r = model.num_reactions() - 1; r >= 0; --r) {
    const std::int64_t k = sample_poisson(rng, model.propensity(r, x) * half);
    if (k != 0) detail::apply_firings(x, model.stoich_column(r), k);
    clamps += detail::clamp_negative(x);
  }
  for (int r = 0; r < model.num_reactions(); ++r) {
    const std::int64_t k = sample_poisson(rng, model.propensity(r, x) * half);
    if (k != 0) detail::apply_firings(x, model.stoich_column(r), k);
    clamps += detail::clamp_negative(x);
  }
  return clamps;
}

namespace detail {

template <typename StepFn>
TrajectoryResult leap_run(const State& x0, double horizon, double tau, StepFn&& step) {
  if (!(tau > 0.0)) throw std::invalid_argument("leap run: need tau > 0");
  const auto start = std::chrono::steady_clock::now();
  TrajectoryResult out;
  out.final_state = x0;
  double t = 0.0;
  // trailing partial step when tau does not divide the horizon
  while (t < horizon * (1.0 - 1e-12)) {
    const double dt = std::min(tau, horizon - t);
    out.boundary_clamps += step(out.final_state, dt);
    t += dt;
    ++out.steps_taken;
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace detail

inline TrajectoryResult tau_leap_run(const ReactionModel& model, const State& x0, double horizon,
                                     double tau, RngStream& rng) {
  std::vector<double> buf;
  return detail::leap_run(x0, horizon, tau, [&](State& x, double dt) {
    return tau_leap_step(model, x, dt, rng, buf);
  });
}

inline TrajectoryResult accelerated_run(const ReactionModel& model, const State& x0,
                                        double horizon, double tau, RngStream& rng) {
  return detail::leap_run(x0, horizon, tau, [&](State& x, double dt) {
    return accelerated_step(model, x, dt, rng);
  });
}

inline TrajectoryResult accelerated_half_split_run(const ReactionModel& model, const State& x0,
                                                   double horizon, double tau, RngStream& rng) {
  return detail::leap_run(x0, horizon, tau, [&](State& x, double dt) {
    return accelerated_half_split_step(model, x, dt, rng);
  });
}

inline TrajectoryResult symmetric_accelerated_run(const ReactionModel& model, const State& x0,
                                                  double horizon, double tau, RngStream& rng) {
  return detail::leap_run(x0, horizon, tau, [&](State& x, double dt) {
    return symmetric_accelerated_step(model, x, dt, rng);
  });
}

inline TrajectoryResult run_trajectory(SampleMethod method, const ReactionModel& model,
                                       const State& x0, double horizon, double tau,
                                       RngStream& rng) {
  switch (method) {
    case SampleMethod::ssa: return ssa_run(model, x0, horizon, rng);
    case SampleMethod::tau_leap: return tau_leap_run(model, x0, horizon, tau, rng);
    case SampleMethod::accelerated: return accelerated_run(model, x0, horizon, tau, rng);
    case SampleMethod::accelerated_split:
      return accelerated_half_split_run(model, x0, horizon, tau, rng);
    case SampleMethod::symmetric: return symmetric_accelerated_run(model, x0, horizon, tau, rng);
  }
  throw std::logic_error("run_trajectory: unknown method");
}

inline unsigned ensemble_thread_count(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CMEX_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// n_samples independent trajectories on streams (master_seed, 0..n-1),
/// histogrammed by final-state index. The result is identical for any
/// worker count: streams are tied to the trajectory id and the aggregation
/// is a plain integer sum.
inline EnsembleResult run_ensemble(SampleMethod method, const ReactionModel& model,
                                   const State& x0, double horizon, double tau,
                                   std::uint64_t n_samples, std::uint64_t master_seed,
                                   unsigned n_threads = 0) {
  if (n_samples == 0) throw std::invalid_argument("ensemble: need at least one sample");
  if (method != SampleMethod::ssa && !(tau > 0.0))
    throw std::invalid_argument("ensemble: this method needs tau > 0");

  const StateSpace space(model.caps());
  EnsembleResult out;
  out.n_samples = n_samples;
  out.method = method_name(method);
  out.tau = method == SampleMethod::ssa ? 0.0 : tau;
  out.horizon = horizon;
  out.master_seed = master_seed;
  out.caps = model.caps();

  struct Partial {
    std::map<std::int64_t, std::uint64_t> histogram;
    EnsembleDiagnostics diagnostics;
    std::uint64_t steps = 0;
  };

  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(ensemble_thread_count(n_threads), n_samples));
  std::vector<Partial> partials(workers);

  auto worker_body = [&](unsigned w) {
    Partial& part = partials[w];
    for (std::uint64_t id = w; id < n_samples; id += workers) {
      RngStream rng(master_seed, id);
      TrajectoryResult traj = run_trajectory(method, model, x0, horizon, tau, rng);
      part.diagnostics.negative_clamps += traj.boundary_clamps;
      part.steps += traj.steps_taken;
      State clipped = traj.final_state;
      for (std::size_t i = 0; i < clipped.size(); ++i) {
        if (clipped[i] > model.caps()[i]) {
          clipped[i] = model.caps()[i];
          ++part.diagnostics.cap_clips;
        }
      }
      ++part.histogram[space.index_of(clipped)];
    }
  };

  if (workers == 1) {
    worker_body(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker_body, w);
    for (auto& th : pool) th.join();
  }

  for (const Partial& part : partials) {
    for (const auto& [idx, count] : part.histogram) out.histogram[idx] += count;
    out.diagnostics.negative_clamps += part.diagnostics.negative_clamps;
    out.diagnostics.cap_clips += part.diagnostics.cap_clips;
    out.total_steps += part.steps;
  }
  return out;
}

}  // namespace cmex
