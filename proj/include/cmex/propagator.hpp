#pragma once

// Probability-density propagation: the exact matrix-exponential action via
// uniformization plus the approximate splitting schemes (frozen sum, Lie
// product, Strang, column-based, per-reaction product).

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmex/generator.hpp"
#include "cmex/model.hpp"
#include "cmex/probability.hpp"
#include "cmex/statespace.hpp"

namespace cmex {

/// exp(tA) * p by uniformization: with lambda = max_j(-A_jj) the matrix
/// P = I + A/lambda is entrywise nonnegative with column sums <= 1, and
///   exp(tA) = e^{-lambda t} sum_k (lambda t)^k / k! * P^k.
/// The Poisson series is truncated once its tail drops below tol; t is cut
/// into substeps whenever lambda*t exceeds 500. Nonnegativity and (for a
/// proper generator) mass are preserved by construction.
inline ProbabilityVector expmv(const Generator& a, const ProbabilityVector& p, double t,
                               double tol = 1e-12) {
  if (a.dim() != p.dim()) throw std::invalid_argument("expmv: dimension mismatch");
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("expmv: need finite t >= 0");
  if (a.worst_positive_column_sum() > 1e-9)
    throw std::runtime_error("expmv: operator has a positive column sum; not a (sub)generator");

  const double lambda = a.max_exit_rate();
  if (t == 0.0 || lambda == 0.0) return p;

  const auto nsub = static_cast<std::int64_t>(std::ceil(lambda * t / 500.0));
  const double tau = t / static_cast<double>(nsub);
  const double rho = lambda * tau;
  const double tail_tol = tol / static_cast<double>(nsub);

  const std::size_t n = static_cast<std::size_t>(a.dim());
  std::vector<double> v = p.values();
  std::vector<double> av(n), acc(n);

  const auto k_limit =
      static_cast<std::int64_t>(std::ceil(rho + 12.0 * std::sqrt(rho + 1.0) + 80.0));

  for (std::int64_t s = 0; s < nsub; ++s) {
    double w = std::exp(-rho);
    double cum = w;
    for (std::size_t i = 0; i < n; ++i) acc[i] = w * v[i];
    for (std::int64_t k = 1; k <= k_limit && 1.0 - cum > tail_tol; ++k) {
      a.apply(v, av);
      for (std::size_t i = 0; i < n; ++i) v[i] += av[i] / lambda;  // v <- P v
      w *= rho / static_cast<double>(k);
      for (std::size_t i = 0; i < n; ++i) acc[i] += w * v[i];
      cum += w;
      if (static_cast<double>(k) > rho && w < 1e-300) break;
    }
    v = acc;
  }
  return ProbabilityVector(std::move(acc));
}

/// Eq.-(5)-style exact evolution from a point mass.
inline ProbabilityVector exact_solution(const ReactionModel& model, const StateSpace& space,
                                        std::span<const int> x0, double horizon,
                                        double tol = 1e-12) {
  const Generator a = assemble_generator(model, space);
  ProbabilityVector out = expmv(a, ProbabilityVector::delta(space, x0), horizon, tol);
  if (std::abs(out.mass() - 1.0) > 1e-10)
    throw std::runtime_error("exact_solution: probability mass not conserved");
  return out;
}

/// Single exponential of the frozen sum, all propensities pinned at x0.
/// The frozen operator is substochastic on the truncated box, so mass may
/// legitimately decay; callers compare after normalization.
inline ProbabilityVector frozen_sum_solution(const ReactionModel& model, const StateSpace& space,
                                             std::span<const int> x0, double horizon,
                                             double tol = 1e-12) {
  const Generator abar = assemble_frozen_sum(model, space, x0);
  return expmv(abar, ProbabilityVector::delta(space, x0), horizon, tol);
}

namespace detail {

// One frozen channel Abar_r = a_r(xbar) * T_r where T_r is the 0/1 pattern of
// in-box firings at index offset d_r. T_r is nilpotent (repeated firing exits
// the box), so exp(c T_r) is a finite series sum_k c^k/k! T_r^k.
struct FrozenChannel {
  std::int64_t offset = 0;
  double rate = 0.0;
  std::vector<std::uint8_t> valid;  // per column: x_j + v_r stays in the box
};

struct FrozenDecomposition {
  double exit_rate = 0.0;  // a_0(xbar)
  std::vector<FrozenChannel> channels;
};

inline FrozenDecomposition build_frozen_channels(const ReactionModel& model,
                                                 const StateSpace& space,
                                                 std::span<const int> xbar) {
  require_match(model, space);
  if (!space.in_bounds(xbar)) throw std::out_of_range("propagator: frozen state outside the box");
  const ReactionOffset offs = reaction_offsets(space, model);
  FrozenDecomposition out;
  out.exit_rate = model.total_propensity(xbar);
  out.channels.resize(static_cast<std::size_t>(model.num_reactions()));
  for (int r = 0; r < model.num_reactions(); ++r) {
    auto& ch = out.channels[static_cast<std::size_t>(r)];
    ch.offset = offs.d[static_cast<std::size_t>(r)];
    ch.rate = model.propensity(r, xbar);
    ch.valid.assign(static_cast<std::size_t>(space.size()), 0);
  }
  sweep_columns(model, space, [&](std::int64_t j, int r, bool inside, double) {
    out.channels[static_cast<std::size_t>(r)].valid[static_cast<std::size_t>(j)] =
        inside ? 1 : 0;
  });
  return out;
}

// y <- T p restricted to valid source columns; y must be zeroed by caller.
inline void apply_shift(const FrozenChannel& ch, std::span<const double> p, std::span<double> y) {
  const std::int64_t n = static_cast<std::int64_t>(p.size());
  for (std::int64_t j = 0; j < n; ++j) {
    if (!ch.valid[static_cast<std::size_t>(j)]) continue;
    const double pj = p[static_cast<std::size_t>(j)];
    if (pj == 0.0) continue;
    y[static_cast<std::size_t>(j + ch.offset)] += pj;
  }
}

// p <- exp(c * T) p with the finite nilpotent series. Large coefficients are
// split into exact sub-applications to keep the term magnitudes in range.
inline void apply_channel_exp(const FrozenChannel& ch, double c, std::vector<double>& p,
                              std::vector<double>& term, std::vector<double>& next) {
  if (c == 0.0 || ch.rate == 0.0) return;
  const int pieces = c > 64.0 ? static_cast<int>(std::ceil(c / 64.0)) : 1;
  const double cp = c / static_cast<double>(pieces);
  const std::size_t n = p.size();
  for (int piece = 0; piece < pieces; ++piece) {
    term = p;
    double coef = 1.0;
    for (std::int64_t k = 1; k <= static_cast<std::int64_t>(n); ++k) {
      std::fill(next.begin(), next.end(), 0.0);
      apply_shift(ch, term, next);
      coef *= cp / static_cast<double>(k);
      double norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double add = coef * next[i];
        p[i] += add;
        norm += std::abs(next[i]);
      }
      if (norm == 0.0 || (static_cast<double>(k) > cp && coef * norm < 1e-18)) break;
      term.swap(next);
    }
  }
}

}  // namespace detail

/// First-order Lie product of the frozen factors, Eq.-(10) style: per substep
/// the rightmost factor exp(tau*Abar_M) acts first, exp(tau*Abar_0) last.
/// With refreeze, the freeze point is moved to the density's modal state
/// after every substep; default keeps the single x0 freeze point.
inline ProbabilityVector lie_product_solution(const ReactionModel& model, const StateSpace& space,
                                              std::span<const int> x0, const StepPlan& plan,
                                              bool refreeze = false) {
  auto frozen = detail::build_frozen_channels(model, space, x0);
  ProbabilityVector pv = ProbabilityVector::delta(space, x0);
  std::vector<double> p = pv.values();
  const std::size_t n = p.size();
  std::vector<double> term(n), next(n);
  for (std::int64_t s = 0; s < plan.n; ++s) {
    for (auto it = frozen.channels.rbegin(); it != frozen.channels.rend(); ++it)
      detail::apply_channel_exp(*it, plan.tau * it->rate, p, term, next);
    const double scale = std::exp(-plan.tau * frozen.exit_rate);
    for (double& v : p) v *= scale;
    if (refreeze && s + 1 < plan.n) {
      ProbabilityVector snapshot(p);
      frozen = detail::build_frozen_channels(model, space, space.state_of(snapshot.argmax() + 1));
      p = snapshot.values();
    }
  }
  ProbabilityVector out(std::move(p));
  out.clamp_negatives(1e-12);
  return out;
}

/// Symmetric Strang product of the frozen factors. The default gives the
/// diagonal factor its full tau weight at the center so every operator
/// receives total weight tau per substep (second order); paper_weights
/// reproduces the printed variant with exp(tau/2 * Abar_0) instead.
inline ProbabilityVector strang_solution(const ReactionModel& model, const StateSpace& space,
                                         std::span<const int> x0, const StepPlan& plan,
                                         bool paper_weights = false) {
  const auto frozen = detail::build_frozen_channels(model, space, x0);
  ProbabilityVector pv = ProbabilityVector::delta(space, x0);
  std::vector<double> p = pv.values();
  const std::size_t n = p.size();
  std::vector<double> term(n), next(n);
  const double half = plan.tau / 2.0;
  const double center = paper_weights ? half : plan.tau;
  for (std::int64_t s = 0; s < plan.n; ++s) {
    for (auto it = frozen.channels.rbegin(); it != frozen.channels.rend(); ++it)
      detail::apply_channel_exp(*it, half * it->rate, p, term, next);
    const double scale = std::exp(-center * frozen.exit_rate);
    for (double& v : p) v *= scale;
    for (const auto& ch : frozen.channels) detail::apply_channel_exp(ch, half * ch.rate, p, term, next);
  }
  ProbabilityVector out(std::move(p));
  out.clamp_negatives(1e-12);
  return out;
}

/// Column-based splitting: per substep the sweep applies the closed-form
/// factors (I + S_j tau A_j) in ascending j, with
/// S_j tau = (1 - exp(-tau a_0(x_j))) / a_0(x_j) and S_j = 1 when a_0 = 0.
/// Every factor is a convex redistribution (column sums stay 1), so the
/// scheme conserves mass exactly.
inline ProbabilityVector column_split_solution(const ReactionModel& model, const StateSpace& space,
                                               std::span<const int> x0, const StepPlan& plan) {
  const Generator a = assemble_generator(model, space);
  ProbabilityVector pv = ProbabilityVector::delta(space, x0);
  std::vector<double> p = pv.values();

  // precompute f_j = S_j * tau once; the sweep reuses it every substep
  const std::size_t n = p.size();
  std::vector<double> f(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a0 = -a.diagonal()[j];
    f[j] = a0 == 0.0 ? plan.tau : -std::expm1(-plan.tau * a0) / a0;
    assert(f[j] * a0 <= 1.0 + 1e-15);
  }

  for (std::int64_t s = 0; s < plan.n; ++s) {
    for (std::int64_t j = 0; j < a.dim(); ++j) {
      const double pj = p[static_cast<std::size_t>(j)];
      if (pj == 0.0) continue;
      const double fj = f[static_cast<std::size_t>(j)];
      a.for_column(j, [&](std::int64_t row, double val) {
        p[static_cast<std::size_t>(row)] += fj * val * pj;
      });
    }
  }
  ProbabilityVector out(std::move(p));
  out.clamp_negatives(1e-12);
  return out;
}

/// Product of per-reaction exponentials, Eq.-(13) style: exp(tau B_M) acts
/// first, exp(tau B_1) last. Each B_r is a proper generator, so the result
/// keeps unit mass.
inline ProbabilityVector reaction_product_density(const ReactionModel& model,
                                                  const StateSpace& space,
                                                  std::span<const int> x0, double tau,
                                                  double tol = 1e-12) {
  if (!(tau >= 0.0)) throw std::invalid_argument("reaction product: need tau >= 0");
  const std::vector<Generator> bs = assemble_reaction_generators(model, space);
  const double factor_tol = tol / static_cast<double>(bs.size());
  ProbabilityVector p = ProbabilityVector::delta(space, x0);
  for (auto it = bs.rbegin(); it != bs.rend(); ++it) p = expmv(*it, p, tau, factor_tol);
  if (std::abs(p.mass() - 1.0) > 1e-10)
    throw std::runtime_error("reaction product: probability mass not conserved");
  return p;
}

/// Multi-step variant used by the experiment runner: the Eq.-(13) product
/// applied on every substep of the plan.
inline ProbabilityVector reaction_product_solution(const ReactionModel& model,
                                                   const StateSpace& space,
                                                   std::span<const int> x0, const StepPlan& plan,
                                                   double tol = 1e-12) {
  const std::vector<Generator> bs = assemble_reaction_generators(model, space);
  const double factor_tol =
      tol / (static_cast<double>(plan.n) * static_cast<double>(bs.size()));
  ProbabilityVector p = ProbabilityVector::delta(space, x0);
  for (std::int64_t s = 0; s < plan.n; ++s)
    for (auto it = bs.rbegin(); it != bs.rend(); ++it) p = expmv(*it, p, plan.tau, factor_tol);
  if (std::abs(p.mass() - 1.0) > 1e-10)
    throw std::runtime_error("reaction product: probability mass not conserved");
  return p;
}

}  // namespace cmex
