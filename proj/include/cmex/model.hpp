#pragma once

// Reaction networks with generalized mass-action propensities:
//   a_r(x) = rate_r * prod_i C(x_i, m_i)
// Rates are effective constants (buffered-species populations already
// folded in). Counts are molecule numbers, caps are per-species maxima
// used by the truncated state space.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cmex {

using State = std::vector<int>;

struct PropensityTerm {
  int species = 0;       // 0-based species index
  int multiplicity = 1;  // m >= 1; the term contributes C(x_species, m)
};

struct PropensitySpec {
  double rate = 0.0;  // per time unit, >= 0
  std::vector<PropensityTerm> orders;
};

struct InitialCondition {
  State state;
  double time = 0.0;
};

/// Exact binomial coefficient C(n, k) for small k; 0 when n < k or n < 0.
inline std::uint64_t binomial_count(int n, int k) {
  if (n < k || n < 0) return 0;
  std::uint64_t c = 1;
  for (int j = 1; j <= k; ++j) {
    // (n-k+j) and the running product keep c integral at every step
    c = c * static_cast<std::uint64_t>(n - k + j) / static_cast<std::uint64_t>(j);
  }
  return c;
}

class ReactionModel {
 public:
  ReactionModel(std::vector<std::string> species_names, std::vector<int> caps,
                std::vector<std::vector<int>> stoich_columns,
                std::vector<PropensitySpec> propensities)
      : species_names_(std::move(species_names)),
        caps_(std::move(caps)),
        stoich_(std::move(stoich_columns)),
        propensities_(std::move(propensities)) {
    const std::size_t n = species_names_.size();
    if (n == 0) throw std::invalid_argument("model: needs at least one species");
    if (caps_.size() != n) throw std::invalid_argument("model: caps/species size mismatch");
    for (int c : caps_)
      if (c < 0) throw std::invalid_argument("model: negative species cap");
    if (stoich_.empty()) throw std::invalid_argument("model: needs at least one reaction");
    if (stoich_.size() != propensities_.size())
      throw std::invalid_argument("model: stoichiometry/propensity count mismatch");
    for (const auto& col : stoich_) {
      if (col.size() != n) throw std::invalid_argument("model: stoichiometry column has wrong length");
      bool nonzero = false;
      for (int v : col) nonzero = nonzero || v != 0;
      if (!nonzero) throw std::invalid_argument("model: stoichiometry column is all zero");
    }
    for (const auto& spec : propensities_) {
      if (!(spec.rate >= 0.0) || !std::isfinite(spec.rate))
        throw std::invalid_argument("model: propensity rate must be finite and nonnegative");
      for (const auto& term : spec.orders) {
        if (term.species < 0 || term.species >= static_cast<int>(n))
          throw std::invalid_argument("model: propensity references unknown species");
        if (term.multiplicity < 1)
          throw std::invalid_argument("model: propensity multiplicity must be >= 1");
      }
    }
  }

  int num_species() const { return static_cast<int>(species_names_.size()); }
  int num_reactions() const { return static_cast<int>(stoich_.size()); }

  const std::vector<std::string>& species_names() const { return species_names_; }
  const std::vector<int>& caps() const { return caps_; }
  const std::vector<int>& stoich_column(int r) const { return stoich_.at(check_reaction(r)); }
  const std::vector<std::vector<int>>& stoich() const { return stoich_; }
  const PropensitySpec& propensity_spec(int r) const { return propensities_.at(check_reaction(r)); }
  const std::vector<PropensitySpec>& propensity_specs() const { return propensities_; }

  /// a_r(x) = rate * prod C(x_i, m_i). Combinatorics are exact integers
  /// before the floating multiply; zero whenever a reactant is short.
  double propensity(int r, std::span<const int> x) const {
    const PropensitySpec& spec = propensities_[check_reaction(r)];
    double combinations = 1.0;
    for (const auto& term : spec.orders) {
      const std::uint64_t c = binomial_count(x[term.species], term.multiplicity);
      if (c == 0) return 0.0;
      combinations *= static_cast<double>(c);
    }
    return spec.rate * combinations;
  }

  /// a_0(x) = sum over channels.
  double total_propensity(std::span<const int> x) const {
    double a0 = 0.0;
    for (int r = 0; r < num_reactions(); ++r) a0 += propensity(r, x);
    return a0;
  }

  void propensities_into(std::span<const int> x, std::span<double> out) const {
    for (int r = 0; r < num_reactions(); ++r) out[r] = propensity(r, x);
  }

 private:
  int check_reaction(int r) const {
    if (r < 0 || r >= num_reactions()) throw std::out_of_range("model: reaction index out of range");
    return r;
  }

  std::vector<std::string> species_names_;
  std::vector<int> caps_;
  std::vector<std::vector<int>> stoich_;  // column r = state change of reaction r
  std::vector<PropensitySpec> propensities_;
};

struct BuiltinSystem {
  ReactionModel model;
  InitialCondition init;
  double horizon = 0.0;
};

/// Reversible isomerization X1 <-> X2: c1 = c2 = 10, x(0) = (40,40),
/// caps (80,80), horizon 10.
inline BuiltinSystem builtin_isomer() {
  const double c1 = 10.0, c2 = 10.0;
  ReactionModel model({"X1", "X2"}, {80, 80},
                      {{-1, 1}, {1, -1}},
                      {PropensitySpec{c1, {{0, 1}}}, PropensitySpec{c2, {{1, 1}}}});
  return BuiltinSystem{std::move(model), InitialCondition{{40, 40}, 0.0}, 10.0};
}

/// Schlogl system (single species, buffered B1/B2 folded into rates):
///   a1 = (c1/2) N1 x(x-1) = (c1 N1) C(x,2)
///   a2 = (c2/6) x(x-1)(x-2) = c2 C(x,3)
///   a3 = c3 N2
///   a4 = c4 x
/// x(0) = 250, cap 900, horizon 4.
inline BuiltinSystem builtin_schlogl() {
  const double c1 = 3.0e-7, c2 = 1.0e-4, c3 = 1.0e-3, c4 = 3.5;
  const double buffer1 = 1.0e5, buffer2 = 2.0e5;
  ReactionModel model({"X"}, {900},
                      {{1}, {-1}, {1}, {-1}},
                      {PropensitySpec{c1 * buffer1, {{0, 2}}},
                       PropensitySpec{c2, {{0, 3}}},
                       PropensitySpec{c3 * buffer2, {}},
                       PropensitySpec{c4, {{0, 1}}}});
  return BuiltinSystem{std::move(model), InitialCondition{{250}, 0.0}, 4.0};
}

}  // namespace cmex
