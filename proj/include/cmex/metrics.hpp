#pragma once

// Distribution summaries used by the experiment runner: per-species
// marginals, total-variation / L1 distances, moments, and a simple
// bimodality detector for the Schlogl-style histograms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cmex/probability.hpp"
#include "cmex/samplers.hpp"
#include "cmex/statespace.hpp"

namespace cmex {

namespace detail {

inline std::vector<double> normalized(std::vector<double> v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("metrics: distribution has no mass");
  for (double& x : v) x /= total;
  return v;
}

}  // namespace detail

/// Marginal of species i from a joint density: sums over the other species
/// and normalizes. Result indexed by molecule count 0..cap_i.
inline std::vector<double> marginal(const ProbabilityVector& p, const StateSpace& space,
                                    int species) {
  if (species < 0 || species >= space.dims())
    throw std::out_of_range("marginal: species index out of range");
  std::vector<double> out(static_cast<std::size_t>(space.caps()[static_cast<std::size_t>(species)]) + 1,
                          0.0);
  State x(static_cast<std::size_t>(space.dims()));
  for (std::int64_t idx = 1; idx <= space.size(); ++idx) {
    const double v = p[idx - 1];
    if (v == 0.0) continue;
    space.state_into(idx, x);
    out[static_cast<std::size_t>(x[static_cast<std::size_t>(species)])] += v;
  }
  return detail::normalized(std::move(out));
}

/// Marginal of species i from an ensemble histogram.
inline std::vector<double> marginal(const EnsembleResult& ens, int species) {
  const StateSpace space(ens.caps);
  if (species < 0 || species >= space.dims())
    throw std::out_of_range("marginal: species index out of range");
  std::vector<double> out(static_cast<std::size_t>(space.caps()[static_cast<std::size_t>(species)]) + 1,
                          0.0);
  State x(static_cast<std::size_t>(space.dims()));
  for (const auto& [idx, count] : ens.histogram) {
    space.state_into(idx, x);
    out[static_cast<std::size_t>(x[static_cast<std::size_t>(species)])] +=
        static_cast<double>(count);
  }
  return detail::normalized(std::move(out));
}

/// Total variation distance 0.5 * sum |p - q| after normalizing both sides.
/// Shorter distributions are zero-padded.
inline double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  const std::vector<double> pn = detail::normalized(p);
  const std::vector<double> qn = detail::normalized(q);
  const std::size_t n = std::max(pn.size(), qn.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < pn.size() ? pn[i] : 0.0;
    const double b = i < qn.size() ? qn[i] : 0.0;
    sum += std::abs(a - b);
  }
  return 0.5 * sum;
}

/// Raw L1 distance of the vectors as given (no normalization), so mass
/// deficits stay visible.
inline double l1_distance(const std::vector<double>& p, const std::vector<double>& q) {
  const std::size_t n = std::max(p.size(), q.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    sum += std::abs(a - b);
  }
  return sum;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of a distribution over counts 0..n-1 (normalized first).
inline Moments moments(const std::vector<double>& dist) {
  const std::vector<double> p = detail::normalized(dist);
  Moments out;
  for (std::size_t k = 0; k < p.size(); ++k) out.mean += static_cast<double>(k) * p[k];
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = static_cast<double>(k) - out.mean;
    out.variance += d * d * p[k];
  }
  return out;
}

struct BimodalityReport {
  bool bimodal = false;
  std::vector<std::size_t> modes;  // positions of the two dominant peaks when bimodal
};

/// Two separated local maxima whose shared valley drops below the smaller
/// peak by more than prominence_frac of the global peak.
inline BimodalityReport detect_bimodality(const std::vector<double>& dist,
                                          double prominence_frac = 0.10) {
  const std::vector<double> p = detail::normalized(dist);
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double left = i == 0 ? -1.0 : p[i - 1];
    const double right = i + 1 == p.size() ? -1.0 : p[i + 1];
    if (p[i] > left && p[i] >= right && p[i] > 0.0) peaks.push_back(i);
  }
  BimodalityReport out;
  if (peaks.size() < 2) {
    if (!peaks.empty()) out.modes = {peaks.front()};
    return out;
  }
  const double global_peak = *std::max_element(p.begin(), p.end());
  double best = 0.0;
  for (std::size_t a = 0; a < peaks.size(); ++a) {
    for (std::size_t b = a + 1; b < peaks.size(); ++b) {
      const double valley = *std::min_element(p.begin() + static_cast<std::ptrdiff_t>(peaks[a]),
                                              p.begin() + static_cast<std::ptrdiff_t>(peaks[b]) + 1);
      const double prominence = std::min(p[peaks[a]], p[peaks[b]]) - valley;
      if (prominence > prominence_frac * global_peak && prominence > best) {
        best = prominence;
        out.bimodal = true;
        out.modes = {peaks[a], peaks[b]};
      }
    }
  }
  if (!out.bimodal) out.modes = {peaks.front()};
  return out;
}

}  // namespace cmex
