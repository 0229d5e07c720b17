#pragma once

// Sparse column-oriented CTMC operators over a truncated state box.
//
// The full generator entry (i,j) holds a_r(x_j) when i - j = d_r and
// x_j + v_r stays in the box; the diagonal accumulates the clipped -a_0.
// Clipping both sides keeps every column sum at exactly zero, so the
// truncated operator is a proper generator (probability conserved) with
// a reflecting-style boundary instead of a leak.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmex/model.hpp"
#include "cmex/statespace.hpp"

namespace cmex {

class Generator {
 public:
  Generator() = default;

  /// Build from per-column entries; rows are 0-based, unsorted, possibly
  /// duplicated (duplicates accumulate in insertion order).
  static Generator from_columns(std::int64_t dim,
                                const std::vector<std::vector<std::pair<std::int64_t, double>>>& cols) {
    Generator g;
    g.dim_ = dim;
    g.col_ptr_.assign(static_cast<std::size_t>(dim) + 1, 0);
    std::vector<std::pair<std::int64_t, double>> merged;
    for (std::int64_t j = 0; j < dim; ++j) {
      merged.assign(cols[static_cast<std::size_t>(j)].begin(), cols[static_cast<std::size_t>(j)].end());
      // accumulate duplicate rows in their insertion order, then sort by row
      std::vector<std::pair<std::int64_t, double>> unique;
      for (const auto& [row, val] : merged) {
        if (row < 0 || row >= dim) throw std::out_of_range("generator: row outside matrix");
        bool found = false;
        for (auto& u : unique) {
          if (u.first == row) {
            u.second += val;
            found = true;
            break;
          }
        }
        if (!found) unique.emplace_back(row, val);
      }
      std::sort(unique.begin(), unique.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [row, val] : unique) {
        if (val == 0.0) continue;
        g.row_idx_.push_back(row);
        g.values_.push_back(val);
      }
      g.col_ptr_[static_cast<std::size_t>(j) + 1] = static_cast<std::int64_t>(g.row_idx_.size());
    }
    g.refresh_caches();
    return g;
  }

  std::int64_t dim() const { return dim_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(values_.size()); }

  const std::vector<double>& column_sums() const { return column_sums_; }
  const std::vector<double>& diagonal() const { return diagonal_; }

  double max_exit_rate() const { return max_exit_rate_; }  // max_j -A_jj

  /// y = A x  (y must not alias x)
  void apply(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::int64_t j = 0; j < dim_; ++j) {
      const double xj = x[static_cast<std::size_t>(j)];
      if (xj == 0.0) continue;
      for (std::int64_t k = col_ptr_[static_cast<std::size_t>(j)];
           k < col_ptr_[static_cast<std::size_t>(j) + 1]; ++k) {
        y[static_cast<std::size_t>(row_idx_[static_cast<std::size_t>(k)])] +=
            values_[static_cast<std::size_t>(k)] * xj;
      }
    }
  }

  /// Visit (row, value) of column j (0-based) without allocating.
  template <typename Fn>
  void for_column(std::int64_t j, Fn&& fn) const {
    for (std::int64_t k = col_ptr_[static_cast<std::size_t>(j)];
         k < col_ptr_[static_cast<std::size_t>(j) + 1]; ++k)
      fn(row_idx_[static_cast<std::size_t>(k)], values_[static_cast<std::size_t>(k)]);
  }

  /// Entries of column j (0-based) as (row, value) pairs sorted by row.
  std::vector<std::pair<std::int64_t, double>> column_entries(std::int64_t j) const {
    if (j < 0 || j >= dim_) throw std::out_of_range("generator: column index out of range");
    std::vector<std::pair<std::int64_t, double>> out;
    for (std::int64_t k = col_ptr_[static_cast<std::size_t>(j)];
         k < col_ptr_[static_cast<std::size_t>(j) + 1]; ++k)
      out.emplace_back(row_idx_[static_cast<std::size_t>(k)], values_[static_cast<std::size_t>(k)]);
    return out;
  }

  double entry(std::int64_t i, std::int64_t j) const {
    for (std::int64_t k = col_ptr_[static_cast<std::size_t>(j)];
         k < col_ptr_[static_cast<std::size_t>(j) + 1]; ++k)
      if (row_idx_[static_cast<std::size_t>(k)] == i) return values_[static_cast<std::size_t>(k)];
    return 0.0;
  }

  std::vector<std::vector<double>> dense() const {
    std::vector<std::vector<double>> m(static_cast<std::size_t>(dim_),
                                       std::vector<double>(static_cast<std::size_t>(dim_), 0.0));
    for (std::int64_t j = 0; j < dim_; ++j)
      for (std::int64_t k = col_ptr_[static_cast<std::size_t>(j)];
           k < col_ptr_[static_cast<std::size_t>(j) + 1]; ++k)
        m[static_cast<std::size_t>(row_idx_[static_cast<std::size_t>(k)])][static_cast<std::size_t>(j)] +=
            values_[static_cast<std::size_t>(k)];
    return m;
  }

  /// Largest positive column sum relative to the column's magnitude; a proper
  /// (possibly substochastic) operator has none beyond rounding.
  double worst_positive_column_sum() const {
    double worst = 0.0;
    for (std::int64_t j = 0; j < dim_; ++j) {
      double scale = 1.0;
      for (std::int64_t k = col_ptr_[static_cast<std::size_t>(j)];
           k < col_ptr_[static_cast<std::size_t>(j) + 1]; ++k)
        scale += std::abs(values_[static_cast<std::size_t>(k)]);
      worst = std::max(worst, column_sums_[static_cast<std::size_t>(j)] / scale);
    }
    return worst;
  }

 private:
  void refresh_caches() {
    column_sums_.assign(static_cast<std::size_t>(dim_), 0.0);
    diagonal_.assign(static_cast<std::size_t>(dim_), 0.0);
    max_exit_rate_ = 0.0;
    for (std::int64_t j = 0; j < dim_; ++j) {
      for (std::int64_t k = col_ptr_[static_cast<std::size_t>(j)];
           k < col_ptr_[static_cast<std::size_t>(j) + 1]; ++k) {
        const double v = values_[static_cast<std::size_t>(k)];
        column_sums_[static_cast<std::size_t>(j)] += v;
        if (row_idx_[static_cast<std::size_t>(k)] == j) diagonal_[static_cast<std::size_t>(j)] = v;
      }
      max_exit_rate_ = std::max(max_exit_rate_, -diagonal_[static_cast<std::size_t>(j)]);
    }
  }

  std::int64_t dim_ = 0;
  std::vector<std::int64_t> col_ptr_;
  std::vector<std::int64_t> row_idx_;
  std::vector<double> values_;
  std::vector<double> column_sums_;
  std::vector<double> diagonal_;
  double max_exit_rate_ = 0.0;
};

namespace detail {

inline void require_match(const ReactionModel& model, const StateSpace& space) {
  if (model.num_species() != space.dims() || model.caps() != space.caps())
    throw std::invalid_argument("generator: model caps do not match state space");
}

// Shared assembly sweep: enumerates every column state once and reports, per
// reaction, whether firing stays in the box and what the propensity is.
template <typename Visitor>
void sweep_columns(const ReactionModel& model, const StateSpace& space, Visitor&& visit) {
  const int n = space.dims();
  const int m = model.num_reactions();
  State x(static_cast<std::size_t>(n), 0);
  State fired(static_cast<std::size_t>(n), 0);
  for (std::int64_t j = 0; j < space.size(); ++j) {
    space.state_into(j + 1, x);
    for (int r = 0; r < m; ++r) {
      const auto& col = model.stoich_column(r);
      bool inside = true;
      for (int i = 0; i < n; ++i) {
        fired[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + col[static_cast<std::size_t>(i)];
        if (fired[static_cast<std::size_t>(i)] < 0 ||
            fired[static_cast<std::size_t>(i)] > space.caps()[static_cast<std::size_t>(i)])
          inside = false;
      }
      visit(j, r, inside, model.propensity(r, x));
    }
  }
}

}  // namespace detail

/// Full clipped generator A: off-diagonal a_r(x_j) at row j + d_r when the
/// firing stays in the box, diagonal -sum of the included propensities.
inline Generator assemble_generator(const ReactionModel& model, const StateSpace& space) {
  detail::require_match(model, space);
  const ReactionOffset offs = reaction_offsets(space, model);
  std::vector<std::vector<std::pair<std::int64_t, double>>> cols(
      static_cast<std::size_t>(space.size()));
  std::vector<double> diag(static_cast<std::size_t>(space.size()), 0.0);
  detail::sweep_columns(model, space, [&](std::int64_t j, int r, bool inside, double a) {
    if (!inside || a == 0.0) return;
    cols[static_cast<std::size_t>(j)].emplace_back(j + offs.d[static_cast<std::size_t>(r)], a);
    diag[static_cast<std::size_t>(j)] -= a;
  });
  for (std::int64_t j = 0; j < space.size(); ++j)
    if (diag[static_cast<std::size_t>(j)] != 0.0)
      cols[static_cast<std::size_t>(j)].emplace_back(j, diag[static_cast<std::size_t>(j)]);
  return Generator::from_columns(space.size(), cols);
}

/// Channel matrices [A_0, A_1, ..., A_M]: A_0 diagonal with the clipped -a_0,
/// A_r the clipped propensities on offset d_r. Sum equals assemble_generator.
inline std::vector<Generator> assemble_channels(const ReactionModel& model, const StateSpace& space) {
  detail::require_match(model, space);
  const ReactionOffset offs = reaction_offsets(space, model);
  const int m = model.num_reactions();
  std::vector<std::vector<std::vector<std::pair<std::int64_t, double>>>> cols(
      static_cast<std::size_t>(m) + 1,
      std::vector<std::vector<std::pair<std::int64_t, double>>>(static_cast<std::size_t>(space.size())));
  std::vector<double> diag(static_cast<std::size_t>(space.size()), 0.0);
  detail::sweep_columns(model, space, [&](std::int64_t j, int r, bool inside, double a) {
    if (!inside || a == 0.0) return;
    cols[static_cast<std::size_t>(r) + 1][static_cast<std::size_t>(j)].emplace_back(
        j + offs.d[static_cast<std::size_t>(r)], a);
    diag[static_cast<std::size_t>(j)] -= a;
  });
  for (std::int64_t j = 0; j < space.size(); ++j)
    if (diag[static_cast<std::size_t>(j)] != 0.0)
      cols[0][static_cast<std::size_t>(j)].emplace_back(j, diag[static_cast<std::size_t>(j)]);
  std::vector<Generator> out;
  out.reserve(static_cast<std::size_t>(m) + 1);
  for (int r = 0; r <= m; ++r)
    out.push_back(Generator::from_columns(space.size(), cols[static_cast<std::size_t>(r)]));
  return out;
}

/// Frozen matrices [Abar_0, ..., Abar_M] built at xbar: Abar_0 = -a_0(xbar) I,
/// Abar_r holds the constant a_r(xbar) on offset d_r. Only out-of-box
/// positions are dropped; the frozen values themselves are never clipped.
inline std::vector<Generator> assemble_frozen(const ReactionModel& model, const StateSpace& space,
                                              std::span<const int> xbar) {
  detail::require_match(model, space);
  if (!space.in_bounds(xbar)) throw std::out_of_range("generator: frozen state outside the box");
  const ReactionOffset offs = reaction_offsets(space, model);
  const int m = model.num_reactions();
  std::vector<double> frozen(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) frozen[static_cast<std::size_t>(r)] = model.propensity(r, xbar);
  const double a0 = model.total_propensity(xbar);

  std::vector<Generator> out;
  out.reserve(static_cast<std::size_t>(m) + 1);
  {
    std::vector<std::vector<std::pair<std::int64_t, double>>> cols(
        static_cast<std::size_t>(space.size()));
    if (a0 != 0.0)
      for (std::int64_t j = 0; j < space.size(); ++j)
        cols[static_cast<std::size_t>(j)].emplace_back(j, -a0);
    out.push_back(Generator::from_columns(space.size(), cols));
  }
  for (int r = 0; r < m; ++r) {
    std::vector<std::vector<std::pair<std::int64_t, double>>> cols(
        static_cast<std::size_t>(space.size()));
    if (frozen[static_cast<std::size_t>(r)] != 0.0) {
      detail::sweep_columns(model, space, [&](std::int64_t j, int rr, bool inside, double) {
        if (rr != r || !inside) return;
        cols[static_cast<std::size_t>(j)].emplace_back(j + offs.d[static_cast<std::size_t>(r)],
                                                       frozen[static_cast<std::size_t>(r)]);
      });
    }
    out.push_back(Generator::from_columns(space.size(), cols));
  }
  return out;
}

/// Per-reaction generators [B_1, ..., B_M]: each B_r carries the clipped
/// a_r(x_j) at offset d_r and -a_r(x_j) on the diagonal, so each is itself a
/// proper generator and their sum is the full A.
inline std::vector<Generator> assemble_reaction_generators(const ReactionModel& model,
                                                           const StateSpace& space) {
  detail::require_match(model, space);
  const ReactionOffset offs = reaction_offsets(space, model);
  const int m = model.num_reactions();
  std::vector<std::vector<std::vector<std::pair<std::int64_t, double>>>> cols(
      static_cast<std::size_t>(m),
      std::vector<std::vector<std::pair<std::int64_t, double>>>(static_cast<std::size_t>(space.size())));
  detail::sweep_columns(model, space, [&](std::int64_t j, int r, bool inside, double a) {
    if (!inside || a == 0.0) return;
    cols[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)].emplace_back(
        j + offs.d[static_cast<std::size_t>(r)], a);
    cols[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)].emplace_back(j, -a);
  });
  std::vector<Generator> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r)
    out.push_back(Generator::from_columns(space.size(), cols[static_cast<std::size_t>(r)]));
  return out;
}

/// Frozen sum Abar = Abar_0 + ... + Abar_M as a single sparse operator.
inline Generator assemble_frozen_sum(const ReactionModel& model, const StateSpace& space,
                                     std::span<const int> xbar) {
  detail::require_match(model, space);
  if (!space.in_bounds(xbar)) throw std::out_of_range("generator: frozen state outside the box");
  const ReactionOffset offs = reaction_offsets(space, model);
  const int m = model.num_reactions();
  std::vector<double> frozen(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) frozen[static_cast<std::size_t>(r)] = model.propensity(r, xbar);
  const double a0 = model.total_propensity(xbar);
  std::vector<std::vector<std::pair<std::int64_t, double>>> cols(
      static_cast<std::size_t>(space.size()));
  detail::sweep_columns(model, space, [&](std::int64_t j, int r, bool inside, double) {
    if (!inside || frozen[static_cast<std::size_t>(r)] == 0.0) return;
    cols[static_cast<std::size_t>(j)].emplace_back(j + offs.d[static_cast<std::size_t>(r)],
                                                   frozen[static_cast<std::size_t>(r)]);
  });
  if (a0 != 0.0)
    for (std::int64_t j = 0; j < space.size(); ++j)
      cols[static_cast<std::size_t>(j)].emplace_back(j, -a0);
  return Generator::from_columns(space.size(), cols);
}

/// Column piece A_j = c_j e_j^T of the column-based splitting. j is 1-based
/// to match the index convention of the state space.
struct ColumnPiece {
  std::int64_t j = 0;  // 1-based column index
  std::vector<std::pair<std::int64_t, double>> entries;  // (0-based row, value)
};

inline ColumnPiece column_piece(const Generator& a, std::int64_t j) {
  if (j < 1 || j > a.dim()) throw std::out_of_range("generator: column index out of range");
  return ColumnPiece{j, a.column_entries(j - 1)};
}

/// Row-major dense text dump for golden tests and debugging of small boxes.
inline std::string dense_text_dump(const Generator& a) {
  std::ostringstream os;
  os.precision(17);
  const auto m = a.dense();
  for (std::int64_t i = 0; i < a.dim(); ++i) {
    for (std::int64_t j = 0; j < a.dim(); ++j) {
      if (j) os << ' ';
      os << m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace cmex
