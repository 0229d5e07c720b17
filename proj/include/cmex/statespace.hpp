#pragma once

// Mixed-radix bijection between the truncated state box 0 <= x_i <= Q^i
// and 1-based linear indices, species 1 fastest-varying:
//   index(x) = 1 + sum_i stride_i * x_i,  stride_1 = 1, stride_{i+1} = stride_i * (Q^i + 1)

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmex/model.hpp"

namespace cmex {

class StateSpace {
 public:
  explicit StateSpace(std::vector<int> caps) : caps_(std::move(caps)) {
    if (caps_.empty()) throw std::invalid_argument("statespace: no species");
    strides_.resize(caps_.size());
    std::int64_t stride = 1;
    for (std::size_t i = 0; i < caps_.size(); ++i) {
      if (caps_[i] < 0) throw std::invalid_argument("statespace: negative cap");
      strides_[i] = stride;
      stride *= static_cast<std::int64_t>(caps_[i]) + 1;
    }
    size_ = stride;
  }

  int dims() const { return static_cast<int>(caps_.size()); }
  std::int64_t size() const { return size_; }
  const std::vector<int>& caps() const { return caps_; }
  const std::vector<std::int64_t>& strides() const { return strides_; }

  bool in_bounds(std::span<const int> x) const {
    if (x.size() != caps_.size()) return false;
    for (std::size_t i = 0; i < caps_.size(); ++i)
      if (x[i] < 0 || x[i] > caps_[i]) return false;
    return true;
  }

  /// 1-based linear index of an in-box state.
  std::int64_t index_of(std::span<const int> x) const {
    if (!in_bounds(x)) throw std::out_of_range("statespace: state outside the box");
    std::int64_t idx = 1;
    for (std::size_t i = 0; i < caps_.size(); ++i)
      idx += strides_[i] * static_cast<std::int64_t>(x[i]);
    return idx;
  }

  /// Inverse of index_of on 1..size().
  State state_of(std::int64_t index) const {
    if (index < 1 || index > size_) throw std::out_of_range("statespace: index outside 1..Q");
    State x(caps_.size());
    std::int64_t rem = index - 1;
    for (std::size_t i = 0; i < caps_.size(); ++i) {
      const std::int64_t radix = static_cast<std::int64_t>(caps_[i]) + 1;
      x[i] = static_cast<int>(rem % radix);
      rem /= radix;
    }
    return x;
  }

  void state_into(std::int64_t index, std::span<int> x) const {
    std::int64_t rem = index - 1;
    for (std::size_t i = 0; i < caps_.size(); ++i) {
      const std::int64_t radix = static_cast<std::int64_t>(caps_[i]) + 1;
      x[i] = static_cast<int>(rem % radix);
      rem /= radix;
    }
  }

 private:
  std::vector<int> caps_;
  std::vector<std::int64_t> strides_;
  std::int64_t size_ = 0;
};

/// Signed index offsets d_r = sum_i stride_i * v_r^i, one per reaction;
/// index_of(x) - index_of(x - v_r) == d_r whenever both states are in the box.
struct ReactionOffset {
  std::vector<std::int64_t> d;
};

inline ReactionOffset reaction_offsets(const StateSpace& space, const ReactionModel& model) {
  if (model.num_species() != space.dims())
    throw std::invalid_argument("statespace: model dimension does not match space");
  ReactionOffset out;
  out.d.resize(model.num_reactions());
  for (int r = 0; r < model.num_reactions(); ++r) {
    const auto& col = model.stoich_column(r);
    std::int64_t d = 0;
    for (int i = 0; i < space.dims(); ++i) d += space.strides()[i] * col[i];
    out.d[r] = d;
  }
  return out;
}

}  // namespace cmex
