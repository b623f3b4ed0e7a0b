#pragma once

#include "fcdnet/autograd.hpp"

#include <cstddef>

namespace fcdnet::graph {

inline constexpr double kDefaultEpsilon = 0.3;
inline constexpr double kDegreeFloor = 1e-6;

// Low-pass eps*I + D^-1/2 A D^-1/2 and high-pass eps*I - D^-1/2 A D^-1/2.
struct FilterPair {
    Var low;
    Var high;
};

// D^-1/2 A D^-1/2 with d_i = sum_j a_ij + floor.
Var normalized_adjacency(const Var& a, double degree_floor = kDegreeFloor);

FilterPair build_filters(const Var& a, double epsilon = kDefaultEpsilon, double degree_floor = kDegreeFloor);

// gamma * low + (1 - gamma) * high; gamma holds one value in [0, 1].
Var fuse_gamma(const FilterPair& filters, const Var& gamma);

/// sum_{k=0}^{K} op^k x W_k for x[B, N, ..., C_in].
///
/// `weights` stacks W_0..W_K row-wise: shape [(K + 1) * C_in, C_out], block k
/// occupying rows [k * C_in, (k + 1) * C_in). Powers are applied to x by
/// repeated mixing; op^k is never formed.
Var poly_graph_conv(const Var& op, const Var& x, const Var& weights, std::size_t order);

} // namespace fcdnet::graph
