#include "fcdnet/graphops.hpp"

#include "fcdnet/errors.hpp"
#include "fcdnet/ops.hpp"

#include <string>
#include <vector>

namespace fcdnet::graph {

Var normalized_adjacency(const Var& a, double degree_floor) {
    if (a.shape().size() != 2 || a.dim(0) != a.dim(1)) {
        throw ShapeError("normalized_adjacency: expected a square matrix, got " + shape_string(a.shape()));
    }
    const Var degree = ops::add_scalar(ops::sum_axis(a, 1), degree_floor);
    const Var inv_sqrt = ops::pow_scalar(degree, -0.5);
    return ops::mul(a, ops::outer(inv_sqrt, inv_sqrt));
}

FilterPair build_filters(const Var& a, double epsilon, double degree_floor) {
    const Var norm = normalized_adjacency(a, degree_floor);
    Tensor eye = Tensor::identity(a.dim(0));
    for (double& v : eye.values()) v *= epsilon;
    const Var scaled_eye = a.tape().constant(std::move(eye));
    return {ops::add(scaled_eye, norm), ops::sub(scaled_eye, norm)};
}

Var fuse_gamma(const FilterPair& filters, const Var& gamma) {
    return ops::add(ops::scale_by(filters.low, gamma), ops::scale_by(filters.high, ops::one_minus(gamma)));
}

Var poly_graph_conv(const Var& op, const Var& x, const Var& weights, std::size_t order) {
    const std::size_t cin = x.shape().back();
    if (weights.shape().size() != 2 || weights.dim(0) != (order + 1) * cin) {
        throw ShapeError("poly_graph_conv: weights " + shape_string(weights.shape()) + " do not stack " +
                         std::to_string(order + 1) + " blocks of " + std::to_string(cin) + " input channels");
    }
    std::vector<Var> powers{x};
    for (std::size_t k = 1; k <= order; ++k) powers.push_back(ops::graph_mix(op, powers.back()));
    const Var stacked = order == 0 ? x : ops::concat(powers, x.shape().size() - 1);
    return ops::matmul(stacked, weights);
}

} // namespace fcdnet::graph
