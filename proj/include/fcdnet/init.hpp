#pragma once

#include "fcdnet/tensor.hpp"

#include <cstdint>
#include <random>

namespace fcdnet {

/// Seeded parameter initialization. All randomness in a model flows through
/// one of these, so a seed fixes every initial weight.
class Initializer {
public:
    explicit Initializer(std::uint64_t seed) : rng_(seed) {}

    Tensor uniform(Shape shape, double lo, double hi);
    // Glorot/Xavier uniform with the given fans.
    Tensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out);

private:
    std::mt19937_64 rng_;
};

// Raw values whose squashed image equals the requested initial value.
double logit(double p);
double inverse_softplus(double y);

} // namespace fcdnet
