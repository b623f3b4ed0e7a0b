#include "fcdnet/init.hpp"

#include "fcdnet/errors.hpp"

#include <cmath>

namespace fcdnet {

Tensor Initializer::uniform(Shape shape, double lo, double hi) {
    Tensor t(std::move(shape));
    // Mapped by hand from 53 random bits so the stream is the same on every standard library.
    for (double& v : t.values()) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        v = lo + (hi - lo) * u;
    }
    return t;
}

Tensor Initializer::glorot(Shape shape, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    return uniform(std::move(shape), -limit, limit);
}

double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ContractError("logit: argument must lie in (0, 1)");
    return std::log(p / (1.0 - p));
}

double inverse_softplus(double y) {
    if (!(y > 0.0)) throw ContractError("inverse_softplus: argument must be positive");
    return y > 30.0 ? y : std::log(std::expm1(y));
}

} // namespace fcdnet
