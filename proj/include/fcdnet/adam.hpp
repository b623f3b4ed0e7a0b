#pragma once

#include "fcdnet/autograd.hpp"
#include "fcdnet/tensor.hpp"

#include <cstddef>
#include <vector>

namespace fcdnet {

struct AdamState {
    Tensor m;
    Tensor v;
    std::size_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    explicit AdamState(const Shape& shape) : m(shape), v(shape) {}
};

// Bias-corrected Adam update of `param` in place; increments state.t.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr);

// Global L2 norm of all gradients; rescales them in place when above max_norm.
double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm);

/// One AdamState per parameter, in registration order.
class Adam {
public:
    explicit Adam(const std::vector<Parameter*>& params);

    void step(const std::vector<Parameter*>& params, double lr);
    const std::vector<AdamState>& states() const { return states_; }
    std::vector<AdamState>& states() { return states_; }

private:
    std::vector<AdamState> states_;
};

} // namespace fcdnet
