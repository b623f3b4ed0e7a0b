#include "fcdnet/adam.hpp"

#include "fcdnet/errors.hpp"

#include <cmath>

namespace fcdnet {

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr) {
    if (param.shape() != grad.shape() || param.shape() != state.m.shape() || param.shape() != state.v.shape()) {
        throw ContractError("adam_step: parameter " + shape_string(param.shape()) + ", gradient " +
                            shape_string(grad.shape()) + " and moments " + shape_string(state.m.shape()) +
                            " must agree");
    }
    if (lr < 0.0) throw ContractError("adam_step: learning rate must be nonnegative");
    state.t += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
    double sq = 0.0;
    for (const Parameter* p : params)
        for (double g : p->grad.values()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (Parameter* p : params)
            for (double& g : p->grad.values()) g *= s;
    }
    return norm;
}

Adam::Adam(const std::vector<Parameter*>& params) {
    states_.reserve(params.size());
    for (const Parameter* p : params) states_.emplace_back(p->value.shape());
}

void Adam::step(const std::vector<Parameter*>& params, double lr) {
    if (params.size() != states_.size()) throw ContractError("Adam: parameter list changed since construction");
    for (std::size_t i = 0; i < params.size(); ++i) adam_step(params[i]->value, params[i]->grad, states_[i], lr);
}

} // namespace fcdnet
