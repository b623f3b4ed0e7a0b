#include "fcdnet/autograd.hpp"

#include "fcdnet/errors.hpp"

namespace fcdnet {

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
    if (!value.all_finite()) throw NumericError("constant: non-finite input value");
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::param(Parameter& p) {
    if (!p.value.all_finite()) throw NumericError("parameter '" + p.name + "' holds non-finite values");
    if (p.grad.shape() != p.value.shape()) p.zero_grad();
    Node n;
    n.value = p.value;
    n.requires_grad = true;
    n.param = &p;
    return push(std::move(n));
}

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> parents, Backward backward) {
    return record(op, std::move(value), std::vector<Var>(parents), std::move(backward));
}

Var Tape::record(const char* op, Tensor value, const std::vector<Var>& parents, Backward backward) {
    if (!value.all_finite()) throw NumericError(std::string(op) + ": produced non-finite values");
    Node n;
    n.value = std::move(value);
    for (const Var& p : parents) {
        if (p.tape_ != this) throw ContractError(std::string(op) + ": operand recorded on a different tape");
        n.requires_grad = n.requires_grad || nodes_[p.id()].requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(backward);
    return push(std::move(n));
}

Tensor& Tape::grad_of(const Var& v) {
    Node& n = nodes_[v.id()];
    if (n.grad.shape() != n.value.shape()) n.grad = Tensor(n.value.shape());
    return n.grad;
}

void Tape::accumulate(const Var& v, const Tensor& g) {
    if (!requires_grad(v)) return;
    Tensor& dst = grad_of(v);
    if (g.size() != dst.size()) throw ShapeError("accumulate: gradient shape mismatch");
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

void Tape::backward(const Var& loss) {
    if (loss.tape_ != this) throw ContractError("backward: loss recorded on a different tape");
    if (nodes_[loss.id()].value.size() != 1) {
        throw ContractError("backward: loss must be a scalar, got shape " +
                            shape_string(nodes_[loss.id()].value.shape()));
    }
    for (Node& n : nodes_) n.grad = Tensor();
    grad_of(loss)[0] = 1.0;

    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || n.grad.empty()) continue;
        if (n.backward) {
            // Parents always have smaller ids, so n.grad is not touched by the callback.
            n.backward(*this, n.grad, n.value);
        }
        if (n.param != nullptr) {
            Tensor& pg = n.param->grad;
            for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad[k];
        }
    }
}

Tensor Tape::grad(const Var& v) const {
    const Node& n = nodes_[v.id()];
    if (n.grad.shape() != n.value.shape()) return Tensor(n.value.shape());
    return n.grad;
}

} // namespace fcdnet
