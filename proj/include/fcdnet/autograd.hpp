#pragma once

#include "fcdnet/tensor.hpp"

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace fcdnet {

/// A trainable array plus its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

    void zero_grad() { grad = Tensor(value.shape()); }
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t dim(std::size_t axis) const { return value().dim(axis); }
    std::size_t size() const { return value().size(); }
    bool requires_grad() const;

    Tape& tape() const { return *tape_; }
    std::size_t id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Linear record of a forward computation for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so replaying them backwards is a
/// valid topological order. Every recorded value is checked for finiteness
/// and a NumericError names the offending op. Gradients of parameter leaves
/// are added into Parameter::grad, so a parameter used at many time steps
/// accumulates all of its contributions.
class Tape {
public:
    // Receives the gradient and the value of the node's output; pushes into parents.
    using Backward = std::function<void(Tape&, const Tensor& grad, const Tensor& out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    Var param(Parameter& p);
    Var record(const char* op, Tensor value, std::initializer_list<Var> parents, Backward backward);
    Var record(const char* op, Tensor value, const std::vector<Var>& parents, Backward backward);

    const Tensor& value(const Var& v) const { return nodes_[v.id()].value; }
    bool requires_grad(const Var& v) const { return nodes_[v.id()].requires_grad; }

    // Gradient buffer of v, zero-allocated on first use. Only valid during backward().
    Tensor& grad_of(const Var& v);
    void accumulate(const Var& v, const Tensor& g);

    // Populates gradients for every node reachable from a scalar loss and adds
    // parameter-leaf gradients into their Parameter::grad.
    void backward(const Var& loss);

    // Gradient of an arbitrary node after backward(); zeros if none reached it.
    Tensor grad(const Var& v) const;

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        Parameter* param = nullptr;
        Backward backward;
    };

    Var push(Node node);

    std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }
inline bool Var::requires_grad() const { return tape_->requires_grad(*this); }

} // namespace fcdnet
