#include "fcdnet/forecaster.hpp"

#include "fcdnet/errors.hpp"
#include "fcdnet/ops.hpp"

#include <algorithm>
#include <string>

namespace fcdnet::forecast {

void FagruParams::collect(std::vector<Parameter*>& out) {
    for (Parameter* p : {&w_r, &b_r, &w_u, &b_u, &w_c, &b_c, &readout_w, &readout_b}) out.push_back(p);
}

FagruParams init_fagru(const FagruConfig& c, Initializer& init) {
    if (c.input_dim == 0 || c.hidden == 0 || c.horizon == 0 || c.output_dim == 0) {
        throw ConfigError("fagru: dimensions must be positive");
    }
    const std::size_t rows = (c.order + 1) * (c.input_dim + c.hidden);
    const std::size_t h = c.hidden;
    FagruParams p;
    p.order = c.order;
    p.w_r = Parameter("fagru.w_r", init.glorot({rows, h}, rows, h));
    p.b_r = Parameter("fagru.b_r", Tensor({h}));
    p.w_u = Parameter("fagru.w_u", init.glorot({rows, h}, rows, h));
    p.b_u = Parameter("fagru.b_u", Tensor({h}));
    p.w_c = Parameter("fagru.w_c", init.glorot({rows, h}, rows, h));
    p.b_c = Parameter("fagru.b_c", Tensor({h}));
    const std::size_t out = c.horizon * c.output_dim;
    p.readout_w = Parameter("fagru.readout_w", init.glorot({h, out}, h, out));
    p.readout_b = Parameter("fagru.readout_b", Tensor({out}));
    return p;
}

Var fagru_cell(const Var& x, const Var& h, const Var& op, FagruParams& params) {
    Tape& tape = x.tape();
    const Var xh = ops::concat({x, h}, 2);
    const Var r = ops::sigmoid(
        ops::add_bias(graph::poly_graph_conv(op, xh, tape.param(params.w_r), params.order), tape.param(params.b_r)));
    const Var u = ops::sigmoid(
        ops::add_bias(graph::poly_graph_conv(op, xh, tape.param(params.w_u), params.order), tape.param(params.b_u)));
    const Var xrh = ops::concat({x, ops::mul(r, h)}, 2);
    const Var c = ops::tanh(
        ops::add_bias(graph::poly_graph_conv(op, xrh, tape.param(params.w_c), params.order), tape.param(params.b_c)));
    return ops::add(ops::mul(u, h), ops::mul(ops::one_minus(u), c));
}

Var fagru_forward(const Var& x, const Var& op, FagruParams& params, std::size_t horizon, std::size_t output_dim) {
    if (x.shape().size() != 4) throw ShapeError("fagru_forward: expected [B, T_in, N, D]");
    const std::size_t b = x.dim(0), steps = x.dim(1), n = x.dim(2), d = x.dim(3);
    const std::size_t hidden = params.b_r.value.size();
    if (steps == 0) throw ShapeError("fagru_forward: empty input window");
    if (params.readout_b.value.size() != horizon * output_dim) {
        throw ShapeError("fagru_forward: readout does not produce " + std::to_string(horizon) + " x " +
                         std::to_string(output_dim) + " outputs");
    }
    Tape& tape = x.tape();
    Var h = tape.constant(Tensor({b, n, hidden}));
    for (std::size_t t = 0; t < steps; ++t) {
        const Var xt = ops::reshape(ops::slice(x, 1, t, 1), {b, n, d});
        h = fagru_cell(xt, h, op, params);
    }
    const Var out = ops::add_bias(ops::matmul(h, tape.param(params.readout_w)), tape.param(params.readout_b));
    return ops::permute(ops::reshape(out, {b, n, horizon, output_dim}), {0, 2, 1, 3});
}

std::size_t FagwnConfig::receptive_field() const {
    std::size_t rf = 1;
    for (std::size_t d : dilations) rf += d;
    return rf;
}

void FagwnParams::collect(std::vector<Parameter*>& out) {
    out.push_back(&in_w);
    out.push_back(&in_b);
    for (FagwnLayer& l : layers) {
        for (Parameter* p : {&l.filter_w, &l.filter_b, &l.gate_w, &l.gate_b, &l.low_w, &l.high_w}) out.push_back(p);
    }
    for (Parameter* p : {&head2_w, &head2_b, &head1_w, &head1_b, &time_w, &time_b}) out.push_back(p);
}

FagwnParams init_fagwn(const FagwnConfig& c, Initializer& init) {
    if (c.dilations.empty()) throw ConfigError("fagwn: at least one layer is required");
    if (c.receptive_field() > c.input_length) {
        throw ConfigError("fagwn: receptive field " + std::to_string(c.receptive_field()) + " exceeds input length " +
                          std::to_string(c.input_length));
    }
    const std::size_t r = c.channels;
    const std::size_t bank = (c.order + 1) * r;
    FagwnParams p;
    p.order = c.order;
    p.epsilon = c.epsilon;
    p.in_w = Parameter("fagwn.in_w", init.glorot({c.input_dim, r}, c.input_dim, r));
    p.in_b = Parameter("fagwn.in_b", Tensor({r}));
    std::size_t length = c.input_length;
    for (std::size_t i = 0; i < c.dilations.size(); ++i) {
        const std::string pre = "fagwn.layer" + std::to_string(i);
        FagwnLayer l;
        l.dilation = c.dilations[i];
        l.filter_w = Parameter(pre + ".filter_w", init.glorot({2 * r, r}, 2 * r, r));
        l.filter_b = Parameter(pre + ".filter_b", Tensor({r}));
        l.gate_w = Parameter(pre + ".gate_w", init.glorot({2 * r, r}, 2 * r, r));
        l.gate_b = Parameter(pre + ".gate_b", Tensor({r}));
        l.low_w = Parameter(pre + ".low_w", init.glorot({bank, r}, bank, r));
        l.high_w = Parameter(pre + ".high_w", init.glorot({bank, r}, bank, r));
        p.layers.push_back(std::move(l));
        length -= c.dilations[i];
    }
    const std::size_t skip = c.dilations.size() * r;
    p.head2_w = Parameter("fagwn.head2_w", init.glorot({skip, c.head_channels}, skip, c.head_channels));
    p.head2_b = Parameter("fagwn.head2_b", Tensor({c.head_channels}));
    p.head1_w = Parameter("fagwn.head1_w", init.glorot({c.head_channels, c.output_dim}, c.head_channels, c.output_dim));
    p.head1_b = Parameter("fagwn.head1_b", Tensor({c.output_dim}));
    p.time_w = Parameter("fagwn.time_w", init.glorot({length, c.horizon}, length, c.horizon));
    p.time_b = Parameter("fagwn.time_b", Tensor({c.horizon}));
    return p;
}

Var gated_tcn(const Var& x, const Var& filter_w, const Var& filter_b, const Var& gate_w, const Var& gate_b,
              std::size_t dilation) {
    if (x.shape().size() != 4) throw ShapeError("gated_tcn: expected [B, N, T, r]");
    const std::size_t t = x.dim(2);
    if (t <= dilation) {
        throw ShapeError("gated_tcn: input of length " + std::to_string(t) + " is too short for dilation " +
                         std::to_string(dilation));
    }
    const std::size_t len = t - dilation;
    // Output step j sees x[j] and x[j + dilation]; the latter is the current step.
    const Var taps = ops::concat({ops::slice(x, 2, 0, len), ops::slice(x, 2, dilation, len)}, 3);
    const Var filter = ops::tanh(ops::add_bias(ops::matmul(taps, filter_w), filter_b));
    const Var gate = ops::sigmoid(ops::add_bias(ops::matmul(taps, gate_w), gate_b));
    return ops::mul(filter, gate);
}

Var fagcn_layer(const graph::FilterPair& filters, const Var& z, const Var& low_w, const Var& high_w, std::size_t order) {
    return ops::add(graph::poly_graph_conv(filters.low, z, low_w, order),
                    graph::poly_graph_conv(filters.high, z, high_w, order));
}

namespace {

Var crop_front(const Var& x, std::size_t axis, std::size_t length) {
    const std::size_t t = x.dim(axis);
    return t == length ? x : ops::slice(x, axis, t - length, length);
}

} // namespace

Var fagwn_forward(const Var& x, const Var& a, FagwnParams& params) {
    if (x.shape().size() != 4) throw ShapeError("fagwn_forward: expected [B, T_in, N, D]");
    Tape& tape = x.tape();
    const graph::FilterPair filters = graph::build_filters(a, params.epsilon);

    const Var projected = ops::add_bias(ops::matmul(ops::permute(x, {0, 2, 1, 3}), tape.param(params.in_w)),
                                        tape.param(params.in_b));  // [B, N, T, r]
    Var h = projected;
    std::vector<Var> skips;
    for (FagwnLayer& l : params.layers) {
        const Var z = gated_tcn(h, tape.param(l.filter_w), tape.param(l.filter_b), tape.param(l.gate_w),
                                tape.param(l.gate_b), l.dilation);
        const Var mixed = fagcn_layer(filters, z, tape.param(l.low_w), tape.param(l.high_w), params.order);
        h = ops::add(mixed, crop_front(projected, 2, mixed.dim(2)));
        skips.push_back(h);
    }
    const std::size_t shortest = h.dim(2);
    for (Var& s : skips) s = crop_front(s, 2, shortest);
    const Var stacked = ops::concat(skips, 3);
    const Var hidden = ops::relu(ops::add_bias(ops::matmul(stacked, tape.param(params.head2_w)), tape.param(params.head2_b)));
    const Var out = ops::add_bias(ops::matmul(hidden, tape.param(params.head1_w)), tape.param(params.head1_b));
    if (params.time_w.value.dim(0) != shortest) {
        throw ShapeError("fagwn_forward: input length does not match the configured time map");
    }
    // [B, N, T', D_out] -> [B, N, D_out, T'] -> horizon -> [B, E, N, D_out].
    const Var over_time = ops::add_bias(ops::matmul(ops::permute(out, {0, 1, 3, 2}), tape.param(params.time_w)),
                                        tape.param(params.time_b));
    return ops::permute(over_time, {0, 3, 1, 2});
}

Var fuse_outputs(const Var& x1, const Var& x2, const Var& eta) {
    const Var inv = ops::pow_scalar(ops::add_scalar(eta, 1.0), -1.0);
    return ops::scale_by(ops::add(x1, ops::scale_by(x2, eta)), inv);
}

} // namespace fcdnet::forecast
