#include "fcdnet/ltfe.hpp"

#include "fcdnet/errors.hpp"
#include "fcdnet/ops.hpp"
#include "fcdnet/signal.hpp"

#include <string>

namespace fcdnet::ltfe {

std::vector<double> LtfeConfig::resolved_gates() const {
    if (!gates.empty()) {
        if (gates.size() != levels) {
            throw ConfigError("ltfe: " + std::to_string(gates.size()) + " gates given for " + std::to_string(levels) +
                              " levels");
        }
        return gates;
    }
    std::vector<double> g(levels, 0.1);
    if (!g.empty()) g[0] = 1.0;
    return g;
}

StoredTensor::StoredTensor(const Tensor& t, bool compact) : shape_(t.shape()) {
    if (compact) {
        narrow_.assign(t.values().begin(), t.values().end());
    } else {
        wide_.assign(t.values().begin(), t.values().end());
    }
}

Tensor StoredTensor::tensor() const {
    if (!narrow_.empty()) return Tensor(shape_, std::vector<double>(narrow_.begin(), narrow_.end()));
    return Tensor(shape_, wide_);
}

Tensor wavelet_stack(const Tensor& segments, const signal::Wavelet& wavelet, std::size_t levels,
                     const std::vector<double>& gates) {
    if (segments.rank() != 4) throw ShapeError("wavelet_stack: expected [S, P, N, D]");
    if (levels == 0) throw ConfigError("wavelet_stack: levels must be positive");
    if (gates.size() != levels) throw ContractError("wavelet_stack: one gate per level required");
    const std::size_t s_count = segments.dim(0), p = segments.dim(1), n = segments.dim(2), d = segments.dim(3);
    Tensor z({s_count, p, n, d, levels});
    std::vector<double> signal_buf(p);
    for (std::size_t s = 0; s < s_count; ++s)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t f = 0; f < d; ++f) {
                for (std::size_t t = 0; t < p; ++t) signal_buf[t] = segments[((s * p + t) * n + i) * d + f];
                const auto coeffs = signal::gate_coeffs(signal::dwt_decompose(signal_buf, wavelet, levels - 1), gates);
                const Tensor parts = signal::reconstruct_levels(coeffs, wavelet);  // [P, L]
                for (std::size_t t = 0; t < p; ++t)
                    for (std::size_t l = 0; l < levels; ++l)
                        z[(((s * p + t) * n + i) * d + f) * levels + l] = parts[t * levels + l];
            }
    return z;
}

LtfePreprocessed ltfe_preprocess(const Tensor& train_series, const LtfeConfig& config) {
    if (train_series.rank() != 3) throw ShapeError("ltfe_preprocess: expected [T, N, D] training series");
    const std::size_t steps = train_series.dim(0);
    if (steps < 2 * config.period) {
        throw DataError("ltfe_preprocess: training split has " + std::to_string(steps) +
                        " steps; at least two periods of " + std::to_string(config.period) + " are needed");
    }
    const auto wavelet = signal::Wavelet::daubechies(config.wavelet_order);
    const Tensor segments = signal::segment(signal::diff(train_series), config.period);
    const Tensor z = wavelet_stack(segments, wavelet, config.levels, config.resolved_gates());

    const std::size_t s = segments.dim(0), p = segments.dim(1), n = segments.dim(2);
    const std::size_t f = segments.dim(3) * config.levels;
    const Tensor merged = z.reshaped({s, p, n, f});

    const Tensor z1 = signal::standardize_axis0(merged);
    const Tensor z2 = signal::standardize_axis0(permute(merged, {1, 0, 2, 3}));

    LtfePreprocessed pre;
    pre.q1 = StoredTensor(permute(z1, {2, 0, 3, 1}).reshaped({n, s * f, p}), config.compact_storage);
    pre.q2 = StoredTensor(permute(z2, {2, 0, 3, 1}).reshaped({n, p * f, s}), config.compact_storage);
    pre.nodes = n;
    pre.segments = s;
    pre.period = p;
    pre.merged_features = f;
    return pre;
}

void BranchParams::collect(std::vector<Parameter*>& out) {
    for (Parameter* p : {&stn_gain, &stn_bias, &conv_w, &conv_b, &fc3_w, &fc3_b, &fc2_w, &fc2_b, &fc1_w, &fc1_b})
        out.push_back(p);
}

void LtfeParams::collect(std::vector<Parameter*>& out) {
    branch1.collect(out);
    branch2.collect(out);
    out.push_back(&beta_raw);
}

namespace {

BranchParams init_branch(const std::string& prefix, std::size_t cin, std::size_t features, std::size_t nodes,
                         const LtfeConfig& config, Initializer& init) {
    const std::size_t ch = config.conv_channels, hid = config.hidden;
    BranchParams b;
    b.stn_gain = Parameter(prefix + ".stn_gain", Tensor({features}, 1.0));
    b.stn_bias = Parameter(prefix + ".stn_bias", Tensor({features}));
    b.conv_w = Parameter(prefix + ".conv_w", init.glorot({ch, cin, 3}, cin * 3, ch * 3));
    b.conv_b = Parameter(prefix + ".conv_b", Tensor({ch}));
    b.fc3_w = Parameter(prefix + ".fc3_w", init.glorot({ch, hid}, ch, hid));
    b.fc3_b = Parameter(prefix + ".fc3_b", Tensor({hid}));
    b.fc2_w = Parameter(prefix + ".fc2_w", init.glorot({hid, hid}, hid, hid));
    b.fc2_b = Parameter(prefix + ".fc2_b", Tensor({hid}));
    b.fc1_w = Parameter(prefix + ".fc1_w", init.glorot({hid, nodes}, hid, nodes));
    b.fc1_b = Parameter(prefix + ".fc1_b", Tensor({nodes}));
    return b;
}

} // namespace

LtfeParams init_ltfe(const LtfePreprocessed& pre, const LtfeConfig& config, double beta_init, Initializer& init) {
    LtfeParams params;
    params.branch1 = init_branch("ltfe.branch1", pre.q1.shape()[1], pre.merged_features, pre.nodes, config, init);
    params.branch2 = init_branch("ltfe.branch2", pre.q2.shape()[1], pre.merged_features, pre.nodes, config, init);
    params.beta_raw = Parameter("ltfe.beta_raw", Tensor::scalar(logit(beta_init)));
    return params;
}

Var ltfe_branch(Tape& tape, const Tensor& q, BranchParams& params, double chi_tau) {
    if (q.rank() != 3) throw ShapeError("ltfe_branch: expected q of shape [N, C_in, Len]");
    const Var x = ops::channel_affine(tape.constant(q), tape.param(params.stn_gain), tape.param(params.stn_bias));
    const Var conv = ops::relu(ops::conv1d(x, tape.param(params.conv_w), tape.param(params.conv_b), 1, 1, 1));
    const Var pooled = ops::mean_axis(conv, 2);
    const Var h3 = ops::relu(ops::add_bias(ops::matmul(pooled, tape.param(params.fc3_w)), tape.param(params.fc3_b)));
    const Var h2 = ops::relu(ops::add_bias(ops::matmul(h3, tape.param(params.fc2_w)), tape.param(params.fc2_b)));
    const Var logits = ops::add_bias(ops::matmul(h2, tape.param(params.fc1_w)), tape.param(params.fc1_b));
    if (logits.dim(0) != logits.dim(1)) throw ShapeError("ltfe_branch: head does not produce a square graph");
    return ops::chi(logits, chi_tau);
}

Var fuse_beta(const Var& a1, const Var& a2, const Var& beta) {
    return ops::add(ops::scale_by(a1, beta), ops::scale_by(a2, ops::one_minus(beta)));
}

Var ltfe_forward(Tape& tape, const LtfePreprocessed& pre, LtfeParams& params, double chi_tau) {
    const Var a1 = ltfe_branch(tape, pre.q1.tensor(), params.branch1, chi_tau);
    const Var a2 = ltfe_branch(tape, pre.q2.tensor(), params.branch2, chi_tau);
    const Var beta = ops::sigmoid(tape.param(params.beta_raw));
    return fuse_beta(a1, a2, beta);
}

} // namespace fcdnet::ltfe
