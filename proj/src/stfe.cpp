#include "fcdnet/stfe.hpp"

#include "fcdnet/errors.hpp"
#include "fcdnet/fft.hpp"
#include "fcdnet/ops.hpp"

#include <string>

namespace fcdnet::stfe {

void StfeParams::collect(std::vector<Parameter*>& out) {
    for (Parameter* p : {&w_u_real, &b_u_real, &w_u_imag, &b_u_imag, &w_g, &w_m, &w_s, &w_t}) out.push_back(p);
}

StfeParams init_stfe(const StfeConfig& c, Initializer& init) {
    if (c.batch_size == 0 || c.features == 0 || c.input_length == 0 || c.nodes == 0 || c.width == 0) {
        throw ConfigError("stfe: batch size, features, input length, nodes and width must be positive");
    }
    const std::size_t bd = c.batch_size * c.features;
    StfeParams p;
    p.batch_size = c.batch_size;
    p.w_u_real = Parameter("stfe.w_u_real", init.glorot({bd, c.width}, bd, c.width));
    p.b_u_real = Parameter("stfe.b_u_real", Tensor({c.width}));
    p.w_u_imag = Parameter("stfe.w_u_imag", init.glorot({bd, c.width}, bd, c.width));
    p.b_u_imag = Parameter("stfe.b_u_imag", Tensor({c.width}));
    p.w_g = Parameter("stfe.w_g", init.glorot({c.width, c.nodes}, c.width, c.nodes));
    p.w_m = Parameter("stfe.w_m", init.glorot({c.width, c.nodes}, c.width, c.nodes));
    p.w_s = Parameter("stfe.w_s", init.glorot({c.width, c.nodes}, c.width, c.nodes));
    p.w_t = Parameter("stfe.w_t", init.glorot({c.input_length}, c.input_length, 1));
    return p;
}

namespace {

// Spectrum of x[B, T, N, D] along T, laid out [N, T, B * D].
std::pair<Tensor, Tensor> window_spectrum(const Tensor& x) {
    const std::size_t b = x.dim(0), t = x.dim(1), n = x.dim(2), d = x.dim(3);
    const Tensor laid = permute(x, {2, 1, 0, 3});  // [N, T, B, D]
    Tensor re({n, t, b * d}), im({n, t, b * d});
    std::vector<double> column(t);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < b * d; ++c) {
            for (std::size_t s = 0; s < t; ++s) column[s] = laid[(i * t + s) * b * d + c];
            const auto spec = signal::fft(column);
            for (std::size_t s = 0; s < t; ++s) {
                re[(i * t + s) * b * d + c] = spec[s].real();
                im[(i * t + s) * b * d + c] = spec[s].imag();
            }
        }
    return {std::move(re), std::move(im)};
}

} // namespace

Var stfe_forward(Tape& tape, const Tensor& x, StfeParams& params, double chi_tau) {
    if (x.rank() != 4) throw ShapeError("stfe_forward: expected [B, T_in, N, D], got " + shape_string(x.shape()));
    if (x.dim(0) != params.batch_size) {
        throw ContractError("stfe_forward: batch holds " + std::to_string(x.dim(0)) + " samples but the extractor was built for " +
                            std::to_string(params.batch_size) + "; pad the batch first");
    }
    const std::size_t t = x.dim(1), n = x.dim(2);
    if (params.w_u_real.value.dim(0) != x.dim(0) * x.dim(3) || params.w_g.value.dim(1) != n ||
        params.w_t.value.size() != t) {
        throw ShapeError("stfe_forward: input " + shape_string(x.shape()) + " does not match the extractor parameters");
    }
    auto [re, im] = window_spectrum(x);
    const Var vr = ops::add_bias(ops::matmul(tape.constant(std::move(re)), tape.param(params.w_u_real)),
                                 tape.param(params.b_u_real));
    const Var vi = ops::add_bias(ops::matmul(tape.constant(std::move(im)), tape.param(params.w_u_imag)),
                                 tape.param(params.b_u_imag));
    const Var amp = ops::amplitude(vr, vi);
    const Var phs = ops::phase(vr, vi);
    const Var g = ops::ifft_real(vr, vi);  // [N, T, F]

    // Kept as [N(i), T, N(j)]; the time axis moves last before contraction.
    const Var m = ops::add(ops::add(ops::matmul(g, tape.param(params.w_g)), ops::matmul(amp, tape.param(params.w_m))),
                           ops::matmul(phs, tape.param(params.w_s)));
    const Var by_time = ops::permute(m, {0, 2, 1});
    const Var wt = ops::reshape(tape.param(params.w_t), {t, 1});
    return ops::chi(ops::reshape(ops::matmul(by_time, wt), {n, n}), chi_tau);
}

PaddedStarts pad_batch(const std::vector<std::size_t>& starts, std::size_t batch_size) {
    if (starts.empty()) throw ContractError("pad_batch: empty batch");
    if (starts.size() > batch_size) {
        throw ContractError("pad_batch: " + std::to_string(starts.size()) + " samples exceed batch size " +
                            std::to_string(batch_size));
    }
    PaddedStarts out{starts, std::vector<std::uint8_t>(starts.size(), 1)};
    out.starts.resize(batch_size, starts.back());
    out.valid.resize(batch_size, 0);
    return out;
}

} // namespace fcdnet::stfe
