#pragma once

#include "fcdnet/autograd.hpp"
#include "fcdnet/init.hpp"
#include "fcdnet/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fcdnet::stfe {

struct StfeConfig {
    std::size_t batch_size = 64;   // B, baked into the spectral maps
    std::size_t features = 1;      // D
    std::size_t input_length = 12; // T_in
    std::size_t nodes = 0;         // N
    std::size_t width = 10;        // F
    double chi_tau = 1.0;
};

struct StfeParams {
    std::size_t batch_size = 0;
    Parameter w_u_real;  // [B * D, F]
    Parameter b_u_real;  // [F]
    Parameter w_u_imag;
    Parameter b_u_imag;
    Parameter w_g;       // [F, N]
    Parameter w_m;
    Parameter w_s;
    Parameter w_t;       // [T_in]

    void collect(std::vector<Parameter*>& out);
};

StfeParams init_stfe(const StfeConfig& config, Initializer& init);

/// Per-batch high-frequency graph A_HF, shape [N, N] in [0, 1].
///
/// The window x[B, T_in, N, D] is laid out as [N, T_in, B * D] and transformed
/// along time. Real and imaginary spectra get their own affine maps to F
/// channels; amplitude, phase and the real inverse transform of the mapped
/// spectrum are projected to N columns, summed, contracted over time with
/// w_t and squashed by chi.
Var stfe_forward(Tape& tape, const Tensor& x, StfeParams& params, double chi_tau);

struct PaddedStarts {
    std::vector<std::size_t> starts;
    std::vector<std::uint8_t> valid;
};

// Pads a short batch to `batch_size` by repeating its last sample.
PaddedStarts pad_batch(const std::vector<std::size_t>& starts, std::size_t batch_size);

} // namespace fcdnet::stfe
