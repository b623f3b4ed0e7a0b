#pragma once

#include "fcdnet/autograd.hpp"
#include "fcdnet/graphops.hpp"
#include "fcdnet/init.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace fcdnet::forecast {

// ---- FAGRU ---------------------------------------------------------------

struct FagruConfig {
    std::size_t input_dim = 1;   // D
    std::size_t hidden = 64;     // h_g
    std::size_t order = 2;       // K
    std::size_t horizon = 12;    // E
    std::size_t output_dim = 1;  // D_out
};

struct FagruParams {
    std::size_t order = 2;
    Parameter w_r, b_r;  // [(K + 1) * (D + h_g), h_g], [h_g]
    Parameter w_u, b_u;
    Parameter w_c, b_c;
    Parameter readout_w;  // [h_g, E * D_out]
    Parameter readout_b;

    void collect(std::vector<Parameter*>& out);
};

FagruParams init_fagru(const FagruConfig& config, Initializer& init);

// One recurrent step on x[B, N, D] and h[B, N, h_g] over the operator op[N, N].
Var fagru_cell(const Var& x, const Var& h, const Var& op, FagruParams& params);

// Encodes x[B, T_in, N, D] from h = 0 and reads the horizon out of the final
// state. Returns [B, E, N, D_out].
Var fagru_forward(const Var& x, const Var& op, FagruParams& params, std::size_t horizon, std::size_t output_dim);

// ---- FAGWN ---------------------------------------------------------------

struct FagwnConfig {
    std::size_t input_dim = 1;                       // D
    std::size_t channels = 32;                       // r
    std::vector<std::size_t> dilations{1, 2, 1, 2};  // one layer each, kernel 2
    std::size_t order = 2;                           // K_p
    std::size_t head_channels = 64;                  // width of FC2 in the head
    std::size_t input_length = 12;                   // T_in
    std::size_t horizon = 12;                        // E
    std::size_t output_dim = 1;                      // D_out
    double epsilon = graph::kDefaultEpsilon;

    std::size_t receptive_field() const;
};

struct FagwnLayer {
    std::size_t dilation = 1;
    Parameter filter_w, filter_b;  // tanh branch, taps stacked: [2 r, r]
    Parameter gate_w, gate_b;      // sigmoid branch
    Parameter low_w;               // [(K_p + 1) r, r] over the low-pass filter
    Parameter high_w;              // over the high-pass filter
};

struct FagwnParams {
    std::size_t order = 2;
    double epsilon = graph::kDefaultEpsilon;
    Parameter in_w, in_b;  // [D, r]
    std::vector<FagwnLayer> layers;
    Parameter head2_w, head2_b;  // [L r, head]
    Parameter head1_w, head1_b;  // [head, D_out]
    Parameter time_w, time_b;    // [T', E], [E]

    void collect(std::vector<Parameter*>& out);
};

FagwnParams init_fagwn(const FagwnConfig& config, Initializer& init);

/// tanh(filter * x) . sigmoid(gate * x) with a kernel-2 causal convolution of
/// the given dilation along axis 2 of x[B, N, T, r]. Output length T - dilation.
Var gated_tcn(const Var& x, const Var& filter_w, const Var& filter_b, const Var& gate_w, const Var& gate_b,
              std::size_t dilation);

// sum_k (low^k z W_k1 + high^k z W_k2) for z[B, N, T, r].
Var fagcn_layer(const graph::FilterPair& filters, const Var& z, const Var& low_w, const Var& high_w, std::size_t order);

// x[B, T_in, N, D] with the graph a[N, N]; returns [B, E, N, D_out].
Var fagwn_forward(const Var& x, const Var& a, FagwnParams& params);

// ---- fusion --------------------------------------------------------------

// (x1 + eta x2) / (1 + eta).
Var fuse_outputs(const Var& x1, const Var& x2, const Var& eta);

} // namespace fcdnet::forecast
