#pragma once

#include "fcdnet/autograd.hpp"
#include "fcdnet/init.hpp"
#include "fcdnet/tensor.hpp"
#include "fcdnet/wavelet.hpp"

#include <cstddef>
#include <vector>

namespace fcdnet::ltfe {

struct LtfeConfig {
    std::size_t period = 288;         // P
    std::size_t levels = 5;           // L coefficient arrays = L - 1 analysis steps
    int wavelet_order = 4;            // Daubechies order
    std::vector<double> gates;        // one per level; empty = approximation 1.0, details 0.1
    std::size_t conv_channels = 16;   // C_h
    std::size_t hidden = 64;          // width of FC3 / FC2
    double chi_tau = 1.0;
    bool compact_storage = false;     // keep the preprocessed tensors in 32-bit

    std::vector<double> resolved_gates() const;
};

/// Fixed array stored at 64 or 32 bits.
class StoredTensor {
public:
    StoredTensor() = default;
    StoredTensor(const Tensor& t, bool compact);

    Tensor tensor() const;
    const Shape& shape() const { return shape_; }
    bool compact() const { return !narrow_.empty(); }

private:
    Shape shape_;
    std::vector<double> wide_;
    std::vector<float> narrow_;
};

/// Parameter-free part of the extractor, computed once from the training split.
struct LtfePreprocessed {
    StoredTensor q1;              // [N, S * D * L, P]
    StoredTensor q2;              // [N, P * D * L, S]
    std::size_t nodes = 0;
    std::size_t segments = 0;     // S
    std::size_t period = 0;       // P
    std::size_t merged_features = 0;  // D * L
};

/// Per-segment, per-node, per-feature wavelet stack Z of shape [S, P, N, D, L].
Tensor wavelet_stack(const Tensor& segments, const signal::Wavelet& wavelet, std::size_t levels,
                     const std::vector<double>& gates);

/// diff -> segment -> gated per-level reconstruction -> merge (d, l) ->
/// standardize over S (branch 1) and over P after swapping S and P (branch 2)
/// -> reshape with channels ordered (s, d, l) resp. (p, d, l), lexicographic.
LtfePreprocessed ltfe_preprocess(const Tensor& train_series, const LtfeConfig& config);

struct BranchParams {
    Parameter stn_gain;  // [D * L] ST-Norm affine
    Parameter stn_bias;
    Parameter conv_w;    // [C_h, C_in, 3]
    Parameter conv_b;    // [C_h]
    Parameter fc3_w;     // [C_h, hidden]
    Parameter fc3_b;
    Parameter fc2_w;     // [hidden, hidden]
    Parameter fc2_b;
    Parameter fc1_w;     // [hidden, N]
    Parameter fc1_b;

    void collect(std::vector<Parameter*>& out);
};

struct LtfeParams {
    BranchParams branch1;
    BranchParams branch2;
    Parameter beta_raw;  // beta = sigmoid(beta_raw)

    void collect(std::vector<Parameter*>& out);
};

LtfeParams init_ltfe(const LtfePreprocessed& pre, const LtfeConfig& config, double beta_init, Initializer& init);

// ST-Norm affine -> conv (kernel 3, same padding) -> ReLU -> mean over length
// -> ReLU(FC3) -> ReLU(FC2) -> FC1 -> chi. Returns [N, N] in [0, 1].
Var ltfe_branch(Tape& tape, const Tensor& q, BranchParams& params, double chi_tau);

// beta * a1 + (1 - beta) * a2.
Var fuse_beta(const Var& a1, const Var& a2, const Var& beta);

// The low-frequency graph A_LF.
Var ltfe_forward(Tape& tape, const LtfePreprocessed& pre, LtfeParams& params, double chi_tau);

} // namespace fcdnet::ltfe
