#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fcdnet/tensor.hpp"

namespace fcdnet::signal {

/// Orthogonal Daubechies filter bank (order p has 2p taps).
struct Wavelet {
    int order = 4;
    std::vector<double> dec_lo;
    std::vector<double> dec_hi;

    static Wavelet daubechies(int order);
    std::size_t taps() const { return dec_lo.size(); }
};

// coeffs[0] is the approximation at the deepest level, followed by details
// from the deepest level to the finest: lengths n/2^J, n/2^J, n/2^(J-1), ..., n/2.
using Coeffs = std::vector<std::vector<double>>;

// One periodized analysis step; n must be even.
void dwt_step(std::span<const double> x, const Wavelet& w, std::vector<double>& approx, std::vector<double>& detail);
// Adjoint (and inverse) of dwt_step.
std::vector<double> idwt_step(std::span<const double> approx, std::span<const double> detail, const Wavelet& w);

// Multilevel periodized decomposition with `depth` analysis steps.
// Throws ContractError when x.size() is not divisible by 2^depth.
Coeffs dwt_decompose(std::span<const double> x, const Wavelet& w, std::size_t depth);
std::vector<double> dwt_reconstruct(const Coeffs& coeffs, const Wavelet& w);

// C[i] = gates[i] * coeffs[i]; one gate per coefficient array.
Coeffs gate_coeffs(Coeffs coeffs, std::span<const double> gates);

// Reconstructs each coefficient array on its own (all others zeroed).
// Returns [n, L] where L = coeffs.size(); summing over L gives dwt_reconstruct.
Tensor reconstruct_levels(const Coeffs& coeffs, const Wavelet& w);

} // namespace fcdnet::signal
