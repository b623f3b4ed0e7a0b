#pragma once

#include "fcdnet/tensor.hpp"

#include <span>
#include <utility>

namespace fcdnet::signal {

// First difference along axis 0 of [T, ...]; the first slice is zero.
Tensor diff(const Tensor& series);

// [T, N, D] -> [S, P, N, D], S = floor(T / P), trailing T mod P steps dropped.
Tensor segment(const Tensor& series, std::size_t period);

inline constexpr double kStNormEps = 1e-5;

// Per position of the trailing axes: (x - mean) / (std + eps) along axis 0,
// population std. Requires dim(0) >= 2.
Tensor standardize_axis0(const Tensor& x, double eps = kStNormEps);

// standardize_axis0 followed by a per-feature affine; features index the last axis.
Tensor stnorm(const Tensor& x, std::span<const double> gain, std::span<const double> bias, double eps = kStNormEps);

// arctan(re / im), with im = 0 mapped to sign(re) * pi/2 (0 at the origin).
double phase_value(double re, double im);

// Elementwise amplitude sqrt(re^2 + im^2) and phase_value.
std::pair<Tensor, Tensor> amplitude_phase(const Tensor& re, const Tensor& im);

} // namespace fcdnet::signal
