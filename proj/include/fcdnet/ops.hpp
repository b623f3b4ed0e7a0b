#pragma once

#include "fcdnet/autograd.hpp"

#include <cstddef>
#include <vector>

// Differentiable operations over Var. Each records one node on the operands'
// tape with an exact analytic backward.
namespace fcdnet::ops {

// Elementwise, same shape.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);

Var scale(const Var& x, double c);
Var add_scalar(const Var& x, double c);
Var one_minus(const Var& x);
// x * s where s holds a single value.
Var scale_by(const Var& x, const Var& s);

Var neg(const Var& x);
Var sigmoid(const Var& x);
Var tanh(const Var& x);
// Subgradient at 0 is 0.
Var relu(const Var& x);
Var softplus(const Var& x);
// x^p for strictly positive x.
Var pow_scalar(const Var& x, double p);
Var square(const Var& x);

// Temperature sigmoid 1 / (1 + exp(-x / tau)), the graph squashing unit.
Var chi(const Var& x, double tau = 1.0);

// Broadcast over the last axis: x[..., C] with b[C].
Var add_bias(const Var& x, const Var& b);
Var mul_last(const Var& x, const Var& g);

// x[..., K] * w[K, M] -> [..., M].
Var matmul(const Var& x, const Var& w);
// a[m, k] * b[n, k]^T -> [m, n].
Var matmul_nt(const Var& a, const Var& b);
// u[m] outer v[n] -> [m, n].
Var outer(const Var& u, const Var& v);
// a[N, N] applied to the node axis of x[B, N, M] (or x[N, M]).
Var graph_mix(const Var& a, const Var& x);

Var reshape(const Var& x, Shape shape);
Var permute(const Var& x, const std::vector<std::size_t>& perm);
Var concat(const std::vector<Var>& xs, std::size_t axis);
Var slice(const Var& x, std::size_t axis, std::size_t start, std::size_t length);

Var sum_all(const Var& x);
Var mean_all(const Var& x);
// Sum or mean over one axis; the axis is removed from the shape.
Var sum_axis(const Var& x, std::size_t axis);
Var mean_axis(const Var& x, std::size_t axis);

// Channel-tiled affine on q[N, C, Len]: channel c uses gain/bias[c mod F].
Var channel_affine(const Var& q, const Var& gain, const Var& bias);

// sqrt(re^2 + im^2); the gradient at the origin is taken as 0.
Var amplitude(const Var& re, const Var& im);
// arctan(re / im) in [-pi/2, pi/2]; im = 0 maps to sign(re) * pi/2, and 0 at the origin.
Var phase(const Var& re, const Var& im);
// Real part of the inverse DFT of (re + i im) along axis 1 of [A, T, F].
Var ifft_real(const Var& re, const Var& im);

/// 1D convolution over x[B, C_in, T] with kernel w[C_out, C_in, k].
///
/// out[b, o, t] = bias[o] + sum_{c, j} w[o, c, j] * xp[b, c, t + j * dilation]
/// where xp is x padded with pad_left/pad_right zeros. bias may be invalid.
Var conv1d(const Var& x, const Var& w, const Var& bias, std::size_t dilation, std::size_t pad_left,
           std::size_t pad_right);

// Valid-mode causal dilated convolution; output length T - (k - 1) * dilation.
Var dilated_causal_conv1d(const Var& x, const Var& w, std::size_t dilation);

} // namespace fcdnet::ops
