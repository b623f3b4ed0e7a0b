#include "fcdnet/signal.hpp"

#include "fcdnet/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fcdnet::signal {

Tensor diff(const Tensor& series) {
    if (series.rank() == 0 || series.dim(0) == 0) throw ContractError("diff: series must have at least one step");
    const std::size_t steps = series.dim(0);
    const std::size_t stride = series.size() / steps;
    Tensor out(series.shape());
    for (std::size_t t = 1; t < steps; ++t)
        for (std::size_t i = 0; i < stride; ++i) out[t * stride + i] = series[t * stride + i] - series[(t - 1) * stride + i];
    return out;
}

Tensor segment(const Tensor& series, std::size_t period) {
    if (series.rank() != 3) throw ShapeError("segment: expected [T, N, D], got " + shape_string(series.shape()));
    if (period == 0) throw ContractError("segment: period must be positive");
    const std::size_t steps = series.dim(0);
    if (steps < period) {
        throw ContractError("segment: series of length " + std::to_string(steps) + " is shorter than period " +
                            std::to_string(period));
    }
    const std::size_t count = steps / period;
    const std::size_t stride = series.dim(1) * series.dim(2);
    std::vector<double> values(series.values().begin(),
                               series.values().begin() + static_cast<std::ptrdiff_t>(count * period * stride));
    return Tensor({count, period, series.dim(1), series.dim(2)}, std::move(values));
}

Tensor standardize_axis0(const Tensor& x, double eps) {
    if (x.rank() < 1 || x.dim(0) < 2) throw ContractError("standardize: axis 0 needs at least 2 entries");
    const std::size_t a = x.dim(0);
    const std::size_t rest = x.size() / a;
    Tensor out(x.shape());
    for (std::size_t i = 0; i < rest; ++i) {
        double mean = 0.0;
        for (std::size_t k = 0; k < a; ++k) mean += x[k * rest + i];
        mean /= static_cast<double>(a);
        double var = 0.0;
        for (std::size_t k = 0; k < a; ++k) {
            const double d = x[k * rest + i] - mean;
            var += d * d;
        }
        const double denom = std::sqrt(var / static_cast<double>(a)) + eps;
        for (std::size_t k = 0; k < a; ++k) out[k * rest + i] = (x[k * rest + i] - mean) / denom;
    }
    return out;
}

Tensor stnorm(const Tensor& x, std::span<const double> gain, std::span<const double> bias, double eps) {
    if (x.rank() < 2) throw ShapeError("stnorm: expected at least two axes");
    const std::size_t f = x.shape().back();
    if (gain.size() != f || bias.size() != f) {
        throw ShapeError("stnorm: affine size must match the feature axis (" + std::to_string(f) + ")");
    }
    Tensor out = standardize_axis0(x, eps);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] * gain[i % f] + bias[i % f];
    return out;
}

double phase_value(double re, double im) {
    if (im != 0.0) return std::atan(re / im);
    if (re > 0.0) return std::numbers::pi / 2.0;
    if (re < 0.0) return -std::numbers::pi / 2.0;
    return 0.0;
}

std::pair<Tensor, Tensor> amplitude_phase(const Tensor& re, const Tensor& im) {
    if (re.shape() != im.shape()) throw ShapeError("amplitude_phase: shape mismatch");
    Tensor amp(re.shape()), ph(re.shape());
    for (std::size_t i = 0; i < re.size(); ++i) {
        amp[i] = std::hypot(re[i], im[i]);
        ph[i] = phase_value(re[i], im[i]);
    }
    return {std::move(amp), std::move(ph)};
}

} // namespace fcdnet::signal
