#pragma once

#include "fcdnet/init.hpp"
#include "fcdnet/tensor.hpp"

#include <complex>
#include <numbers>
#include <vector>

namespace fcdnet::testing {

inline Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Initializer init(seed);
    return init.uniform(std::move(shape), lo, hi);
}

// O(n^2) reference transform.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x, bool inverse = false) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

inline std::vector<double> vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

inline double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace fcdnet::testing
