#include "fcdnet/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace fcdnet::signal {
namespace {

void radix2_inplace(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        // Twiddles computed directly per index keep the error from growing with n.
        for (std::size_t k = 0; k < half; ++k) {
            const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
            const Complex w(std::cos(angle), std::sin(angle));
            for (std::size_t i = 0; i < n; i += len) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + half] * w;
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

std::vector<Complex> bluestein(std::span<const Complex> x) {
    const std::size_t n = x.size();
    const std::size_t m = next_power_of_two(2 * n - 1);
    // chirp[k] = exp(-i pi k^2 / n); k^2 reduced mod 2n keeps the angle small.
    std::vector<Complex> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k2 = (k * k) % (2 * n);
        const double angle = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = Complex(std::cos(angle), std::sin(angle));
    }
    std::vector<Complex> a(m), b(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
    radix2_inplace(a, false);
    radix2_inplace(b, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    radix2_inplace(a, true);
    const double inv_m = 1.0 / static_cast<double>(m);
    std::vector<Complex> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * inv_m * chirp[k];
    return out;
}

} // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::vector<Complex> fft(std::span<const Complex> x) {
    if (x.empty()) return {};
    if (is_power_of_two(x.size())) {
        std::vector<Complex> a(x.begin(), x.end());
        radix2_inplace(a, false);
        return a;
    }
    return bluestein(x);
}

std::vector<Complex> fft(std::span<const double> x) {
    std::vector<Complex> c(x.begin(), x.end());
    return fft(std::span<const Complex>(c));
}

std::vector<Complex> ifft(std::span<const Complex> x) {
    std::vector<Complex> c(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) c[i] = std::conj(x[i]);
    std::vector<Complex> y = fft(std::span<const Complex>(c));
    const double inv = x.empty() ? 0.0 : 1.0 / static_cast<double>(x.size());
    for (Complex& v : y) v = std::conj(v) * inv;
    return y;
}

} // namespace fcdnet::signal
