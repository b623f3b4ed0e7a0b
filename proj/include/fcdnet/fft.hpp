#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fcdnet::signal {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

// Unnormalized forward DFT, X[k] = sum_t x[t] exp(-2 pi i k t / n).
// Radix-2 for power-of-two lengths; other lengths go through Bluestein's
// chirp-z identity on a zero-padded power-of-two buffer. Empty input returns empty.
std::vector<Complex> fft(std::span<const Complex> x);
std::vector<Complex> fft(std::span<const double> x);

// Inverse with the 1/n factor; ifft(fft(x)) == x.
std::vector<Complex> ifft(std::span<const Complex> x);

} // namespace fcdnet::signal
