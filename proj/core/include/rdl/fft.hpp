#pragma once

#include <complex>
#include <span>
#include <vector>

namespace rdl::dsp {

// In-place iterative radix-2 FFT; size must be a power of two. The inverse
// transform includes the 1/n scale.
void fft_inplace(std::span<std::complex<double>> data, bool inverse);

// Real-input DFT of length n (power of two): returns bins 0..n/2.
std::vector<std::complex<double>> rfft(std::span<const double> frame);

// Inverse of rfft for a Hermitian spectrum of n/2+1 bins; returns n samples.
std::vector<double> irfft(std::span<const std::complex<double>> bins);

}  // namespace rdl::dsp
