#include "rdl/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "rdl/errors.hpp"

namespace rdl::dsp {
namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

void fft_inplace(std::span<std::complex<double>> data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw ConfigError("FFT size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles computed directly rather than by recurrence to keep error at O(eps log n).
      const double angle = sign * 2.0 * std::numbers::pi * double(k) / double(len);
      const std::complex<double> w(std::cos(angle), std::sin(angle));
      for (std::size_t start = 0; start < n; start += len) {
        const auto u = data[start + k];
        const auto v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    for (auto& x : data) x /= double(n);
  }
}

std::vector<std::complex<double>> rfft(std::span<const double> frame) {
  std::vector<std::complex<double>> buf(frame.begin(), frame.end());
  fft_inplace(buf, false);
  buf.resize(frame.size() / 2 + 1);
  return buf;
}

std::vector<double> irfft(std::span<const std::complex<double>> bins) {
  if (bins.size() < 2) throw ConfigError("irfft needs at least two bins");
  const std::size_t n = 2 * (bins.size() - 1);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t k = 0; k < bins.size(); ++k) buf[k] = bins[k];
  for (std::size_t k = 1; k < n / 2; ++k) buf[n - k] = std::conj(bins[k]);
  // DC and Nyquist of a real signal are real.
  buf[0] = buf[0].real();
  buf[n / 2] = buf[n / 2].real();
  fft_inplace(buf, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace rdl::dsp
