#include "rdl/gain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rdl/errors.hpp"

namespace rdl::gain {

const char* gain_name(GainKind kind) { return kind == GainKind::Srwf ? "srwf" : "mmse-lsa"; }

GainKind parse_gain(const std::string& name) {
  if (name == "srwf") return GainKind::Srwf;
  if (name == "mmse-lsa") return GainKind::MmseLsa;
  throw ConfigError("unknown gain '" + name + "' (expected srwf or mmse-lsa)");
}

double expint_e1(double v) {
  if (!(v > 0.0)) throw ConfigError("expint_e1: argument must be positive");
  if (v < 1.0) {
    // -gamma - ln v + sum_{k>=1} (-1)^(k+1) v^k / (k k!)
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 100; ++k) {
      term *= -v / double(k);
      const double add = -term / double(k);
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return -std::numbers::egamma - std::log(v) + sum;
  }
  constexpr double tiny = 1e-300;
  double b = v + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -double(i) * double(i);
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-v);
}

double wiener(double xi) {
  if (xi < 0.0) throw ConfigError("gain: a priori SNR must be non-negative");
  return xi / (1.0 + xi);
}

double srwf(double xi) { return std::sqrt(wiener(xi)); }

double mmse_lsa(double xi, double gamma) {
  if (xi < 0.0) throw ConfigError("mmse_lsa: a priori SNR must be non-negative");
  if (!(gamma > 0.0)) throw ConfigError("mmse_lsa: a posteriori SNR must be positive");
  if (xi == 0.0) return 0.0;
  const double w = xi / (1.0 + xi);
  const double v = w * gamma;
  const double g = w * std::exp(0.5 * expint_e1(v));
  if (!std::isfinite(g)) throw NumericError("mmse_lsa: non-finite gain");
  return g;
}

dsp::SpectrogramFrames apply_gain(const dsp::SpectrogramFrames& frames, std::span<const double> xi_hat, GainKind kind) {
  if (xi_hat.size() != frames.magnitude.size()) throw ConfigError("apply_gain: xi estimate does not match frames");
  dsp::SpectrogramFrames out = frames;
  for (std::size_t i = 0; i < xi_hat.size(); ++i) {
    const double xi = std::max(xi_hat[i], 0.0);
    const double g = kind == GainKind::Srwf ? srwf(xi) : mmse_lsa(xi, xi + 1.0);
    out.magnitude[i] = frames.magnitude[i] * std::clamp(g, 0.0, kMaxGain);
  }
  return out;
}

}  // namespace rdl::gain
