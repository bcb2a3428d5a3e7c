#pragma once

#include <span>
#include <string>

#include "rdl/dsp.hpp"

namespace rdl::gain {

enum class GainKind { Srwf, MmseLsa };

const char* gain_name(GainKind kind);
GainKind parse_gain(const std::string& name);

inline constexpr double kMaxGain = 1.5;

// Exponential integral E1(v) = int_v^inf e^-t / t dt, v > 0. Power series
// below 1, Lentz continued fraction above.
double expint_e1(double v);

double wiener(double xi);
// sqrt(xi / (1 + xi))
double srwf(double xi);
// (xi / (1 + xi)) exp(E1(v) / 2), v = xi gamma / (1 + xi)
double mmse_lsa(double xi, double gamma);

// Multiplies magnitudes by the chosen gain (gamma = xi + 1 for MMSE-LSA),
// clamped to [0, kMaxGain]. Phase is copied unchanged.
dsp::SpectrogramFrames apply_gain(const dsp::SpectrogramFrames& frames, std::span<const double> xi_hat, GainKind kind);

}  // namespace rdl::gain
