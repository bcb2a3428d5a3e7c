#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rdl/tensor.hpp"

namespace rdl::xi {

inline constexpr double kMinDb = -40.0;
inline constexpr double kMaxDb = 45.0;
inline constexpr double kNoiseFloor = 1e-12;
inline constexpr double kSigmaFloor = 1e-3;
inline constexpr double kTargetEps = 1e-7;
inline constexpr std::size_t kMinStatFrames = 1000;

// (clean / max(noise, 1e-12))^2, elementwise.
std::vector<double> instantaneous_xi(std::span<const double> clean_mag, std::span<const double> noise_mag);

// 10 log10(xi), clamped to [kMinDb, kMaxDb].
double xi_to_db(double xi);

struct XiStatistics {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::size_t sample_count = 0;
  std::vector<std::size_t> floored_bins;  // bins whose sigma hit kSigmaFloor

  std::size_t bins() const { return mu.size(); }
};

// Phi((xi_db - mu) / sigma), kept inside [kTargetEps, 1 - kTargetEps].
double map_target(double xi_db, double mu, double sigma);
// Inverse of map_target followed by 10^(db/10).
double unmap(double target, double mu, double sigma);

// Row-major {frames x bins} linear xi -> network targets.
Tensor map_targets(std::span<const double> xi, std::size_t frames, const XiStatistics& stats);
std::vector<double> unmap_estimates(const Tensor& estimate, const XiStatistics& stats);

// Per-bin mean and population standard deviation of clamped xi_db values
// given as row-major {frames x bins}. Needs at least kMinStatFrames frames.
XiStatistics compute_stats(std::span<const double> xi_db, std::size_t frames, std::size_t bins);

// Text format: "# xi-stats" header line, "sample_count N", "clamp_db LO HI",
// then one "k mu sigma" line per bin.
std::string stats_to_text(const XiStatistics& stats);
XiStatistics stats_from_text(const std::string& text);
void write_stats(const std::string& path, const XiStatistics& stats);
XiStatistics read_stats(const std::string& path);

}  // namespace rdl::xi
