#include "rdl/xi.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rdl/errors.hpp"
#include "rdl/file_util.hpp"

namespace rdl::xi {

std::vector<double> instantaneous_xi(std::span<const double> clean_mag, std::span<const double> noise_mag) {
  if (clean_mag.size() != noise_mag.size()) throw ConfigError("instantaneous_xi: shape mismatch");
  std::vector<double> out(clean_mag.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double ratio = clean_mag[i] / std::max(noise_mag[i], kNoiseFloor);
    out[i] = ratio * ratio;
  }
  return out;
}

double xi_to_db(double xi) {
  if (!(xi > 0.0)) return kMinDb;
  return std::clamp(10.0 * std::log10(xi), kMinDb, kMaxDb);
}

double map_target(double xi_db, double mu, double sigma) {
  const double z = (xi_db - mu) / sigma;
  const double p = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return std::clamp(p, kTargetEps, 1.0 - kTargetEps);
}

double unmap(double target, double mu, double sigma) {
  const double p = std::clamp(target, kTargetEps, 1.0 - kTargetEps);
  const double z = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  return std::pow(10.0, (mu + sigma * z) / 10.0);
}

Tensor map_targets(std::span<const double> xi, std::size_t frames, const XiStatistics& stats) {
  const std::size_t bins = stats.bins();
  if (xi.size() != frames * bins) throw ConfigError("map_targets: xi size does not match frames x bins");
  Tensor out({frames, bins});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      out.at(t, k) = Real(map_target(xi_to_db(xi[t * bins + k]), stats.mu[k], stats.sigma[k]));
    }
  }
  return out;
}

std::vector<double> unmap_estimates(const Tensor& estimate, const XiStatistics& stats) {
  if (estimate.rank() != 2 || estimate.cols() != stats.bins()) {
    throw ConfigError("unmap_estimates: estimate " + shape_string(estimate.shape()) + " does not match " +
                      std::to_string(stats.bins()) + " bins");
  }
  std::vector<double> out(estimate.size());
  for (std::size_t t = 0; t < estimate.rows(); ++t) {
    for (std::size_t k = 0; k < estimate.cols(); ++k) {
      out[t * estimate.cols() + k] = unmap(double(estimate.at(t, k)), stats.mu[k], stats.sigma[k]);
    }
  }
  return out;
}

XiStatistics compute_stats(std::span<const double> xi_db, std::size_t frames, std::size_t bins) {
  if (bins == 0 || xi_db.size() != frames * bins) throw ConfigError("compute_stats: data size does not match frames x bins");
  if (frames < kMinStatFrames) {
    throw DataError("compute_stats: need at least " + std::to_string(kMinStatFrames) + " frames, got " +
                    std::to_string(frames));
  }
  XiStatistics s;
  s.sample_count = frames;
  s.mu.assign(bins, 0.0);
  s.sigma.assign(bins, 0.0);
  // Two passes with long double accumulators, frames in storage order.
  for (std::size_t k = 0; k < bins; ++k) {
    long double sum = 0;
    for (std::size_t t = 0; t < frames; ++t) sum += std::clamp(xi_db[t * bins + k], kMinDb, kMaxDb);
    const long double mean = sum / (long double)frames;
    long double sq = 0;
    for (std::size_t t = 0; t < frames; ++t) {
      const long double d = std::clamp(xi_db[t * bins + k], kMinDb, kMaxDb) - mean;
      sq += d * d;
    }
    s.mu[k] = double(mean);
    const double sd = double(std::sqrt(sq / (long double)frames));
    if (sd < kSigmaFloor) {
      s.sigma[k] = kSigmaFloor;
      s.floored_bins.push_back(k);
    } else {
      s.sigma[k] = sd;
    }
  }
  return s;
}

std::string stats_to_text(const XiStatistics& stats) {
  std::ostringstream os;
  os << "# xi-stats\n"
     << "sample_count " << stats.sample_count << "\n"
     << "clamp_db " << kMinDb << " " << kMaxDb << "\n";
  char line[96];
  for (std::size_t k = 0; k < stats.bins(); ++k) {
    std::snprintf(line, sizeof line, "%zu %.17g %.17g\n", k, stats.mu[k], stats.sigma[k]);
    os << line;
  }
  return os.str();
}

XiStatistics stats_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  XiStatistics s;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      have_header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "sample_count") {
      ls >> s.sample_count;
    } else if (first == "clamp_db") {
      double lo = 0, hi = 0;
      ls >> lo >> hi;
      if (lo != kMinDb || hi != kMaxDb) throw DataError("stats file uses a different clamp range");
    } else {
      std::size_t k = 0;
      double mu = 0, sigma = 0;
      try {
        k = std::stoul(first);
      } catch (const std::exception&) {
        throw DataError("stats file: malformed line '" + line + "'");
      }
      if (!(ls >> mu >> sigma) || k != s.mu.size() || !(sigma > 0)) {
        throw DataError("stats file: malformed line '" + line + "'");
      }
      s.mu.push_back(mu);
      s.sigma.push_back(sigma);
    }
  }
  if (!have_header || s.mu.empty()) throw DataError("stats file: missing header or bins");
  return s;
}

void write_stats(const std::string& path, const XiStatistics& stats) { write_file_atomic(path, stats_to_text(stats)); }

XiStatistics read_stats(const std::string& path) { return stats_from_text(read_file_text(path)); }

}  // namespace rdl::xi
