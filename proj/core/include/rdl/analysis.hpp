#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdl/network.hpp"

namespace rdl {

struct LayerCost {
  std::string name;
  std::uint64_t params = 0;
  std::uint64_t flops = 0;  // multiply-adds per output frame
};

struct AnalysisReport {
  NetworkConfig config;
  std::uint64_t total_params = 0;
  std::uint64_t flops_per_frame = 0;
  int receptive_field_frames = 0;
  std::vector<LayerCost> layers;

  std::string to_text() const;
  // Columns: unit,params,flops
  std::string to_csv() const;
};

std::uint64_t count_params(const NetworkModel& model);

// One FLOP is one multiply-add. Convolutions cost k*Cin*Cout + Cout (bias),
// norms and activations one per element, residual additions one per
// channel, concatenations nothing.
std::uint64_t count_flops_per_frame(const NetworkModel& model);

// Number of frames (current one included) that can influence an output
// frame: 1 + the longest sum of (k-1)*d along any input-to-output path.
int receptive_field(const NetworkModel& model);

std::vector<LayerCost> layer_costs(const NetworkModel& model);
AnalysisReport analyze(const NetworkModel& model);

}  // namespace rdl
