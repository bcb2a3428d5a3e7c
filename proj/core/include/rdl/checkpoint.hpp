#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdl/adam.hpp"
#include "rdl/network.hpp"

namespace rdl {

// Binary layout (all integers little-endian):
//   "RDLN" | u16 version | u32 len + config text
//   u32 count, then per parameter:
//     u32 len + name | u8 dtype (1 = f32, 2 = f64) | u8 rank | u64 dims[rank] | payload
//   trailing sections until EOF: 4-byte tag | u64 len | payload
//     "ADAM": u64 step | f64 lr, beta1, beta2, eps | per parameter: first then
//             second moment, each u8 dtype + payload (shape from the parameter)
//     "STAT": training-state text, "key=value" lines
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  NetworkModel model;
  std::optional<AdamOptimizer> optimizer;
  std::string train_state;
};

std::vector<std::uint8_t> serialize_checkpoint(const NetworkModel& model, const AdamOptimizer* optimizer = nullptr,
                                               const std::string& train_state = {});
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::string& path, const NetworkModel& model, const AdamOptimizer* optimizer = nullptr,
                     const std::string& train_state = {});
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rdl
