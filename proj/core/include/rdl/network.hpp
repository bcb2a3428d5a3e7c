#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdl/autograd.hpp"
#include "rdl/lattice.hpp"
#include "rdl/tensor.hpp"

namespace rdl {

enum class Family { RdlNet, ResNet, DenseNet, DenseRNet };

const char* family_name(Family f);
Family parse_family(const std::string& name);

struct NetworkConfig {
  Family family = Family::RdlNet;
  int blocks = 3;
  int input_bins = 257;

  // RDL-Net
  int lattice_units = 16;
  int m1 = 64;
  bool local_residual = true;
  bool global_dense = true;

  // Baselines
  int stem_channels = 64;
  int resnet_width = 64;
  int dense_growth = 24;
  int units_per_dense_block = 4;
  int residual_blocks_per_dense_r = 4;
  int baseline_kernel = 3;
  int max_dilation = 8;

  double norm_eps = 1e-5;
  std::uint64_t init_seed = 1;

  void validate() const;

  // Canonical "key=value" lines, one per field, fixed order.
  std::string to_text() const;
  static NetworkConfig from_text(const std::string& text);

  bool operator==(const NetworkConfig&) const = default;
};

// One node of a model's static dataflow graph. Each forward pass
// interprets these nodes in order; analysis walks the same list.
struct GraphNode {
  enum class Kind {
    Input,       // the T x input_bins spectrogram
    ConvUnit,    // layer norm -> ReLU -> causal dilated convolution
    Projection,  // kernel-1 convolution without bias
    Dense,       // per-frame affine map
    Add,
    Concat,
    Sigmoid,
  };
  Kind kind = Kind::Input;
  std::string name;
  std::vector<int> inputs;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int dilation = 1;
  // ConvUnit: norm gain, norm shift, kernel, bias. Projection: kernel.
  // Dense: weights, bias.
  std::vector<Parameter*> params;
};

class NetworkModel {
 public:
  explicit NetworkModel(NetworkConfig config);
  NetworkModel(NetworkModel&&) = default;
  NetworkModel& operator=(NetworkModel&&) = default;

  const NetworkConfig& config() const { return config_; }
  ParameterRegistry& parameters() { return params_; }
  const ParameterRegistry& parameters() const { return params_; }
  const std::vector<GraphNode>& graph() const { return graph_; }

  // Width of each block's input, in block order.
  const std::vector<int>& block_input_channels() const { return block_inputs_; }
  // RDL only: the lattice every block instantiates (block 1's input width).
  const std::vector<lattice::BlockGraph>& lattices() const { return lattices_; }

  // Records the full network on `tape`. Input is {frames, input_bins};
  // output is {frames, input_bins} in (0, 1).
  Var forward(Tape& tape, const Var& spectrogram) const;
  Tensor predict(const Tensor& spectrogram) const;

 private:
  friend class GraphBuilder;

  NetworkConfig config_;
  ParameterRegistry params_;
  std::vector<GraphNode> graph_;
  std::vector<int> block_inputs_;
  std::vector<lattice::BlockGraph> lattices_;
};

NetworkModel build_network(const NetworkConfig& config);
NetworkModel build_rdlnet(const NetworkConfig& config);
NetworkModel build_resnet(const NetworkConfig& config);
NetworkModel build_densenet(const NetworkConfig& config);
NetworkModel build_densernet(const NetworkConfig& config);

enum class AblationVariant { Baseline, LocalResidual, GlobalDense, Both };

const char* ablation_name(AblationVariant v);
NetworkConfig ablation_config(AblationVariant which, int blocks = 5, int n = 16, int m1 = 64);
NetworkModel build_ablation_variant(AblationVariant which, int blocks = 5, int n = 16, int m1 = 64);

}  // namespace rdl
