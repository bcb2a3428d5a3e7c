#include "rdl/analysis.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace rdl {
namespace {

LayerCost cost_of(const GraphNode& n) {
  const std::uint64_t cin = std::uint64_t(n.in_channels);
  const std::uint64_t cout = std::uint64_t(n.out_channels);
  LayerCost c;
  c.name = n.name;
  for (const Parameter* p : n.params) c.params += p->value.size();
  switch (n.kind) {
    case GraphNode::Kind::ConvUnit:
      // norm + ReLU per input element, then the convolution and its bias.
      c.flops = cin + cin + std::uint64_t(n.kernel) * cin * cout + cout;
      break;
    case GraphNode::Kind::Projection:
      c.flops = cin * cout;
      break;
    case GraphNode::Kind::Dense:
      c.flops = cin * cout + cout;
      break;
    case GraphNode::Kind::Add:
    case GraphNode::Kind::Sigmoid:
      c.flops = cout;
      break;
    case GraphNode::Kind::Input:
    case GraphNode::Kind::Concat:
      break;
  }
  return c;
}

}  // namespace

std::vector<LayerCost> layer_costs(const NetworkModel& model) {
  std::vector<LayerCost> out;
  for (const auto& n : model.graph()) {
    if (n.kind == GraphNode::Kind::Input || n.kind == GraphNode::Kind::Concat) continue;
    out.push_back(cost_of(n));
  }
  return out;
}

std::uint64_t count_params(const NetworkModel& model) {
  std::uint64_t total = 0;
  for (const auto& n : model.graph()) total += cost_of(n).params;
  return total;
}

std::uint64_t count_flops_per_frame(const NetworkModel& model) {
  std::uint64_t total = 0;
  for (const auto& n : model.graph()) total += cost_of(n).flops;
  return total;
}

int receptive_field(const NetworkModel& model) {
  const auto& graph = model.graph();
  std::vector<int> past(graph.size(), 0);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    int reach = 0;
    for (int src : graph[i].inputs) reach = std::max(reach, past[std::size_t(src)]);
    if (graph[i].kind == GraphNode::Kind::ConvUnit) reach += (graph[i].kernel - 1) * graph[i].dilation;
    past[i] = reach;
  }
  return past.back() + 1;
}

AnalysisReport analyze(const NetworkModel& model) {
  AnalysisReport r;
  r.config = model.config();
  r.layers = layer_costs(model);
  r.total_params = count_params(model);
  r.flops_per_frame = count_flops_per_frame(model);
  r.receptive_field_frames = receptive_field(model);
  return r;
}

std::string AnalysisReport::to_text() const {
  std::size_t width = 4;
  for (const auto& l : layers) width = std::max(width, l.name.size());
  std::ostringstream os;
  os << "family: " << family_name(config.family) << "\n"
     << "blocks: " << config.blocks << "\n";
  if (config.family == Family::RdlNet) {
    os << "lattice units: " << config.lattice_units << "  m1: " << config.m1
       << "  local residual: " << (config.local_residual ? "on" : "off")
       << "  global dense: " << (config.global_dense ? "on" : "off") << "\n";
  }
  os << "total params: " << total_params << "\n"
     << "flops per frame: " << flops_per_frame << "\n"
     << "receptive field: " << receptive_field_frames << " frames\n\n";
  os << std::left << std::setw(int(width)) << "unit" << "  " << std::right << std::setw(12) << "params" << "  "
     << std::setw(12) << "flops" << "\n";
  for (const auto& l : layers) {
    os << std::left << std::setw(int(width)) << l.name << "  " << std::right << std::setw(12) << l.params << "  "
       << std::setw(12) << l.flops << "\n";
  }
  return os.str();
}

std::string AnalysisReport::to_csv() const {
  std::ostringstream os;
  os << "unit,params,flops\n";
  for (const auto& l : layers) os << l.name << "," << l.params << "," << l.flops << "\n";
  os << "total," << total_params << "," << flops_per_frame << "\n";
  return os.str();
}

}  // namespace rdl
