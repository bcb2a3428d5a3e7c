#include "rdl/network.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "rdl/errors.hpp"
#include "rdl/random.hpp"

namespace rdl {

const char* family_name(Family f) {
  switch (f) {
    case Family::RdlNet:
      return "rdl";
    case Family::ResNet:
      return "resnet";
    case Family::DenseNet:
      return "densenet";
    case Family::DenseRNet:
      return "densernet";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  for (Family f : {Family::RdlNet, Family::ResNet, Family::DenseNet, Family::DenseRNet}) {
    if (name == family_name(f)) return f;
  }
  throw ConfigError("unknown network family '" + name + "' (expected rdl, resnet, densenet or densernet)");
}

void NetworkConfig::validate() const {
  if (blocks < 1) throw ConfigError("block count must be >= 1");
  if (input_bins < 1) throw ConfigError("input_bins must be >= 1");
  if (norm_eps <= 0) throw ConfigError("norm_eps must be positive");
  if (family == Family::RdlNet) {
    const auto geom = lattice::geometry(lattice_units);
    const int widest = 1 << (geom.height - 1);
    if (m1 < widest || m1 % widest != 0) {
      throw ConfigError("m1=" + std::to_string(m1) + " must be a positive multiple of 2^(H-1)=" + std::to_string(widest));
    }
    return;
  }
  if (stem_channels < 1 || resnet_width < 1 || dense_growth < 1) throw ConfigError("baseline widths must be >= 1");
  if (units_per_dense_block < 1 || residual_blocks_per_dense_r < 1) throw ConfigError("baseline unit counts must be >= 1");
  if (baseline_kernel < 1) throw ConfigError("baseline kernel must be >= 1");
  if (max_dilation < 1 || (max_dilation & (max_dilation - 1)) != 0) {
    throw ConfigError("max_dilation must be a power of two");
  }
}

std::string NetworkConfig::to_text() const {
  std::ostringstream os;
  os << "family=" << family_name(family) << "\n"
     << "blocks=" << blocks << "\n"
     << "input_bins=" << input_bins << "\n"
     << "lattice_units=" << lattice_units << "\n"
     << "m1=" << m1 << "\n"
     << "local_residual=" << (local_residual ? 1 : 0) << "\n"
     << "global_dense=" << (global_dense ? 1 : 0) << "\n"
     << "stem_channels=" << stem_channels << "\n"
     << "resnet_width=" << resnet_width << "\n"
     << "dense_growth=" << dense_growth << "\n"
     << "units_per_dense_block=" << units_per_dense_block << "\n"
     << "residual_blocks_per_dense_r=" << residual_blocks_per_dense_r << "\n"
     << "baseline_kernel=" << baseline_kernel << "\n"
     << "max_dilation=" << max_dilation << "\n";
  char eps[64];
  std::snprintf(eps, sizeof eps, "%.17g", norm_eps);
  os << "norm_eps=" << eps << "\n"
     << "init_seed=" << init_seed << "\n";
  return os.str();
}

NetworkConfig NetworkConfig::from_text(const std::string& text) {
  NetworkConfig c;
  std::istringstream is(text);
  std::string line;
  auto to_int = [](const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const long long n = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' has non-integer value '" + v + "'");
    }
  };
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("malformed config line: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "family") c.family = parse_family(value);
    else if (key == "blocks") c.blocks = int(to_int(key, value));
    else if (key == "input_bins") c.input_bins = int(to_int(key, value));
    else if (key == "lattice_units") c.lattice_units = int(to_int(key, value));
    else if (key == "m1") c.m1 = int(to_int(key, value));
    else if (key == "local_residual") c.local_residual = to_int(key, value) != 0;
    else if (key == "global_dense") c.global_dense = to_int(key, value) != 0;
    else if (key == "stem_channels") c.stem_channels = int(to_int(key, value));
    else if (key == "resnet_width") c.resnet_width = int(to_int(key, value));
    else if (key == "dense_growth") c.dense_growth = int(to_int(key, value));
    else if (key == "units_per_dense_block") c.units_per_dense_block = int(to_int(key, value));
    else if (key == "residual_blocks_per_dense_r") c.residual_blocks_per_dense_r = int(to_int(key, value));
    else if (key == "baseline_kernel") c.baseline_kernel = int(to_int(key, value));
    else if (key == "max_dilation") c.max_dilation = int(to_int(key, value));
    else if (key == "norm_eps") c.norm_eps = std::stod(value);
    else if (key == "init_seed") c.init_seed = std::uint64_t(std::stoull(value));
    else throw ConfigError("unknown config key: " + key);
  }
  c.validate();
  return c;
}

// Appends graph nodes and registers their parameters with deterministic
// initialization (uniform in +-1/sqrt(fan_in) for weights, zero biases,
// unit norm gains).
class GraphBuilder {
 public:
  explicit GraphBuilder(NetworkModel& model) : model_(model), rng_(model.config_.init_seed) {}

  int input(int channels) {
    GraphNode n;
    n.kind = GraphNode::Kind::Input;
    n.name = "input";
    n.in_channels = n.out_channels = channels;
    return push(std::move(n));
  }

  int width(int node) const { return model_.graph_.at(std::size_t(node)).out_channels; }

  int conv_unit(const std::string& name, int src, int out_channels, int kernel, int dilation) {
    GraphNode n;
    n.kind = GraphNode::Kind::ConvUnit;
    n.name = name;
    n.inputs = {src};
    n.in_channels = width(src);
    n.out_channels = out_channels;
    n.kernel = kernel;
    n.dilation = dilation;
    const auto cin = std::size_t(n.in_channels);
    const auto cout = std::size_t(out_channels);
    n.params.push_back(&constant(name + "/norm/gain", {cin}, Real(1)));
    n.params.push_back(&constant(name + "/norm/shift", {cin}, Real(0)));
    n.params.push_back(&uniform(name + "/conv/kernel", {std::size_t(kernel), cin, cout}, kernel * n.in_channels));
    n.params.push_back(&constant(name + "/conv/bias", {cout}, Real(0)));
    return push(std::move(n));
  }

  int projection(const std::string& name, int src, int out_channels) {
    GraphNode n;
    n.kind = GraphNode::Kind::Projection;
    n.name = name;
    n.inputs = {src};
    n.in_channels = width(src);
    n.out_channels = out_channels;
    n.params.push_back(
        &uniform(name + "/kernel", {1, std::size_t(n.in_channels), std::size_t(out_channels)}, n.in_channels));
    return push(std::move(n));
  }

  int dense(const std::string& name, int src, int out_channels) {
    GraphNode n;
    n.kind = GraphNode::Kind::Dense;
    n.name = name;
    n.inputs = {src};
    n.in_channels = width(src);
    n.out_channels = out_channels;
    n.params.push_back(&uniform(name + "/weights", {std::size_t(n.in_channels), std::size_t(out_channels)},
                                n.in_channels));
    n.params.push_back(&constant(name + "/bias", {std::size_t(out_channels)}, Real(0)));
    return push(std::move(n));
  }

  int add(const std::string& name, int a, int b) {
    if (width(a) != width(b)) throw std::logic_error("add of mismatched widths at " + name);
    GraphNode n;
    n.kind = GraphNode::Kind::Add;
    n.name = name;
    n.inputs = {a, b};
    n.in_channels = n.out_channels = width(a);
    return push(std::move(n));
  }

  int concat(const std::string& name, const std::vector<int>& parts) {
    if (parts.size() == 1) return parts.front();
    GraphNode n;
    n.kind = GraphNode::Kind::Concat;
    n.name = name;
    n.inputs = parts;
    for (int p : parts) n.out_channels += width(p);
    n.in_channels = n.out_channels;
    return push(std::move(n));
  }

  int sigmoid(const std::string& name, int src) {
    GraphNode n;
    n.kind = GraphNode::Kind::Sigmoid;
    n.name = name;
    n.inputs = {src};
    n.in_channels = n.out_channels = width(src);
    return push(std::move(n));
  }

  // body + skip, projecting the skip path when widths differ.
  int residual(const std::string& name, int body, int skip) {
    if (width(skip) != width(body)) skip = projection(name + "/residual/proj", skip, width(body));
    return add(name + "/residual", body, skip);
  }

  int output_layer(int src) {
    const int logits = dense("output", src, model_.config_.input_bins);
    return sigmoid("output/sigmoid", logits);
  }

  void mark_block_input(int node) { model_.block_inputs_.push_back(width(node)); }
  void add_lattice(lattice::BlockGraph g) { model_.lattices_.push_back(std::move(g)); }

 private:
  int push(GraphNode n) {
    model_.graph_.push_back(std::move(n));
    return int(model_.graph_.size()) - 1;
  }

  Parameter& constant(const std::string& name, Shape shape, Real value) {
    Parameter& p = model_.params_.add(name, std::move(shape));
    p.value.fill(value);
    return p;
  }

  Parameter& uniform(const std::string& name, Shape shape, int fan_in) {
    Parameter& p = model_.params_.add(name, std::move(shape));
    const double bound = 1.0 / std::sqrt(double(fan_in));
    for (auto& v : p.value.values()) v = Real(rng_.uniform(-bound, bound));
    return p;
  }

  NetworkModel& model_;
  Rng rng_;
};

namespace {

int cycled_dilation(int index, int max_dilation) {
  int steps = 0;
  while ((1 << steps) < max_dilation) ++steps;
  return 1 << (index % (steps + 1));
}

std::string unit_name(int block, int h, int l) {
  return "block" + std::to_string(block) + "/unit" + std::to_string(h) + "_" + std::to_string(l);
}

void build_rdl_graph(GraphBuilder& g, const NetworkConfig& c) {
  int x = g.input(c.input_bins);
  int y = x;
  for (int b = 1; b <= c.blocks; ++b) {
    g.mark_block_input(x);
    lattice::LatticeSpec spec;
    spec.n = c.lattice_units;
    spec.m1 = c.m1;
    spec.input_channels = g.width(x);
    spec.local_residual = c.local_residual;
    lattice::BlockGraph lat = lattice::build_block_graph(spec);

    std::map<lattice::UnitCoord, int> unit_input;
    std::map<lattice::UnitCoord, int> unit_output;
    for (const auto& u : lat.units) {
      std::vector<int> parts;
      for (const auto& src : u.sources) {
        parts.push_back(src.kind == lattice::NodeRef::Kind::BlockInput ? x : unit_output.at(src.unit));
      }
      const std::string name = unit_name(b, u.coord.h, u.coord.l);
      const int in = g.concat(name + "/input", parts);
      unit_input[u.coord] = in;
      int out = g.conv_unit(name, in, u.hyper.out_channels, u.hyper.kernel, u.hyper.dilation);
      if (u.residual) out = g.residual(name, out, unit_input.at(u.residual->from));
      unit_output[u.coord] = out;
    }
    y = unit_output.at(lat.output());
    g.add_lattice(std::move(lat));
    if (c.global_dense) x = g.concat("block" + std::to_string(b) + "/global", {x, y});
    else x = y;
  }
  // With global dense links the output layer reads x^(B+1)_11 = [x^B_11, y^B_1L].
  g.output_layer(c.global_dense ? x : y);
}

void build_resnet_graph(GraphBuilder& g, const NetworkConfig& c) {
  int x = g.dense("stem", g.input(c.input_bins), c.stem_channels);
  for (int b = 1; b <= c.blocks; ++b) {
    g.mark_block_input(x);
    const int d = cycled_dilation(b - 1, c.max_dilation);
    const std::string name = "block" + std::to_string(b);
    const int u1 = g.conv_unit(name + "/unit1", x, c.resnet_width, c.baseline_kernel, d);
    const int u2 = g.conv_unit(name + "/unit2", u1, c.resnet_width, c.baseline_kernel, d);
    x = g.residual(name, u2, x);
  }
  g.output_layer(x);
}

void build_densenet_graph(GraphBuilder& g, const NetworkConfig& c) {
  std::vector<int> features = {g.dense("stem", g.input(c.input_bins), c.stem_channels)};
  for (int b = 1; b <= c.blocks; ++b) {
    const std::string block = "block" + std::to_string(b);
    g.mark_block_input(g.concat(block + "/input", features));
    for (int j = 0; j < c.units_per_dense_block; ++j) {
      const std::string name = block + "/unit" + std::to_string(j + 1);
      const int in = g.concat(name + "/input", features);
      features.push_back(g.conv_unit(name, in, c.dense_growth, c.baseline_kernel, cycled_dilation(j, c.max_dilation)));
    }
  }
  g.output_layer(g.concat("features", features));
}

void build_densernet_graph(GraphBuilder& g, const NetworkConfig& c) {
  std::vector<int> features = {g.input(c.input_bins)};
  for (int b = 1; b <= c.blocks; ++b) {
    const std::string block = "block" + std::to_string(b);
    g.mark_block_input(g.concat(block + "/input", features));
    for (int r = 0; r < c.residual_blocks_per_dense_r; ++r) {
      const std::string name = block + "/res" + std::to_string(r + 1);
      const int d = cycled_dilation(r, c.max_dilation);
      const int in = g.concat(name + "/input", features);
      const int u1 = g.conv_unit(name + "/unit1", in, c.dense_growth, c.baseline_kernel, d);
      const int u2_in = g.concat(name + "/unit2/input", {in, u1});
      const int u2 = g.conv_unit(name + "/unit2", u2_in, c.dense_growth, c.baseline_kernel, d);
      features.push_back(g.residual(name, u2, in));
    }
  }
  g.output_layer(g.concat("features", features));
}

}  // namespace

NetworkModel::NetworkModel(NetworkConfig config) : config_(std::move(config)) {
  config_.validate();
  GraphBuilder g(*this);
  switch (config_.family) {
    case Family::RdlNet:
      build_rdl_graph(g, config_);
      break;
    case Family::ResNet:
      build_resnet_graph(g, config_);
      break;
    case Family::DenseNet:
      build_densenet_graph(g, config_);
      break;
    case Family::DenseRNet:
      build_densernet_graph(g, config_);
      break;
  }
}

Var NetworkModel::forward(Tape& tape, const Var& spectrogram) const {
  const Tensor& in = spectrogram.value();
  if (in.rank() != 2 || in.cols() != std::size_t(config_.input_bins)) {
    throw ConfigError("network expects {frames, " + std::to_string(config_.input_bins) + "} input, got " +
                      shape_string(in.shape()));
  }
  if (!in.all_finite()) throw NumericError("network input contains NaN or Inf");
  const Real eps = Real(config_.norm_eps);
  std::vector<Var> vals(graph_.size());
  for (std::size_t i = 0; i < graph_.size(); ++i) {
    const GraphNode& n = graph_[i];
    auto arg = [&](std::size_t k) -> const Var& { return vals[std::size_t(n.inputs[k])]; };
    switch (n.kind) {
      case GraphNode::Kind::Input:
        vals[i] = spectrogram;
        break;
      case GraphNode::Kind::ConvUnit: {
        const Var normed = ops::layer_norm(arg(0), tape.parameter(*n.params[0]), tape.parameter(*n.params[1]), eps);
        vals[i] = ops::causal_conv1d(ops::relu(normed), tape.parameter(*n.params[2]), tape.parameter(*n.params[3]),
                                     n.dilation);
        break;
      }
      case GraphNode::Kind::Projection:
        vals[i] = ops::causal_conv1d(arg(0), tape.parameter(*n.params[0]), Var{}, 1);
        break;
      case GraphNode::Kind::Dense:
        vals[i] = ops::dense(arg(0), tape.parameter(*n.params[0]), tape.parameter(*n.params[1]));
        break;
      case GraphNode::Kind::Add:
        vals[i] = ops::add(arg(0), arg(1));
        break;
      case GraphNode::Kind::Concat: {
        std::vector<Var> parts;
        parts.reserve(n.inputs.size());
        for (int src : n.inputs) parts.push_back(vals[std::size_t(src)]);
        vals[i] = ops::concat_channels(parts);
        break;
      }
      case GraphNode::Kind::Sigmoid:
        vals[i] = ops::sigmoid(arg(0));
        break;
    }
  }
  return vals.back();
}

Tensor NetworkModel::predict(const Tensor& spectrogram) const {
  Tape tape;
  return forward(tape, tape.constant(spectrogram)).value();
}

NetworkModel build_network(const NetworkConfig& config) { return NetworkModel(config); }

namespace {
NetworkModel build_checked(const NetworkConfig& config, Family expected) {
  if (config.family != expected) {
    throw ConfigError(std::string("config family is ") + family_name(config.family) + ", expected " +
                      family_name(expected));
  }
  return NetworkModel(config);
}
}  // namespace

NetworkModel build_rdlnet(const NetworkConfig& config) { return build_checked(config, Family::RdlNet); }
NetworkModel build_resnet(const NetworkConfig& config) { return build_checked(config, Family::ResNet); }
NetworkModel build_densenet(const NetworkConfig& config) { return build_checked(config, Family::DenseNet); }
NetworkModel build_densernet(const NetworkConfig& config) { return build_checked(config, Family::DenseRNet); }

const char* ablation_name(AblationVariant v) {
  switch (v) {
    case AblationVariant::Baseline:
      return "baseline";
    case AblationVariant::LocalResidual:
      return "lr";
    case AblationVariant::GlobalDense:
      return "gd";
    case AblationVariant::Both:
      return "lr-gd";
  }
  return "?";
}

NetworkConfig ablation_config(AblationVariant which, int blocks, int n, int m1) {
  NetworkConfig c;
  c.family = Family::RdlNet;
  c.blocks = blocks;
  c.lattice_units = n;
  c.m1 = m1;
  c.local_residual = which == AblationVariant::LocalResidual || which == AblationVariant::Both;
  c.global_dense = which == AblationVariant::GlobalDense || which == AblationVariant::Both;
  return c;
}

NetworkModel build_ablation_variant(AblationVariant which, int blocks, int n, int m1) {
  return NetworkModel(ablation_config(which, blocks, n, m1));
}

}  // namespace rdl
