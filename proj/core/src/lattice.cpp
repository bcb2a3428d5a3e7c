#include "rdl/lattice.hpp"

#include <cmath>
#include <sstream>

#include "rdl/errors.hpp"

namespace rdl::lattice {
namespace {

std::string coord_string(UnitCoord c) { return "(" + std::to_string(c.h) + "," + std::to_string(c.l) + ")"; }

void require_present(int h, int l, int height) {
  if (classify(h, l, height) == UnitRole::Absent) {
    throw ConfigError("no convolutional unit at " + coord_string({h, l}));
  }
}

}  // namespace

const char* role_name(UnitRole role) {
  switch (role) {
    case UnitRole::LeftTriangle:
      return "left";
    case UnitRole::RightTriangle:
      return "right";
    case UnitRole::Absent:
      return "absent";
  }
  return "?";
}

Geometry geometry(int n) {
  if (n < 4) throw ConfigError("lattice unit count must be >= 4, got " + std::to_string(n));
  const int root = int(std::lround(std::sqrt(double(n))));
  if (root * root != n) throw ConfigError("lattice unit count must be a perfect square, got " + std::to_string(n));
  return {root, 2 * root - 1};
}

UnitRole classify(int h, int l, int height) {
  const int length = 2 * height - 1;
  if (h < 1 || l < 1 || h > height || l > length) return UnitRole::Absent;
  if (h <= l && l <= height) return UnitRole::LeftTriangle;
  if (h <= 2 * height - l && height < l && l <= length) return UnitRole::RightTriangle;
  return UnitRole::Absent;
}

std::string to_string(const NodeRef& ref) {
  if (ref.kind == NodeRef::Kind::BlockInput) return "x(1,1)";
  return "y" + coord_string(ref.unit);
}

std::vector<NodeRef> dense_input_sources(int h, int l, int height) {
  require_present(h, l, height);
  if (l == 1) return {NodeRef::block_input()};
  std::vector<NodeRef> out;
  if (classify(h, l, height) == UnitRole::LeftTriangle) {
    // [y_h(l-1), x_(h-1)l] unrolled: heights h (or h-1 when l == h) down to 1.
    const int top = (l == h) ? h - 1 : h;
    for (int k = top; k >= 1; --k) out.push_back(NodeRef::output_of(k, l - 1));
  } else {
    // [y_h(l-1), x_(h+1)l] unrolled until the boundary case h' = 2H - l,
    // which contributes y_h'(l-1) and y_(h'+1)(l-1).
    const int top = 2 * height - l + 1;
    for (int k = h; k <= top; ++k) out.push_back(NodeRef::output_of(k, l - 1));
  }
  return out;
}

std::optional<UnitCoord> residual_source(int h, int l, int height) {
  require_present(h, l, height);
  if (l > h) return UnitCoord{h, l - 1};
  return std::nullopt;
}

UnitHyper unit_hyper(int h, int l, int m1, int height) {
  require_present(h, l, height);
  const int scale = 1 << (h - 1);
  const int widest = 1 << (height - 1);
  if (m1 < widest || m1 % widest != 0) {
    throw ConfigError("m1=" + std::to_string(m1) + " must be a positive multiple of 2^(H-1)=" + std::to_string(widest));
  }
  UnitHyper hyper;
  hyper.dilation = scale;
  hyper.out_channels = m1 / scale;
  hyper.kernel = (l % 2 == 1) ? 2 * h - 1 : 1;
  return hyper;
}

const UnitDescriptor& BlockGraph::unit(UnitCoord c) const {
  auto idx = index_of(c);
  if (!idx) throw ConfigError("no convolutional unit at " + coord_string(c));
  return units[*idx];
}

std::optional<std::size_t> BlockGraph::index_of(UnitCoord c) const {
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (units[i].coord == c) return i;
  }
  return std::nullopt;
}

int BlockGraph::channels_of(const NodeRef& ref) const {
  if (ref.kind == NodeRef::Kind::BlockInput) return spec.input_channels;
  return unit(ref.unit).hyper.out_channels;
}

std::size_t BlockGraph::residual_edge_count() const {
  std::size_t n = 0;
  for (const auto& u : units) n += u.residual.has_value() ? 1 : 0;
  return n;
}

int BlockGraph::max_unit_input_channels() const {
  int widest = 0;
  for (const auto& u : units) widest = std::max(widest, u.in_channels);
  return widest;
}

std::string BlockGraph::describe() const {
  std::ostringstream os;
  os << "# lattice N=" << spec.n << " H=" << geom.height << " L=" << geom.length << " m1=" << spec.m1
     << " input=" << spec.input_channels << " lr=" << (spec.local_residual ? 1 : 0) << "\n";
  for (const auto& u : units) {
    os << coord_string(u.coord) << " " << role_name(u.role) << " k=" << u.hyper.kernel << " d=" << u.hyper.dilation
       << " m=" << u.hyper.out_channels << " in=" << u.in_channels << " src=[";
    for (std::size_t i = 0; i < u.sources.size(); ++i) {
      if (i) os << ",";
      os << to_string(u.sources[i]);
    }
    os << "]";
    if (u.residual) {
      os << " res=x" << coord_string(u.residual->from) << (u.residual->projected ? "*proj" : "");
    }
    os << "\n";
  }
  return os.str();
}

BlockGraph build_block_graph(const LatticeSpec& spec) {
  if (spec.input_channels < 1) throw ConfigError("block input must have at least one channel");
  BlockGraph graph;
  graph.spec = spec;
  graph.geom = geometry(spec.n);
  const int height = graph.geom.height;
  for (int l = 1; l <= graph.geom.length; ++l) {
    for (int h = 1; h <= height; ++h) {
      const UnitRole role = classify(h, l, height);
      if (role == UnitRole::Absent) continue;
      UnitDescriptor u;
      u.coord = {h, l};
      u.role = role;
      u.hyper = unit_hyper(h, l, spec.m1, height);
      u.sources = dense_input_sources(h, l, height);
      for (const auto& src : u.sources) u.in_channels += graph.channels_of(src);
      if (spec.local_residual) {
        if (auto from = residual_source(h, l, height)) {
          ResidualLink link;
          link.from = *from;
          link.channels = graph.unit(*from).in_channels;
          link.projected = link.channels != u.hyper.out_channels;
          u.residual = link;
        }
      }
      graph.units.push_back(std::move(u));
    }
  }
  return graph;
}

}  // namespace rdl::lattice
