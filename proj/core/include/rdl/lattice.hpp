#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace rdl::lattice {

struct UnitCoord {
  int h = 1;  // height, 1..H
  int l = 1;  // length, 1..L
  auto operator<=>(const UnitCoord&) const = default;
};

enum class UnitRole { LeftTriangle, RightTriangle, Absent };

const char* role_name(UnitRole role);

struct Geometry {
  int height = 0;  // H = sqrt(N)
  int length = 0;  // L = 2 sqrt(N) - 1
};

// Throws ConfigError unless n is a perfect square >= 4.
Geometry geometry(int n);

UnitRole classify(int h, int l, int height);

// A node whose output feeds a dense aggregation: either the block input
// x_11 or the residual output y_hl of a unit.
struct NodeRef {
  enum class Kind { BlockInput, UnitOutput };
  Kind kind = Kind::BlockInput;
  UnitCoord unit;

  static NodeRef block_input() { return {Kind::BlockInput, {}}; }
  static NodeRef output_of(int h, int l) { return {Kind::UnitOutput, {h, l}}; }
  bool operator==(const NodeRef&) const = default;
};

std::string to_string(const NodeRef& ref);

// Flat, ordered concatenation list forming x_hl. Throws ConfigError for
// absent units.
std::vector<NodeRef> dense_input_sources(int h, int l, int height);

// The unit whose aggregated input x_h(l-1) is added to y_hl, present iff l > h.
std::optional<UnitCoord> residual_source(int h, int l, int height);

struct UnitHyper {
  int kernel = 1;
  int dilation = 1;
  int out_channels = 0;
};

// d = 2^(h-1), m_h = m1 / 2^(h-1), k = 2h-1 on odd lengths and 1 on even ones.
UnitHyper unit_hyper(int h, int l, int m1, int height);

struct LatticeSpec {
  int n = 16;
  int m1 = 64;
  int input_channels = 257;
  bool local_residual = true;
};

struct ResidualLink {
  UnitCoord from;    // the unit whose aggregated input is reused
  int channels = 0;  // width of x_h(l-1)
  bool projected = false;
};

struct UnitDescriptor {
  UnitCoord coord;
  UnitRole role = UnitRole::Absent;
  UnitHyper hyper;
  int in_channels = 0;
  std::vector<NodeRef> sources;
  std::optional<ResidualLink> residual;
};

// Dataflow of one block. Units are stored in evaluation order (increasing
// length; within a length every unit comes after the units its input
// recursion refers to).
struct BlockGraph {
  LatticeSpec spec;
  Geometry geom;
  std::vector<UnitDescriptor> units;

  const UnitDescriptor& unit(UnitCoord c) const;
  std::optional<std::size_t> index_of(UnitCoord c) const;
  UnitCoord output() const { return {1, geom.length}; }
  int output_channels() const { return spec.m1; }
  int channels_of(const NodeRef& ref) const;
  std::size_t residual_edge_count() const;
  int max_unit_input_channels() const;

  // One line per unit: coordinate, role, k, d, m, input width, sources,
  // residual link.
  std::string describe() const;
};

BlockGraph build_block_graph(const LatticeSpec& spec);

}  // namespace rdl::lattice
