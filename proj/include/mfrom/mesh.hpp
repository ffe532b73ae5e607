#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mfrom {

enum class Layout { heat2d, advdiff9d };

std::string to_string(Layout layout);
Layout parse_layout(const std::string &name);

// Boundary tags. A node may carry several (corners), so node tags are bit masks.
enum class BoundaryTag : std::uint8_t {
  top = 1 << 0,
  base = 1 << 1,
  side = 1 << 2,
  inlet = 1 << 3,
  outlet = 1 << 4,
  wall = 1 << 5,
};

std::string to_string(BoundaryTag tag);

struct BoundaryEdge {
  std::array<int, 2> nodes;
  BoundaryTag tag;
};

// Structured P1 triangulation of the unit square.
//
// Each grid cell is cut along its lower-left/upper-right diagonal. For the
// heat2d layout subdomain 0 is the centered conductivity block and 1 the
// rest; for advdiff9d the labels 1..9 number a 3x3 block layout row by row
// from the bottom-left, so 5 is the center block.
struct Mesh {
  Layout layout = Layout::heat2d;
  int nx = 0;
  int ny = 0;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> subdomain;        // per triangle
  std::vector<double> h_elem;        // per triangle, longest edge
  std::vector<std::uint8_t> node_tags;  // per node, BoundaryTag bit mask
  std::vector<BoundaryEdge> boundary_edges;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  bool has_tag(int node, BoundaryTag tag) const {
    return (node_tags[static_cast<std::size_t>(node)] & static_cast<std::uint8_t>(tag)) != 0;
  }

  // Signed area of triangle t (positive for counter-clockwise ordering).
  double area(int t) const;
  Eigen::Vector2d centroid(int t) const;

  // Throws AssemblyError when a triangle is degenerate or an index is out of range.
  void validate() const;
};

struct MeshOptions {
  // Side length of the centered heat2d block.
  double block_side = 0.5;
};

// Throws ConfigError when nx, ny < 2 or when the subdomain edges would not
// fall on mesh lines (heat2d: block edges; advdiff9d: nx, ny divisible by 3).
Mesh build_unit_square_mesh(int nx, int ny, Layout layout, const MeshOptions &opts = {});

// Structured square mesh whose node count is closest to `target_nodes` among
// the sizes allowed by the layout's divisibility constraint.
Mesh build_mesh_for_node_target(int target_nodes, Layout layout, const MeshOptions &opts = {});

// Plain text debug format: header line, node table, triangle table, node tags.
void write_mesh(std::ostream &os, const Mesh &mesh);
Mesh read_mesh(std::istream &is);

} // namespace mfrom
