#include "mfrom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "mfrom/errors.hpp"

namespace mfrom {

std::string to_string(Layout layout) {
  return layout == Layout::heat2d ? "heat2d" : "advdiff9d";
}

Layout parse_layout(const std::string &name) {
  if (name == "heat2d")
    return Layout::heat2d;
  if (name == "advdiff9d")
    return Layout::advdiff9d;
  throw ConfigError("unknown problem layout '" + name + "' (expected heat2d or advdiff9d)");
}

std::string to_string(BoundaryTag tag) {
  switch (tag) {
  case BoundaryTag::top: return "top";
  case BoundaryTag::base: return "base";
  case BoundaryTag::side: return "side";
  case BoundaryTag::inlet: return "inlet";
  case BoundaryTag::outlet: return "outlet";
  case BoundaryTag::wall: return "wall";
  }
  return "?";
}

double Mesh::area(int t) const {
  const auto &tri = triangles[static_cast<std::size_t>(t)];
  const Eigen::Vector2d a = nodes[tri[0]], b = nodes[tri[1]], c = nodes[tri[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

Eigen::Vector2d Mesh::centroid(int t) const {
  const auto &tri = triangles[static_cast<std::size_t>(t)];
  return (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
}

void Mesh::validate() const {
  const int n = num_nodes();
  if (subdomain.size() != triangles.size() || h_elem.size() != triangles.size())
    throw AssemblyError("mesh: per-triangle arrays do not match the triangle count");
  if (node_tags.size() != nodes.size())
    throw AssemblyError("mesh: node tag array does not match the node count");
  for (int t = 0; t < num_triangles(); ++t) {
    for (int v : triangles[static_cast<std::size_t>(t)])
      if (v < 0 || v >= n)
        throw AssemblyError("mesh: triangle " + std::to_string(t) + " has an out-of-range node");
    if (!(area(t) > 0.0))
      throw AssemblyError("mesh: triangle " + std::to_string(t) + " has non-positive area");
  }
}

namespace {

bool on_grid_line(double coord, int cells) {
  const double s = coord * cells;
  return std::abs(s - std::round(s)) < 1e-9;
}

int label_for(Layout layout, const Eigen::Vector2d &c, double block_side) {
  if (layout == Layout::heat2d) {
    const double lo = 0.5 - 0.5 * block_side, hi = 0.5 + 0.5 * block_side;
    const bool inside = c.x() > lo && c.x() < hi && c.y() > lo && c.y() < hi;
    return inside ? 0 : 1;
  }
  const int col = std::min(2, static_cast<int>(c.x() * 3.0));
  const int row = std::min(2, static_cast<int>(c.y() * 3.0));
  return 1 + col + 3 * row;
}

double longest_edge(const Eigen::Vector2d &a, const Eigen::Vector2d &b, const Eigen::Vector2d &c) {
  return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
}

} // namespace

Mesh build_unit_square_mesh(int nx, int ny, Layout layout, const MeshOptions &opts) {
  if (nx < 2 || ny < 2)
    throw ConfigError("mesh: nx and ny must be at least 2");
  if (layout == Layout::heat2d) {
    if (!(opts.block_side > 0.0 && opts.block_side < 1.0))
      throw ConfigError("mesh: heat2d block side must lie in (0, 1)");
    const double lo = 0.5 - 0.5 * opts.block_side, hi = 0.5 + 0.5 * opts.block_side;
    if (!on_grid_line(lo, nx) || !on_grid_line(hi, nx) || !on_grid_line(lo, ny) ||
        !on_grid_line(hi, ny)) {
      std::ostringstream msg;
      msg << "mesh: heat2d block edges [" << lo << ", " << hi
          << "] must lie on mesh lines (nx, ny divisible by 4 for the default block side 0.5); got nx="
          << nx << ", ny=" << ny;
      throw ConfigError(msg.str());
    }
  } else if (nx % 3 != 0 || ny % 3 != 0) {
    throw ConfigError("mesh: advdiff9d requires nx and ny divisible by 3; got nx=" +
                      std::to_string(nx) + ", ny=" + std::to_string(ny));
  }

  Mesh mesh;
  mesh.layout = layout;
  mesh.nx = nx;
  mesh.ny = ny;
  const auto node_id = [nx](int i, int j) { return j * (nx + 1) + i; };

  mesh.nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  mesh.node_tags.assign(static_cast<std::size_t>((nx + 1) * (ny + 1)), 0);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.nodes.emplace_back(static_cast<double>(i) / nx, static_cast<double>(j) / ny);

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = node_id(i, j), b = node_id(i + 1, j), c = node_id(i + 1, j + 1),
                d = node_id(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
    mesh.subdomain.push_back(label_for(layout, mesh.centroid(t), opts.block_side));
    mesh.h_elem.push_back(longest_edge(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]));
  }

  // Boundary edges, tagged per layout.
  const BoundaryTag bottom_tag = layout == Layout::heat2d ? BoundaryTag::base : BoundaryTag::wall;
  const BoundaryTag top_tag = layout == Layout::heat2d ? BoundaryTag::top : BoundaryTag::wall;
  const BoundaryTag left_tag = layout == Layout::heat2d ? BoundaryTag::side : BoundaryTag::inlet;
  const BoundaryTag right_tag = layout == Layout::heat2d ? BoundaryTag::side : BoundaryTag::outlet;
  const auto add_edge = [&mesh](int a, int b, BoundaryTag tag) {
    mesh.boundary_edges.push_back({{a, b}, tag});
    mesh.node_tags[static_cast<std::size_t>(a)] |= static_cast<std::uint8_t>(tag);
    mesh.node_tags[static_cast<std::size_t>(b)] |= static_cast<std::uint8_t>(tag);
  };
  for (int i = 0; i < nx; ++i) {
    add_edge(node_id(i, 0), node_id(i + 1, 0), bottom_tag);
    add_edge(node_id(i + 1, ny), node_id(i, ny), top_tag);
  }
  for (int j = 0; j < ny; ++j) {
    add_edge(node_id(0, j + 1), node_id(0, j), left_tag);
    add_edge(node_id(nx, j), node_id(nx, j + 1), right_tag);
  }
  mesh.validate();
  return mesh;
}

Mesh build_mesh_for_node_target(int target_nodes, Layout layout, const MeshOptions &opts) {
  if (target_nodes < 9)
    throw ConfigError("mesh: node target must be at least 9");
  const int step = layout == Layout::heat2d ? 4 : 3;
  int n = step;
  while ((n + 1) * (n + 1) < target_nodes)
    n += step;
  // Pick whichever neighbouring admissible size lands closer to the target.
  if (n > step) {
    const int below = n - step;
    if (target_nodes - (below + 1) * (below + 1) < (n + 1) * (n + 1) - target_nodes)
      n = below;
  }
  for (;; n += step) {
    try {
      return build_unit_square_mesh(n, n, layout, opts);
    } catch (const ConfigError &) {
      if (n > 4096)
        throw;
    }
  }
}

void write_mesh(std::ostream &os, const Mesh &mesh) {
  os.precision(17);
  os << "mfrom-mesh " << to_string(mesh.layout) << ' ' << mesh.nx << ' ' << mesh.ny << '\n';
  os << "nodes " << mesh.num_nodes() << '\n';
  for (int i = 0; i < mesh.num_nodes(); ++i)
    os << mesh.nodes[static_cast<std::size_t>(i)].x() << ' '
       << mesh.nodes[static_cast<std::size_t>(i)].y() << ' '
       << static_cast<int>(mesh.node_tags[static_cast<std::size_t>(i)]) << '\n';
  os << "triangles " << mesh.num_triangles() << '\n';
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
    os << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << mesh.subdomain[static_cast<std::size_t>(t)]
       << '\n';
  }
  os << "edges " << mesh.boundary_edges.size() << '\n';
  for (const auto &e : mesh.boundary_edges)
    os << e.nodes[0] << ' ' << e.nodes[1] << ' ' << static_cast<int>(e.tag) << '\n';
}

Mesh read_mesh(std::istream &is) {
  Mesh mesh;
  std::string word, layout;
  std::size_t count = 0;
  if (!(is >> word >> layout >> mesh.nx >> mesh.ny) || word != "mfrom-mesh")
    throw ConfigError("read_mesh: missing header");
  mesh.layout = parse_layout(layout);
  if (!(is >> word >> count) || word != "nodes")
    throw ConfigError("read_mesh: missing node table");
  mesh.nodes.resize(count);
  mesh.node_tags.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    int tags = 0;
    is >> mesh.nodes[i].x() >> mesh.nodes[i].y() >> tags;
    mesh.node_tags[i] = static_cast<std::uint8_t>(tags);
  }
  if (!(is >> word >> count) || word != "triangles")
    throw ConfigError("read_mesh: missing triangle table");
  mesh.triangles.resize(count);
  mesh.subdomain.resize(count);
  for (std::size_t t = 0; t < count; ++t)
    is >> mesh.triangles[t][0] >> mesh.triangles[t][1] >> mesh.triangles[t][2] >> mesh.subdomain[t];
  if (!(is >> word >> count) || word != "edges")
    throw ConfigError("read_mesh: missing edge table");
  mesh.boundary_edges.resize(count);
  for (auto &e : mesh.boundary_edges) {
    int tag = 0;
    is >> e.nodes[0] >> e.nodes[1] >> tag;
    e.tag = static_cast<BoundaryTag>(tag);
  }
  if (!is)
    throw ConfigError("read_mesh: truncated input");
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
    for (int v : tri)
      if (v < 0 || v >= mesh.num_nodes())
        throw AssemblyError("read_mesh: triangle " + std::to_string(t) + " has an out-of-range node");
    mesh.h_elem.push_back(longest_edge(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]));
  }
  mesh.validate();
  return mesh;
}

} // namespace mfrom
