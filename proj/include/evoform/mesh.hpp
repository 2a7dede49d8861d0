#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "evoform/expression.hpp"

namespace evoform {

using Face = std::array<std::uint32_t, 3>;

struct Mesh {
  std::vector<Vertex> vertices;
  std::vector<Face> faces;  // 0-based

  // Throws kMalformedMesh on out-of-range indices or non-finite vertices.
  void validate() const;

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

// Reads `v` and `f` records; everything else is ignored. Face entries may
// carry `/`-separated attributes, and polygons are fan-triangulated.
Mesh load_obj(std::string_view text);
Mesh load_obj_file(const std::string& path);

// `v` lines with 6 fractional digits, then 1-based `f` lines.
std::string export_obj(const Mesh& mesh);

Mesh displace_mesh(const Mesh& mesh, const ExpressionTree& tree,
                   ChannelMask channels, TimeParam t);

// Procedural test meshes, all centred on the origin.
Mesh make_uv_sphere(int rings = 12, int segments = 16, double radius = 1.0);
Mesh make_cube(double half_extent = 1.0);
Mesh make_cylinder(int segments = 16, double radius = 1.0,
                   double height = 2.0);

// "sphere", "cube" or "cylinder"; throws kNotFound otherwise.
Mesh builtin_mesh(std::string_view name);

}  // namespace evoform
