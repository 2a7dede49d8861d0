#include "evoform/mesh.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "evoform/error.hpp"
#include "evoform/format.hpp"

namespace evoform {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_coord(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                       ": bad vertex coordinate '" +
                                       std::string(tok) + "'");
  }
  return v;
}

std::uint32_t parse_index(std::string_view tok, std::size_t vertex_count,
                          std::size_t line_no) {
  const std::string_view head = tok.substr(0, tok.find('/'));
  long long idx = 0;
  auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (ec != std::errc() || ptr != head.data() + head.size()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                       ": bad face index '" + std::string(tok) +
                                       "'");
  }
  // Negative indices count back from the most recent vertex.
  const long long resolved =
      idx < 0 ? static_cast<long long>(vertex_count) + idx : idx - 1;
  if (idx == 0 || resolved < 0 ||
      resolved >= static_cast<long long>(vertex_count)) {
    throw Error(ErrorCode::kMalformedMesh,
                "line " + std::to_string(line_no) + ": face index " +
                    std::to_string(idx) + " out of range");
  }
  return static_cast<std::uint32_t>(resolved);
}

}  // namespace

void Mesh::validate() const {
  for (const auto& v : vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
      throw Error(ErrorCode::kMalformedMesh, "non-finite vertex");
    }
  }
  for (const auto& f : faces) {
    for (auto idx : f) {
      if (idx >= vertices.size()) {
        throw Error(ErrorCode::kMalformedMesh,
                    "face index " + std::to_string(idx) + " out of range");
      }
    }
  }
}

Mesh load_obj(std::string_view text) {
  Mesh mesh;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "v") {
      if (tokens.size() < 4) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                           ": vertex needs 3 coordinates");
      }
      mesh.vertices.push_back({parse_coord(tokens[1], line_no),
                               parse_coord(tokens[2], line_no),
                               parse_coord(tokens[3], line_no)});
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) {
        throw Error(ErrorCode::kMalformedMesh,
                    "line " + std::to_string(line_no) +
                        ": face needs at least 3 vertices");
      }
      std::vector<std::uint32_t> poly;
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        poly.push_back(parse_index(tokens[k], mesh.vertices.size(), line_no));
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  return mesh;
}

Mesh load_obj_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_obj(ss.str());
}

std::string export_obj(const Mesh& mesh) {
  std::string out;
  for (const auto& v : mesh.vertices) {
    out += "v " + format_fixed(v.x, 6) + ' ' + format_fixed(v.y, 6) + ' ' +
           format_fixed(v.z, 6) + '\n';
  }
  for (const auto& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) +
           ' ' + std::to_string(f[2] + 1) + '\n';
  }
  return out;
}

Mesh displace_mesh(const Mesh& mesh, const ExpressionTree& tree,
                   ChannelMask channels, TimeParam t) {
  Mesh out;
  out.faces = mesh.faces;
  out.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) {
    out.vertices.push_back(displace(tree, channels, v, t));
  }
  return out;
}

Mesh make_uv_sphere(int rings, int segments, double radius) {
  using std::numbers::pi;
  Mesh m;
  m.vertices.push_back({0.0, radius, 0.0});
  for (int r = 1; r < rings; ++r) {
    const double phi = pi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * pi * s / segments;
      m.vertices.push_back({radius * std::sin(phi) * std::cos(theta),
                            radius * std::cos(phi),
                            radius * std::sin(phi) * std::sin(theta)});
    }
  }
  m.vertices.push_back({0.0, -radius, 0.0});

  const auto ring_vertex = [&](int r, int s) {
    return static_cast<std::uint32_t>(1 + (r - 1) * segments + s % segments);
  };
  const auto bottom = static_cast<std::uint32_t>(m.vertices.size() - 1);
  for (int s = 0; s < segments; ++s) {
    m.faces.push_back({0, ring_vertex(1, s + 1), ring_vertex(1, s)});
  }
  for (int r = 1; r + 1 < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      const auto a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
      const auto c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
      m.faces.push_back({a, b, d});
      m.faces.push_back({a, d, c});
    }
  }
  for (int s = 0; s < segments; ++s) {
    m.faces.push_back({bottom, ring_vertex(rings - 1, s),
                       ring_vertex(rings - 1, s + 1)});
  }
  return m;
}

Mesh make_cube(double h) {
  Mesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back({(i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h});
  }
  const std::uint32_t quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                                     {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

Mesh make_cylinder(int segments, double radius, double height) {
  using std::numbers::pi;
  Mesh m;
  const double half = height / 2.0;
  for (double y : {-half, half}) {
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * pi * s / segments;
      m.vertices.push_back(
          {radius * std::cos(theta), y, radius * std::sin(theta)});
    }
  }
  const auto bottom_center = static_cast<std::uint32_t>(m.vertices.size());
  m.vertices.push_back({0.0, -half, 0.0});
  const auto top_center = static_cast<std::uint32_t>(m.vertices.size());
  m.vertices.push_back({0.0, half, 0.0});

  const auto seg = static_cast<std::uint32_t>(segments);
  for (std::uint32_t s = 0; s < seg; ++s) {
    const std::uint32_t n = (s + 1) % seg;
    m.faces.push_back({s, n, seg + n});
    m.faces.push_back({s, seg + n, seg + s});
    m.faces.push_back({bottom_center, n, s});
    m.faces.push_back({top_center, seg + s, seg + n});
  }
  return m;
}

Mesh builtin_mesh(std::string_view name) {
  if (name == "sphere") return make_uv_sphere();
  if (name == "cube") return make_cube();
  if (name == "cylinder") return make_cylinder();
  throw Error(ErrorCode::kNotFound, "no builtin mesh '" + std::string(name) + "'");
}

}  // namespace evoform
