#include "meshcorr/trimesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "meshcorr/errors.hpp"

namespace meshcorr::meshkit {

std::vector<std::array<uint32_t, 2>> TriMesh::edges() const {
  std::set<std::array<uint32_t, 2>> unique;
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      uint32_t a = f[k], b = f[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      unique.insert({a, b});
    }
  }
  return {unique.begin(), unique.end()};
}

std::vector<std::vector<uint32_t>> TriMesh::one_ring() const {
  std::vector<std::set<uint32_t>> ring(vertices.size());
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      uint32_t a = f[k], b = f[(k + 1) % 3];
      ring[a].insert(b);
      ring[b].insert(a);
    }
  }
  std::vector<std::vector<uint32_t>> out(vertices.size());
  for (size_t i = 0; i < ring.size(); ++i) out[i].assign(ring[i].begin(), ring[i].end());
  return out;
}

Vec3 TriMesh::face_normal(size_t f) const {
  const auto& t = faces[f];
  Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
  double len = n.norm();
  return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

double TriMesh::face_area(size_t f) const {
  const auto& t = faces[f];
  return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

Vec3 TriMesh::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const auto& v : vertices) c += v;
  return vertices.empty() ? c : Vec3(c / double(vertices.size()));
}

double TriMesh::bbox_diagonal() const {
  if (vertices.empty()) return 0.0;
  Vec3 lo = vertices.front(), hi = vertices.front();
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

MeshValidation validate_mesh(const TriMesh& mesh) {
  const size_t n = mesh.vertices.size();
  for (size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      if (t[k] >= n)
        return {false, "face " + std::to_string(f) + " references vertex " +
                           std::to_string(t[k]) + " out of range"};
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      return {false, "face " + std::to_string(f) + " repeats a vertex"};
    if (mesh.face_area(f) <= 1e-12)
      return {false, "face " + std::to_string(f) + " is degenerate (area <= 1e-12)"};
  }

  // Edge -> list of (face, direction). Direction +1 when the edge appears as
  // (a,b) with a<b in face winding order, -1 otherwise.
  std::map<std::array<uint32_t, 2>, std::vector<int>> edge_dirs;
  for (const auto& t : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      uint32_t a = t[k], b = t[(k + 1) % 3];
      int dir = a < b ? +1 : -1;
      uint32_t lo = std::min(a, b), hi = std::max(a, b);
      edge_dirs[{lo, hi}].push_back(dir);
    }
  }
  for (const auto& [e, dirs] : edge_dirs) {
    if (dirs.size() > 2)
      return {false, "edge (" + std::to_string(e[0]) + "," + std::to_string(e[1]) +
                         ") shared by " + std::to_string(dirs.size()) + " faces"};
    if (dirs.size() == 2 && dirs[0] == dirs[1])
      return {false, "inconsistent orientation across edge (" + std::to_string(e[0]) +
                         "," + std::to_string(e[1]) + ")"};
  }
  return {};
}

void require_valid(const TriMesh& mesh, const std::string& context) {
  MeshValidation v = validate_mesh(mesh);
  if (!v.ok) throw Error(ErrorCode::InvalidMesh, context + ": " + v.message);
}

TriMesh remove_degenerate_faces(const TriMesh& mesh, double min_area) {
  TriMesh out;
  std::vector<Face> kept;
  for (size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
    if (mesh.face_area(f) <= min_area) continue;
    kept.push_back(t);
  }
  std::vector<int64_t> remap(mesh.vertices.size(), -1);
  for (const auto& t : kept)
    for (uint32_t idx : t)
      if (remap[idx] < 0) remap[idx] = 0;
  int64_t next = 0;
  for (auto& r : remap)
    if (r == 0) r = next++;
  out.vertices.reserve(size_t(next));
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    if (remap[i] >= 0) out.vertices.push_back(mesh.vertices[i]);
  out.faces.reserve(kept.size());
  for (const auto& t : kept)
    out.faces.push_back({uint32_t(remap[t[0]]), uint32_t(remap[t[1]]), uint32_t(remap[t[2]])});
  return out;
}

double surface_area(const TriMesh& mesh) {
  double area = 0.0;
  for (size_t f = 0; f < mesh.faces.size(); ++f) area += mesh.face_area(f);
  return area;
}

double enclosed_volume(const TriMesh& mesh) {
  double vol = 0.0;
  for (const auto& t : mesh.faces) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    vol += a.dot(b.cross(c)) / 6.0;
  }
  return std::abs(vol);
}

bool RigidTransform::is_valid(double tol) const {
  Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(rotation.transpose() * translation);
  return inv;
}

TriMesh apply_rigid(const TriMesh& mesh, const RigidTransform& t) {
  if (!t.is_valid())
    throw Error(ErrorCode::InvalidTransform, "rotation is not orthonormal with det +1");
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = t.rotation * v + t.translation;
  return out;
}

TriMesh icosphere(int subdivisions, double radius) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh mesh;
  mesh.vertices = {
      {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1},
  };
  mesh.faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::array<uint32_t, 2>, uint32_t> midpoint;
    auto mid = [&](uint32_t a, uint32_t b) -> uint32_t {
      std::array<uint32_t, 2> key{std::min(a, b), std::max(a, b)};
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      uint32_t idx = uint32_t(mesh.vertices.size());
      mesh.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(mesh.faces.size() * 4);
    for (const auto& t : mesh.faces) {
      uint32_t ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(next);
  }
  for (auto& v : mesh.vertices) v = radius * v.normalized();
  return mesh;
}

}  // namespace meshcorr::meshkit
