#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace meshcorr::meshkit {

using Vec3 = Eigen::Vector3d;
using Face = std::array<uint32_t, 3>;

// Triangle surface mesh. Vertex coordinates are in millimetres.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  size_t vertex_count() const { return vertices.size(); }
  size_t face_count() const { return faces.size(); }

  // Undirected edges (a < b), sorted lexicographically.
  std::vector<std::array<uint32_t, 2>> edges() const;

  // Per-vertex one-ring neighbour index lists, each sorted ascending.
  std::vector<std::vector<uint32_t>> one_ring() const;

  Vec3 face_normal(size_t f) const;
  double face_area(size_t f) const;
  Vec3 centroid() const;

  // Axis-aligned bounding box diagonal length.
  double bbox_diagonal() const;
};

struct MeshValidation {
  bool ok = true;
  std::string message;
};

// Checks the TriMesh invariants: in-range indices, no repeated vertex within
// a face, face area > 1e-12 mm^2, each undirected edge on at most two faces,
// and consistent orientation across shared edges.
MeshValidation validate_mesh(const TriMesh& mesh);

// Throws Error(InvalidMesh) when validation fails.
void require_valid(const TriMesh& mesh, const std::string& context);

// Removes faces with area below `min_area` and drops vertices that no face
// references, remapping face indices.
TriMesh remove_degenerate_faces(const TriMesh& mesh, double min_area = 1e-12);

double surface_area(const TriMesh& mesh);

// Sum of signed tetrahedron volumes; meaningful for closed surfaces.
double enclosed_volume(const TriMesh& mesh);

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  bool is_valid(double tol = 1e-9) const;
  RigidTransform inverse() const;

  static RigidTransform identity() { return {}; }
  static RigidTransform translate(const Vec3& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }
};

// v' = R v + t for every vertex; connectivity unchanged.
// Throws Error(InvalidTransform) when the rotation fails the orthonormality
// or determinant check.
TriMesh apply_rigid(const TriMesh& mesh, const RigidTransform& t);

// Unit icosahedron subdivided `subdivisions` times and projected onto the
// sphere of the given radius. Used by tests and the synthetic generator.
TriMesh icosphere(int subdivisions, double radius = 1.0);

}  // namespace meshcorr::meshkit
