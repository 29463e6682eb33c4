#include "meshcorr/decimate.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "meshcorr/errors.hpp"

namespace meshcorr::meshkit {

namespace {

using Eigen::Matrix4d;
using Eigen::Vector4d;

Matrix4d face_quadric(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  Vec3 n = (p1 - p0).cross(p2 - p0);
  double len = n.norm();
  if (len <= 0) return Matrix4d::Zero();
  n /= len;
  Vector4d plane(n.x(), n.y(), n.z(), -n.dot(p0));
  return plane * plane.transpose();
}

double quadric_cost(const Matrix4d& q, const Vec3& v) {
  Vector4d h(v.x(), v.y(), v.z(), 1.0);
  return h.dot(q * h);
}

struct Candidate {
  double cost;
  uint32_t a, b;
  uint32_t version_a, version_b;
  Vec3 position;
  bool operator>(const Candidate& o) const { return cost > o.cost; }
};

class CollapseMesh {
 public:
  explicit CollapseMesh(const TriMesh& mesh)
      : positions_(mesh.vertices), faces_(mesh.faces), face_alive_(mesh.faces.size(), true),
        vertex_faces_(mesh.vertices.size()), version_(mesh.vertices.size(), 0),
        quadrics_(mesh.vertices.size(), Matrix4d::Zero()), alive_faces_(mesh.faces.size()) {
    for (size_t f = 0; f < faces_.size(); ++f) {
      const auto& t = faces_[f];
      Matrix4d q = face_quadric(positions_[t[0]], positions_[t[1]], positions_[t[2]]);
      for (int k = 0; k < 3; ++k) {
        vertex_faces_[t[k]].insert(uint32_t(f));
        quadrics_[t[k]] += q;
      }
    }
  }

  size_t alive_faces() const { return alive_faces_; }
  uint32_t version(uint32_t v) const { return version_[v]; }
  const Vec3& position(uint32_t v) const { return positions_[v]; }
  const Matrix4d& quadric(uint32_t v) const { return quadrics_[v]; }

  std::vector<uint32_t> neighbors(uint32_t v) const {
    std::set<uint32_t> out;
    for (uint32_t f : vertex_faces_[v])
      for (uint32_t idx : faces_[f])
        if (idx != v) out.insert(idx);
    return {out.begin(), out.end()};
  }

  bool edge_exists(uint32_t a, uint32_t b) const {
    for (uint32_t f : vertex_faces_[a]) {
      const auto& t = faces_[f];
      if (t[0] == b || t[1] == b || t[2] == b) return true;
    }
    return false;
  }

  // Manifoldness (link condition) and normal-flip legality for collapsing
  // (a, b) to `target`.
  bool collapse_legal(uint32_t a, uint32_t b, const Vec3& target) const {
    std::vector<uint32_t> shared;
    for (uint32_t f : vertex_faces_[a])
      if (vertex_faces_[b].count(f)) shared.push_back(f);
    if (shared.empty() || shared.size() > 2) return false;

    auto na = neighbors(a);
    auto nb = neighbors(b);
    std::vector<uint32_t> common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
    if (common.size() != shared.size()) return false;

    for (uint32_t v : {a, b}) {
      for (uint32_t f : vertex_faces_[v]) {
        if (std::find(shared.begin(), shared.end(), f) != shared.end()) continue;
        const auto& t = faces_[f];
        Vec3 p[3], q[3];
        for (int k = 0; k < 3; ++k) {
          p[k] = positions_[t[k]];
          q[k] = (t[k] == a || t[k] == b) ? target : positions_[t[k]];
        }
        Vec3 n_before = (p[1] - p[0]).cross(p[2] - p[0]);
        Vec3 n_after = (q[1] - q[0]).cross(q[2] - q[0]);
        if (n_before.dot(n_after) < 0) return false;
        if (0.5 * n_after.norm() <= 1e-12) return false;
      }
    }
    return true;
  }

  // Merges b into a at `target`. Returns the set of vertices whose incident
  // edges need fresh heap candidates.
  std::vector<uint32_t> collapse(uint32_t a, uint32_t b, const Vec3& target) {
    std::vector<uint32_t> shared;
    for (uint32_t f : vertex_faces_[a])
      if (vertex_faces_[b].count(f)) shared.push_back(f);

    for (uint32_t f : shared) {
      face_alive_[f] = false;
      --alive_faces_;
      for (uint32_t idx : faces_[f]) vertex_faces_[idx].erase(f);
    }
    for (uint32_t f : std::vector<uint32_t>(vertex_faces_[b].begin(), vertex_faces_[b].end())) {
      auto& t = faces_[f];
      for (int k = 0; k < 3; ++k)
        if (t[k] == b) t[k] = a;
      vertex_faces_[b].erase(f);
      vertex_faces_[a].insert(f);
    }
    positions_[a] = target;
    quadrics_[a] += quadrics_[b];
    ++version_[a];
    ++version_[b];
    std::vector<uint32_t> touched = neighbors(a);
    touched.push_back(a);
    return touched;
  }

  TriMesh extract() const {
    TriMesh out;
    out.vertices = positions_;
    for (size_t f = 0; f < faces_.size(); ++f)
      if (face_alive_[f]) out.faces.push_back(faces_[f]);
    return remove_degenerate_faces(out);
  }

 private:
  std::vector<Vec3> positions_;
  std::vector<Face> faces_;
  std::vector<bool> face_alive_;
  std::vector<std::set<uint32_t>> vertex_faces_;
  std::vector<uint32_t> version_;
  std::vector<Matrix4d> quadrics_;
  size_t alive_faces_;
};

// Optimal collapse position for the combined quadric: solve the 3x3 normal
// equations, falling back to the best of midpoint / endpoints when singular.
Vec3 optimal_position(const Matrix4d& q, const Vec3& pa, const Vec3& pb) {
  Eigen::Matrix3d A = q.topLeftCorner<3, 3>();
  Vec3 rhs(-q(0, 3), -q(1, 3), -q(2, 3));
  Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
  if (lu.isInvertible()) {
    Vec3 v = lu.solve(rhs);
    if (v.allFinite()) return v;
  }
  Vec3 mid = 0.5 * (pa + pb);
  Vec3 best = mid;
  double best_cost = quadric_cost(q, mid);
  for (const Vec3& c : {pa, pb}) {
    double cost = quadric_cost(q, c);
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  return best;
}

}  // namespace

DecimateResult quadric_decimate(const TriMesh& mesh, size_t target_faces) {
  if (target_faces < 4)
    throw Error(ErrorCode::BadConfig, "quadric_decimate: target_faces must be >= 4");
  if (mesh.faces.size() <= target_faces) return {mesh, true};

  CollapseMesh cm(mesh);
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<Candidate>> heap;

  auto push_edges_of = [&](uint32_t v) {
    for (uint32_t u : cm.neighbors(v)) {
      uint32_t a = std::min(u, v), b = std::max(u, v);
      Matrix4d q = cm.quadric(a) + cm.quadric(b);
      Vec3 pos = optimal_position(q, cm.position(a), cm.position(b));
      heap.push({quadric_cost(q, pos), a, b, cm.version(a), cm.version(b), pos});
    }
  };
  for (uint32_t v = 0; v < mesh.vertices.size(); ++v) {
    for (uint32_t u : cm.neighbors(v)) {
      if (u <= v) continue;
      Matrix4d q = cm.quadric(v) + cm.quadric(u);
      Vec3 pos = optimal_position(q, cm.position(v), cm.position(u));
      heap.push({quadric_cost(q, pos), v, u, cm.version(v), cm.version(u), pos});
    }
  }

  while (cm.alive_faces() > target_faces && !heap.empty()) {
    Candidate c = heap.top();
    heap.pop();
    if (c.version_a != cm.version(c.a) || c.version_b != cm.version(c.b)) continue;
    if (!cm.edge_exists(c.a, c.b)) continue;
    if (!cm.collapse_legal(c.a, c.b, c.position)) continue;
    auto touched = cm.collapse(c.a, c.b, c.position);
    for (uint32_t v : touched) push_edges_of(v);
  }

  return {cm.extract(), cm.alive_faces() <= target_faces};
}

}  // namespace meshcorr::meshkit
