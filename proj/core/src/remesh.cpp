#include "meshcorr/remesh.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <vector>

namespace meshcorr::meshkit {

namespace {

class EditableMesh {
 public:
  explicit EditableMesh(const TriMesh& mesh)
      : positions_(mesh.vertices), faces_(mesh.faces), face_alive_(mesh.faces.size(), true),
        vertex_faces_(mesh.vertices.size()) {
    for (size_t f = 0; f < faces_.size(); ++f)
      for (uint32_t idx : faces_[f]) vertex_faces_[idx].insert(uint32_t(f));
  }

  const Vec3& position(uint32_t v) const { return positions_[v]; }

  std::vector<std::array<uint32_t, 2>> current_edges() const {
    std::set<std::array<uint32_t, 2>> unique;
    for (size_t f = 0; f < faces_.size(); ++f) {
      if (!face_alive_[f]) continue;
      const auto& t = faces_[f];
      for (int k = 0; k < 3; ++k) {
        uint32_t a = t[k], b = t[(k + 1) % 3];
        unique.insert({std::min(a, b), std::max(a, b)});
      }
    }
    return {unique.begin(), unique.end()};
  }

  double mean_edge_length() const {
    auto edges = current_edges();
    if (edges.empty()) return 0.0;
    double total = 0.0;
    for (const auto& e : edges) total += (positions_[e[0]] - positions_[e[1]]).norm();
    return total / double(edges.size());
  }

  std::vector<uint32_t> faces_on_edge(uint32_t a, uint32_t b) const {
    std::vector<uint32_t> out;
    for (uint32_t f : vertex_faces_[a]) {
      const auto& t = faces_[f];
      if (t[0] == b || t[1] == b || t[2] == b) out.push_back(f);
    }
    return out;
  }

  bool edge_exists(uint32_t a, uint32_t b) const { return !faces_on_edge(a, b).empty(); }

  double edge_length(uint32_t a, uint32_t b) const {
    return (positions_[a] - positions_[b]).norm();
  }

  // Splits (a, b) at its midpoint: each incident face (a, b, x) becomes
  // (a, m, x) + (m, b, x).
  void split(uint32_t a, uint32_t b) {
    uint32_t m = uint32_t(positions_.size());
    positions_.push_back(0.5 * (positions_[a] + positions_[b]));
    vertex_faces_.emplace_back();
    for (uint32_t f : faces_on_edge(a, b)) {
      Face t = faces_[f];
      // Rotate so the split edge is (t[0], t[1]).
      while (!((t[0] == a && t[1] == b) || (t[0] == b && t[1] == a)))
        t = {t[1], t[2], t[0]};
      remove_face(f);
      add_face({t[0], m, t[2]});
      add_face({m, t[1], t[2]});
    }
  }

  std::vector<uint32_t> neighbors(uint32_t v) const {
    std::set<uint32_t> out;
    for (uint32_t f : vertex_faces_[v])
      for (uint32_t idx : faces_[f])
        if (idx != v) out.insert(idx);
    return {out.begin(), out.end()};
  }

  bool collapse_legal(uint32_t a, uint32_t b, const Vec3& target, double max_new_edge) const {
    auto shared = faces_on_edge(a, b);
    if (shared.empty() || shared.size() > 2) return false;

    auto na = neighbors(a);
    auto nb = neighbors(b);
    std::vector<uint32_t> common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
    if (common.size() != shared.size()) return false;

    for (uint32_t v : {a, b}) {
      for (uint32_t u : neighbors(v)) {
        if (u == a || u == b) continue;
        if ((positions_[u] - target).norm() > max_new_edge) return false;
      }
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

  void collapse(uint32_t a, uint32_t b, const Vec3& target) {
    for (uint32_t f : faces_on_edge(a, b)) remove_face(f);
    for (uint32_t f : std::vector<uint32_t>(vertex_faces_[b].begin(), vertex_faces_[b].end())) {
      Face t = faces_[f];
      for (int k = 0; k < 3; ++k)
        if (t[k] == b) t[k] = a;
      remove_face(f);
      add_face(t);
    }
    positions_[a] = target;
  }

  TriMesh extract() const {
    TriMesh out;
    out.vertices = positions_;
    for (size_t f = 0; f < faces_.size(); ++f)
      if (face_alive_[f]) out.faces.push_back(faces_[f]);
    return remove_degenerate_faces(out);
  }

 private:
  void remove_face(uint32_t f) {
    face_alive_[f] = false;
    for (uint32_t idx : faces_[f]) vertex_faces_[idx].erase(f);
  }
  void add_face(const Face& t) {
    uint32_t f = uint32_t(faces_.size());
    faces_.push_back(t);
    face_alive_.push_back(true);
    for (uint32_t idx : t) vertex_faces_[idx].insert(f);
  }

  std::vector<Vec3> positions_;
  std::vector<Face> faces_;
  std::vector<bool> face_alive_;
  std::vector<std::set<uint32_t>> vertex_faces_;
};

}  // namespace

TriMesh remesh_optimize(const TriMesh& mesh, int iterations) {
  if (iterations <= 0) return mesh;
  EditableMesh em(mesh);

  for (int it = 0; it < iterations; ++it) {
    double mean = em.mean_edge_length();
    if (mean <= 0) break;
    const double split_above = mean * 4.0 / 3.0;
    const double collapse_below = mean * 4.0 / 5.0;

    auto edges = em.current_edges();
    std::stable_sort(edges.begin(), edges.end(),
                     [&](const auto& x, const auto& y) {
                       return em.edge_length(x[0], x[1]) > em.edge_length(y[0], y[1]);
                     });
    for (const auto& e : edges) {
      if (!em.edge_exists(e[0], e[1])) continue;
      if (em.edge_length(e[0], e[1]) > split_above) em.split(e[0], e[1]);
    }

    edges = em.current_edges();
    std::stable_sort(edges.begin(), edges.end(),
                     [&](const auto& x, const auto& y) {
                       return em.edge_length(x[0], x[1]) < em.edge_length(y[0], y[1]);
                     });
    for (const auto& e : edges) {
      if (!em.edge_exists(e[0], e[1])) continue;
      if (em.edge_length(e[0], e[1]) >= collapse_below) continue;
      Vec3 mid = 0.5 * (em.position(e[0]) + em.position(e[1]));
      if (em.collapse_legal(e[0], e[1], mid, split_above)) em.collapse(e[0], e[1], mid);
    }
  }
  return em.extract();
}

double edge_length_ratio(const TriMesh& mesh) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& e : mesh.edges()) {
    double len = (mesh.vertices[e[0]] - mesh.vertices[e[1]]).norm();
    lo = std::min(lo, len);
    hi = std::max(hi, len);
  }
  return lo > 0 && std::isfinite(lo) ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace meshcorr::meshkit
