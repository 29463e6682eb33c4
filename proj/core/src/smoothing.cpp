#include "meshcorr/smoothing.hpp"

namespace meshcorr::meshkit {

namespace {

void umbrella_step(std::vector<Vec3>& positions, const std::vector<std::vector<uint32_t>>& ring,
                   double weight) {
  std::vector<Vec3> next(positions.size());
  for (size_t i = 0; i < positions.size(); ++i) {
    if (ring[i].empty()) {
      next[i] = positions[i];
      continue;
    }
    Vec3 mean = Vec3::Zero();
    for (uint32_t j : ring[i]) mean += positions[j];
    mean /= double(ring[i].size());
    next[i] = positions[i] + weight * (mean - positions[i]);
  }
  positions.swap(next);
}

}  // namespace

TriMesh taubin_smooth(const TriMesh& mesh, int iterations, double lambda, double mu) {
  TriMesh out = mesh;
  auto ring = mesh.one_ring();
  for (int it = 0; it < iterations; ++it) {
    umbrella_step(out.vertices, ring, lambda);
    umbrella_step(out.vertices, ring, mu);
  }
  return out;
}

TriMesh laplacian_smooth(const TriMesh& mesh, int iterations, double lambda) {
  TriMesh out = mesh;
  auto ring = mesh.one_ring();
  for (int it = 0; it < iterations; ++it) umbrella_step(out.vertices, ring, lambda);
  return out;
}

}  // namespace meshcorr::meshkit
