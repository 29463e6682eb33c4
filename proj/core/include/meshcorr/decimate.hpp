#pragma once

#include "meshcorr/trimesh.hpp"

namespace meshcorr::meshkit {

struct DecimateResult {
  TriMesh mesh;
  // False when no legal collapse remained before the target was met; the
  // mesh is then the best effort.
  bool reached_target = true;
};

// Greedy minimum-quadric-error edge collapse until face count <= target_faces.
// Collapses that would create non-manifold edges or flip a surviving face
// normal are skipped. target_faces must be >= 4.
DecimateResult quadric_decimate(const TriMesh& mesh, size_t target_faces);

}  // namespace meshcorr::meshkit
