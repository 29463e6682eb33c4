#pragma once

#include "meshcorr/trimesh.hpp"

namespace meshcorr::meshkit {

// Edge-length equalisation: per iteration, edges longer than (4/3) * mean
// edge length are split at their midpoint (longest first) and edges shorter
// than (4/5) * mean are collapsed to their midpoint (shortest first).
// Collapses that would break manifoldness, flip normals, or create an edge
// above the split threshold are skipped.
TriMesh remesh_optimize(const TriMesh& mesh, int iterations);

// max edge length / min edge length; infinity for an edgeless mesh.
double edge_length_ratio(const TriMesh& mesh);

}  // namespace meshcorr::meshkit
