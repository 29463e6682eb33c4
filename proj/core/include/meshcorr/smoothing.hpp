#pragma once

#include "meshcorr/trimesh.hpp"

namespace meshcorr::meshkit {

// Taubin smoothing: alternating lambda / mu umbrella-operator steps with
// uniform one-ring weights. Connectivity is preserved; isolated vertices are
// left unmoved. The default (0.5, -0.53) pair smooths without net shrinkage.
TriMesh taubin_smooth(const TriMesh& mesh, int iterations = 10, double lambda = 0.5,
                      double mu = -0.53);

// Pure Laplacian smoothing (the mu = 0 control case).
TriMesh laplacian_smooth(const TriMesh& mesh, int iterations, double lambda = 0.5);

}  // namespace meshcorr::meshkit
