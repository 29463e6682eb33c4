#pragma once

#include "meshcorr/trimesh.hpp"
#include "meshcorr/volume.hpp"

namespace meshcorr::meshkit {

// Extracts the iso-contour of the volume as a triangle surface. Vertices on
// shared lattice edges are welded, so every connected component of a surface
// that does not touch the grid boundary is watertight. Coordinates are in mm
// (voxel index * spacing + origin). Voxels strictly above `iso_value` count
// as interior and triangles are wound with outward normals.
// Throws Error(EmptySurface) when no voxel pair crosses the iso-value.
TriMesh marching_cubes(const volumes::Volume& volume, double iso_value);

}  // namespace meshcorr::meshkit
