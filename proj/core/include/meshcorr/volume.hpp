#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "meshcorr/trimesh.hpp"

namespace meshcorr::volumes {

// 3D scalar grid of CT intensities in Hounsfield units. Voxels are stored
// z-major: index = (iz * ny + iy) * nx + ix. Axis order in dims / spacing /
// origin is (z, y, x). World coordinates are in mm with voxel centres at
// origin + index * spacing.
struct Volume {
  std::array<size_t, 3> dims{};
  std::array<double, 3> spacing{2.5, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  std::vector<int16_t> voxels;

  size_t nz() const { return dims[0]; }
  size_t ny() const { return dims[1]; }
  size_t nx() const { return dims[2]; }
  size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }

  int16_t at(size_t iz, size_t iy, size_t ix) const {
    return voxels[(iz * dims[1] + iy) * dims[2] + ix];
  }
  int16_t& at(size_t iz, size_t iy, size_t ix) {
    return voxels[(iz * dims[1] + iy) * dims[2] + ix];
  }

  // HU value with -1000 (air) padding outside the grid.
  double at_padded(int64_t iz, int64_t iy, int64_t ix) const;

  // World position (x, y, z) of the voxel centre.
  meshkit::Vec3 position(size_t iz, size_t iy, size_t ix) const {
    return {origin[2] + double(ix) * spacing[2],
            origin[1] + double(iy) * spacing[1],
            origin[0] + double(iz) * spacing[0]};
  }

  // Index of the voxel whose centre is nearest to the world point (unclamped,
  // may fall outside the grid).
  std::array<int64_t, 3> containing_voxel(const meshkit::Vec3& point) const;

  void validate() const;
};

// Text header (dims=..., spacing=..., origin=..., dtype=int16-le,
// data=<raw file name>) next to a raw little-endian int16 voxel file.
void save_volume(const Volume& volume, const std::filesystem::path& header_path);
Volume load_volume(const std::filesystem::path& header_path);

// clamp((hu - (level - width/2)) / width, 0, 1)
double window_normalize(double hu, double width = 350.0, double level = 40.0);

inline constexpr std::array<size_t, 3> kPatchDims{7, 19, 19};
inline constexpr size_t kPatchSize = 7 * 19 * 19;  // 2527

// Per-vertex flattened, windowed CT sub-volumes. Row i holds the patch of
// vertex i in z-major order.
struct PatchSet {
  size_t count = 0;
  std::vector<double> data;  // count x kPatchSize, values in [0, 1]

  const double* row(size_t i) const { return data.data() + i * kPatchSize; }
};

// 7 voxels along z, 19x19 in-plane, centred on the voxel containing `point`.
// Out-of-grid voxels are filled with -1000 HU before windowing.
std::array<double, kPatchSize> extract_patch(const Volume& volume,
                                             const meshkit::Vec3& point,
                                             double width = 350.0,
                                             double level = 40.0);

PatchSet extract_patchset(const Volume& volume, const meshkit::TriMesh& mesh,
                          double width = 350.0, double level = 40.0);

}  // namespace meshcorr::volumes
