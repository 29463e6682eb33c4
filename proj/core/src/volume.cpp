#include "meshcorr/volume.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "meshcorr/errors.hpp"

namespace meshcorr::volumes {

namespace {

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorCode::IOFailure, path.string() + ": " + why);
}

std::array<double, 3> parse_triple(const std::string& value, const std::filesystem::path& path) {
  std::array<double, 3> out{};
  std::istringstream ss(value);
  char comma;
  if (!(ss >> out[0] >> comma >> out[1] >> comma >> out[2]))
    io_fail(path, "expected three comma-separated values, got '" + value + "'");
  return out;
}

}  // namespace

double Volume::at_padded(int64_t iz, int64_t iy, int64_t ix) const {
  if (iz < 0 || iy < 0 || ix < 0 || iz >= int64_t(dims[0]) || iy >= int64_t(dims[1]) ||
      ix >= int64_t(dims[2]))
    return -1000.0;
  return double(at(size_t(iz), size_t(iy), size_t(ix)));
}

std::array<int64_t, 3> Volume::containing_voxel(const meshkit::Vec3& point) const {
  return {int64_t(std::llround((point.z() - origin[0]) / spacing[0])),
          int64_t(std::llround((point.y() - origin[1]) / spacing[1])),
          int64_t(std::llround((point.x() - origin[2]) / spacing[2]))};
}

void Volume::validate() const {
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
    throw Error(ErrorCode::BadConfig, "volume dims must all be >= 1");
  if (spacing[0] <= 0 || spacing[1] <= 0 || spacing[2] <= 0)
    throw Error(ErrorCode::BadConfig, "volume spacing must all be > 0");
  if (voxels.size() != voxel_count())
    throw Error(ErrorCode::BadConfig, "voxel buffer length does not match dims");
}

void save_volume(const Volume& volume, const std::filesystem::path& header_path) {
  volume.validate();
  std::filesystem::path raw_path = header_path;
  raw_path.replace_extension(".raw");

  std::ofstream hdr(header_path);
  if (!hdr) io_fail(header_path, "cannot open for writing");
  hdr.precision(17);
  hdr << "dims=" << volume.dims[0] << "," << volume.dims[1] << "," << volume.dims[2] << "\n";
  hdr << "spacing=" << volume.spacing[0] << "," << volume.spacing[1] << "," << volume.spacing[2]
      << "\n";
  hdr << "origin=" << volume.origin[0] << "," << volume.origin[1] << "," << volume.origin[2]
      << "\n";
  hdr << "dtype=int16-le\n";
  hdr << "data=" << raw_path.filename().string() << "\n";
  if (!hdr) io_fail(header_path, "write failed");

  std::ofstream raw(raw_path, std::ios::binary);
  if (!raw) io_fail(raw_path, "cannot open for writing");
  raw.write(reinterpret_cast<const char*>(volume.voxels.data()),
            std::streamsize(volume.voxels.size() * sizeof(int16_t)));
  if (!raw) io_fail(raw_path, "write failed");
}

Volume load_volume(const std::filesystem::path& header_path) {
  std::ifstream hdr(header_path);
  if (!hdr) io_fail(header_path, "cannot open");
  Volume volume;
  std::string raw_name;
  std::string line;
  while (std::getline(hdr, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "dims") {
      auto d = parse_triple(value, header_path);
      volume.dims = {size_t(d[0]), size_t(d[1]), size_t(d[2])};
    } else if (key == "spacing") {
      volume.spacing = parse_triple(value, header_path);
    } else if (key == "origin") {
      volume.origin = parse_triple(value, header_path);
    } else if (key == "dtype") {
      if (value != "int16-le") io_fail(header_path, "unsupported dtype '" + value + "'");
    } else if (key == "data") {
      raw_name = value;
    }
  }
  std::filesystem::path raw_path = header_path;
  if (raw_name.empty())
    raw_path.replace_extension(".raw");
  else
    raw_path = header_path.parent_path() / raw_name;

  std::ifstream raw(raw_path, std::ios::binary);
  if (!raw) io_fail(raw_path, "cannot open");
  raw.seekg(0, std::ios::end);
  size_t bytes = size_t(raw.tellg());
  raw.seekg(0);
  if (bytes != volume.voxel_count() * sizeof(int16_t))
    io_fail(raw_path, "raw buffer length " + std::to_string(bytes) + " does not match dims (" +
                          std::to_string(volume.voxel_count() * sizeof(int16_t)) + " expected)");
  volume.voxels.resize(volume.voxel_count());
  raw.read(reinterpret_cast<char*>(volume.voxels.data()), std::streamsize(bytes));
  if (!raw) io_fail(raw_path, "short read");
  volume.validate();
  return volume;
}

double window_normalize(double hu, double width, double level) {
  double t = (hu - (level - width / 2.0)) / width;
  return std::clamp(t, 0.0, 1.0);
}

std::array<double, kPatchSize> extract_patch(const Volume& volume, const meshkit::Vec3& point,
                                             double width, double level) {
  auto [cz, cy, cx] = volume.containing_voxel(point);
  std::array<double, kPatchSize> patch;
  size_t k = 0;
  for (int64_t dz = -3; dz <= 3; ++dz)
    for (int64_t dy = -9; dy <= 9; ++dy)
      for (int64_t dx = -9; dx <= 9; ++dx)
        patch[k++] = window_normalize(volume.at_padded(cz + dz, cy + dy, cx + dx), width, level);
  return patch;
}

PatchSet extract_patchset(const Volume& volume, const meshkit::TriMesh& mesh, double width,
                          double level) {
  PatchSet set;
  set.count = mesh.vertex_count();
  set.data.resize(set.count * kPatchSize);
  for (size_t i = 0; i < set.count; ++i) {
    auto patch = extract_patch(volume, mesh.vertices[i], width, level);
    std::copy(patch.begin(), patch.end(), set.data.begin() + i * kPatchSize);
  }
  return set;
}

}  // namespace meshcorr::volumes
