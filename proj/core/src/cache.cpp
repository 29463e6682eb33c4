#include "meshcorr/cache.hpp"

#include <fstream>

#include "meshcorr/errors.hpp"

namespace meshcorr::pipeline {

uint64_t hash_bytes(const void* data, size_t size, uint64_t seed) {
  const uint8_t* bytes = static_cast<const uint8_t*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t content_hash(const meshkit::TriMesh& mesh) {
  uint64_t h = hash_bytes(mesh.vertices.data(), mesh.vertices.size() * sizeof(meshkit::Vec3));
  return hash_bytes(mesh.faces.data(), mesh.faces.size() * sizeof(meshkit::Face), h);
}

uint64_t content_hash(const volumes::Volume& volume) {
  uint64_t h = hash_bytes(volume.dims.data(), sizeof(volume.dims));
  h = hash_bytes(volume.spacing.data(), sizeof(volume.spacing), h);
  h = hash_bytes(volume.origin.data(), sizeof(volume.origin), h);
  return hash_bytes(volume.voxels.data(), volume.voxels.size() * sizeof(int16_t), h);
}

AssetCache::AssetCache(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

geodesics::GeodesicTable AssetCache::geodesic_table(const meshkit::TriMesh& mesh) {
  char name[32];
  std::snprintf(name, sizeof(name), "geo_%016llx.bin",
                static_cast<unsigned long long>(content_hash(mesh)));
  auto path = root_ / name;
  if (std::filesystem::exists(path)) return geodesics::load_table(path);
  auto table = geodesics::geodesic_all_pairs(mesh);
  auto tmp = path;
  tmp += ".tmp";
  geodesics::save_table(table, tmp);
  std::filesystem::rename(tmp, path);
  // Reload so cached and fresh runs see identical (float32-rounded) values.
  return geodesics::load_table(path);
}

volumes::PatchSet AssetCache::patchset(const volumes::Volume& volume,
                                       const meshkit::TriMesh& mesh) {
  uint64_t key = content_hash(volume) ^ (content_hash(mesh) * 0x9e3779b97f4a7c15ull);
  char name[32];
  std::snprintf(name, sizeof(name), "pat_%016llx.bin", static_cast<unsigned long long>(key));
  auto path = root_ / name;
  if (std::filesystem::exists(path)) {
    std::ifstream is(path, std::ios::binary);
    uint64_t count = 0;
    is.read(reinterpret_cast<char*>(&count), sizeof(count));
    volumes::PatchSet set;
    set.count = size_t(count);
    set.data.resize(set.count * volumes::kPatchSize);
    is.read(reinterpret_cast<char*>(set.data.data()),
            std::streamsize(set.data.size() * sizeof(double)));
    if (!is) throw Error(ErrorCode::IOFailure, path.string() + ": truncated patch cache");
    return set;
  }
  auto set = volumes::extract_patchset(volume, mesh);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error(ErrorCode::IOFailure, tmp.string() + ": cannot open for writing");
    uint64_t count = set.count;
    os.write(reinterpret_cast<const char*>(&count), sizeof(count));
    os.write(reinterpret_cast<const char*>(set.data.data()),
             std::streamsize(set.data.size() * sizeof(double)));
    if (!os) throw Error(ErrorCode::IOFailure, tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
  return set;
}

}  // namespace meshcorr::pipeline
