#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "meshcorr/geodesics.hpp"
#include "meshcorr/trimesh.hpp"
#include "meshcorr/volume.hpp"

namespace meshcorr::pipeline {

// FNV-1a over raw bytes; stable across platforms of equal endianness.
uint64_t hash_bytes(const void* data, size_t size, uint64_t seed = 14695981039346656037ull);
uint64_t content_hash(const meshkit::TriMesh& mesh);
uint64_t content_hash(const volumes::Volume& volume);

// Disk cache for geodesic tables and patch sets, keyed by content hash.
// Writes go through a temp file and an atomic rename.
class AssetCache {
 public:
  explicit AssetCache(std::filesystem::path root);

  geodesics::GeodesicTable geodesic_table(const meshkit::TriMesh& mesh);
  volumes::PatchSet patchset(const volumes::Volume& volume, const meshkit::TriMesh& mesh);

 private:
  std::filesystem::path root_;
};

}  // namespace meshcorr::pipeline
