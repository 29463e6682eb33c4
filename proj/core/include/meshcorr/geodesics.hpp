#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "meshcorr/trimesh.hpp"

namespace meshcorr::geodesics {

// Dense all-pairs graph-geodesic distances in mm. Unreachable pairs hold
// +infinity.
struct GeodesicTable {
  size_t n = 0;
  std::vector<double> d;  // n x n row-major

  double operator()(size_t i, size_t j) const { return d[i * n + j]; }
  double& operator()(size_t i, size_t j) { return d[i * n + j]; }
};

// Shortest-path distances over the mesh edge graph with Euclidean edge
// weights, one Dijkstra run per source. Sources run in parallel.
GeodesicTable geodesic_all_pairs(const meshkit::TriMesh& mesh);

// k ordered pairs (i, j), i != j, uniform with replacement, deterministic per
// seed. Requires n >= 2 and k >= 1.
std::vector<std::pair<uint32_t, uint32_t>> sample_pairs(size_t n, size_t k, uint64_t seed);

// Cache file: magic, n (u64), then n^2 float32 distances row-major.
void save_table(const GeodesicTable& table, const std::filesystem::path& path);
GeodesicTable load_table(const std::filesystem::path& path);

}  // namespace meshcorr::geodesics
