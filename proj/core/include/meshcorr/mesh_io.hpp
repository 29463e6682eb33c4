#pragma once

#include <filesystem>

#include "meshcorr/trimesh.hpp"

namespace meshcorr::meshkit {

// ASCII OFF. Positions are written with enough digits to round-trip float32.
void save_off(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh load_off(const std::filesystem::path& path);

// Binary little-endian PLY: float32 positions, uint32 vertex indices.
void save_ply(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh load_ply(const std::filesystem::path& path);

// Dispatches on extension (.off / .ply).
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh load_mesh(const std::filesystem::path& path);

}  // namespace meshcorr::meshkit
