#pragma once

#include <filesystem>

#include "meshcorr/dataset.hpp"

namespace meshcorr::pipeline {

struct SynthParams {
  uint64_t seed = 0;
  size_t n_shapes = 20;  // patients; each carries n_organs organ meshes
  size_t n_organs = 1;
  size_t target_vertices = 300;
  std::filesystem::path out_dir;
};

// Generates "organ" meshes as smoothly deformed bumpy ellipsoids sharing one
// template triangulation (so ground-truth vertex correspondence is known and
// saved as canonical maps), matched CT-like volumes whose intensity follows
// the signed distance to the organ surface with a canonical surface pattern
// plus noise, and landmark files at parameterisation-fixed points. Vertex
// order is permuted per patient so identity maps carry no information.
DatasetManifest synth_generate(const SynthParams& params);

}  // namespace meshcorr::pipeline
