#pragma once

#include <optional>
#include <vector>

#include "meshcorr/checkpoint.hpp"
#include "meshcorr/tape.hpp"
#include "meshcorr/tensor.hpp"
#include "meshcorr/trimesh.hpp"
#include "meshcorr/volume.hpp"

namespace meshcorr::corrnet {

using autodiff::NamedTensors;
using autodiff::Tape;
using autodiff::Tensor;

struct ModelConfig {
  size_t geo_width = 128;
  size_t geo_depth = 6;
  bool use_image_features = false;
  size_t img_width = 64;
  size_t time_steps = 5;
  // 0 selects sqrt(feature dim) at match time.
  double softmax_temperature = 0.0;

  size_t feature_dim() const { return geo_width + (use_image_features ? img_width : 0); }
  double matching_temperature() const;
  void validate() const;
};

// Directed one-ring edge list grouped by centre vertex; isolated vertices get
// a self-loop. Rows for vertex i are offsets[i] .. offsets[i+1].
struct MeshGraph {
  std::vector<uint32_t> centers;
  std::vector<uint32_t> neighbors;
  std::vector<size_t> offsets;
  size_t vertex_count = 0;

  static MeshGraph build(const meshkit::TriMesh& mesh);
  size_t edge_rows() const { return centers.size(); }
};

// Seeded Kaiming-style fan-in uniform init; the interpolator head is
// zero-initialised so the untrained displacement field is exactly zero.
NamedTensors init_params(const ModelConfig& config, uint64_t seed);

// Parameters registered on a tape for one step, preserving source order.
struct BoundParams {
  const NamedTensors* source = nullptr;
  std::vector<Tensor> bound;

  static BoundParams bind(Tape& tape, const NamedTensors& params);
  const Tensor& at(const std::string& name) const;
  // Gradients aligned with source order, zeros where unreached.
  std::vector<Tensor> collect_grads(const Tape& tape) const;
};

struct CorrespondenceMatrix {
  Tensor pi;  // n x m, rows sum to 1
  size_t source_count() const { return pi.rows(); }
  size_t target_count() const { return pi.cols(); }
  double max_row_sum_error() const;
};

struct InterpolationSequence {
  std::vector<double> times;           // k / T, k = 1..T
  std::vector<Tensor> displacements;   // each n x 3

  // Vertex positions of frame k (0-based into times).
  Tensor frame(const Tensor& source_vertices, size_t k) const;
};

Tensor vertices_tensor(const meshkit::TriMesh& mesh);
Tensor patches_tensor(const volumes::PatchSet& patches);

// out_i = in_i + max_{j in N(i)} MLP([in_i || in_j - in_i]); MLP is
// linear-relu-linear at constant width.
Tensor edgeconv_block(Tape& tape, const Tensor& features, const MeshGraph& graph,
                      const BoundParams& params, const std::string& prefix);

Tensor image_encoder(Tape& tape, const Tensor& patches, size_t vertex_count,
                     const BoundParams& params, const ModelConfig& config);

// Vertex coordinates lifted to geo_width, geo_depth residual EdgeConv blocks,
// optionally concatenated with image features. The same parameters serve
// source and target (Siamese sharing).
Tensor extract_features(Tape& tape, const meshkit::TriMesh& mesh, const MeshGraph& graph,
                        const Tensor* patches, const BoundParams& params,
                        const ModelConfig& config);

CorrespondenceMatrix match(Tape& tape, const Tensor& features_x, const Tensor& features_y,
                           double temperature);

// delta = pi * V_Y - V_X
Tensor compute_offsets(Tape& tape, const Tensor& pi, const Tensor& vertices_y,
                       const Tensor& vertices_x);

InterpolationSequence interpolate(Tape& tape, const Tensor& vertices_x, const MeshGraph& graph,
                                  const Tensor& delta, const BoundParams& params,
                                  const ModelConfig& config);

struct ForwardResult {
  CorrespondenceMatrix pi;
  InterpolationSequence sequence;
  Tensor vertices_x;  // constants registered on the tape
  Tensor vertices_y;
};

ForwardResult forward_pair(Tape& tape, const meshkit::TriMesh& mesh_x,
                           const meshkit::TriMesh& mesh_y,
                           const volumes::PatchSet* patches_x,
                           const volumes::PatchSet* patches_y, const NamedTensors& params,
                           const ModelConfig& config);
ForwardResult forward_pair(Tape& tape, const meshkit::TriMesh& mesh_x,
                           const meshkit::TriMesh& mesh_y,
                           const volumes::PatchSet* patches_x,
                           const volumes::PatchSet* patches_y, const BoundParams& params,
                           const ModelConfig& config);

// Row argmax; ties break to the lowest column index.
std::vector<uint32_t> hard_correspondence(const Tensor& pi);

}  // namespace meshcorr::corrnet
