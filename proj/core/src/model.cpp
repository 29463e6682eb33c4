#include "meshcorr/model.hpp"

#include <cmath>

#include "meshcorr/errors.hpp"
#include "meshcorr/rng.hpp"

namespace meshcorr::corrnet {

double ModelConfig::matching_temperature() const {
  return softmax_temperature > 0 ? softmax_temperature : std::sqrt(double(feature_dim()));
}

void ModelConfig::validate() const {
  if (geo_width < 1 || img_width < 1)
    throw Error(ErrorCode::BadConfig, "model widths must be >= 1");
  if (geo_depth < 1) throw Error(ErrorCode::BadConfig, "geo_depth must be >= 1");
  if (time_steps < 1) throw Error(ErrorCode::BadConfig, "time_steps must be >= 1");
}

MeshGraph MeshGraph::build(const meshkit::TriMesh& mesh) {
  MeshGraph graph;
  graph.vertex_count = mesh.vertex_count();
  auto ring = mesh.one_ring();
  graph.offsets.reserve(graph.vertex_count + 1);
  graph.offsets.push_back(0);
  for (size_t i = 0; i < ring.size(); ++i) {
    if (ring[i].empty()) {
      graph.centers.push_back(uint32_t(i));
      graph.neighbors.push_back(uint32_t(i));
    } else {
      for (uint32_t j : ring[i]) {
        graph.centers.push_back(uint32_t(i));
        graph.neighbors.push_back(j);
      }
    }
    graph.offsets.push_back(graph.centers.size());
  }
  return graph;
}

namespace {

void init_linear(NamedTensors& params, Rng& rng, const std::string& prefix, size_t fan_in,
                 size_t fan_out, bool zero = false) {
  Tensor w({fan_in, fan_out});
  Tensor b({size_t(1), fan_out});
  if (!zero) {
    double bound = std::sqrt(6.0 / double(fan_in));
    double* pw = w.mutable_data();
    for (size_t i = 0; i < w.size(); ++i) pw[i] = rng.uniform(-bound, bound);
  }
  params.add(prefix + ".w", std::move(w));
  params.add(prefix + ".b", std::move(b));
}

Tensor linear(Tape& tape, const Tensor& x, const BoundParams& params, const std::string& prefix) {
  const Tensor& w = params.at(prefix + ".w");
  const Tensor& b = params.at(prefix + ".b");
  Tensor ones = tape.constant(Tensor::full({x.rows(), 1}, 1.0));
  return tape.add(tape.matmul(x, w), tape.matmul(ones, b));
}

// Image-encoder geometry. Three valid 3x3x3 conv stages with 2x in-plane
// max-pooling between them take a 7x19x19 patch down to 1x1x1:
//   conv 7,19,19 -> 5,17,17   pool -> 5,8,8
//   conv         -> 3,6,6     pool -> 3,3,3
//   conv         -> 1,1,1
struct StageDims {
  size_t z, y, x;
  size_t count() const { return z * y * x; }
};

std::vector<uint32_t> conv_gather_indices(size_t n, StageDims in, StageDims out, int dz, int dy,
                                          int dx) {
  std::vector<uint32_t> idx;
  idx.reserve(n * out.count());
  for (size_t v = 0; v < n; ++v)
    for (size_t z = 0; z < out.z; ++z)
      for (size_t y = 0; y < out.y; ++y)
        for (size_t x = 0; x < out.x; ++x) {
          size_t src = ((v * in.z + z + size_t(dz)) * in.y + y + size_t(dy)) * in.x + x +
                       size_t(dx);
          idx.push_back(uint32_t(src));
        }
  return idx;
}

Tensor conv3d_valid(Tape& tape, const Tensor& x, size_t n, StageDims in, StageDims out,
                    const BoundParams& params, const std::string& prefix) {
  Tensor cols;
  bool first = true;
  for (int dz = 0; dz < 3; ++dz)
    for (int dy = 0; dy < 3; ++dy)
      for (int dx = 0; dx < 3; ++dx) {
        Tensor g = tape.gather_rows(x, conv_gather_indices(n, in, out, dz, dy, dx));
        cols = first ? g : tape.concat_cols(cols, g);
        first = false;
      }
  return linear(tape, cols, params, prefix);
}

Tensor pool_inplane(Tape& tape, const Tensor& x, size_t n, StageDims in, StageDims out) {
  std::vector<size_t> offsets{0};
  std::vector<uint32_t> indices;
  indices.reserve(n * out.count() * 4);
  for (size_t v = 0; v < n; ++v)
    for (size_t z = 0; z < out.z; ++z)
      for (size_t y = 0; y < out.y; ++y)
        for (size_t x_ = 0; x_ < out.x; ++x_) {
          for (int py = 0; py < 2; ++py)
            for (int px = 0; px < 2; ++px) {
              size_t src = ((v * in.z + z) * in.y + 2 * y + size_t(py)) * in.x + 2 * x_ +
                           size_t(px);
              indices.push_back(uint32_t(src));
            }
          offsets.push_back(indices.size());
        }
  return tape.segment_max(x, std::move(offsets), std::move(indices));
}

}  // namespace

NamedTensors init_params(const ModelConfig& config, uint64_t seed) {
  config.validate();
  Rng rng(seed);
  NamedTensors params;
  const size_t w = config.geo_width;

  init_linear(params, rng, "geo.lift", 3, w);
  for (size_t i = 0; i < config.geo_depth; ++i) {
    std::string p = "geo.block" + std::to_string(i);
    init_linear(params, rng, p + ".l1", 2 * w, w);
    init_linear(params, rng, p + ".l2", w, w);
  }
  if (config.use_image_features) {
    init_linear(params, rng, "img.conv1", 27 * 1, 8);
    init_linear(params, rng, "img.conv2", 27 * 8, 16);
    init_linear(params, rng, "img.conv3", 27 * 16, 32);
    init_linear(params, rng, "img.fc", 32, config.img_width);
  }
  init_linear(params, rng, "interp.lift", 7, w);
  for (size_t i = 0; i < config.geo_depth; ++i) {
    std::string p = "interp.block" + std::to_string(i);
    init_linear(params, rng, p + ".l1", 2 * w, w);
    init_linear(params, rng, p + ".l2", w, w);
  }
  init_linear(params, rng, "interp.head", w, 3, /*zero=*/true);
  return params;
}

BoundParams BoundParams::bind(Tape& tape, const NamedTensors& params) {
  BoundParams bound;
  bound.source = &params;
  bound.bound.reserve(params.tensors.size());
  for (const auto& t : params.tensors) bound.bound.push_back(tape.parameter(t));
  return bound;
}

const Tensor& BoundParams::at(const std::string& name) const {
  for (size_t i = 0; i < source->names.size(); ++i)
    if (source->names[i] == name) return bound[i];
  throw Error(ErrorCode::BadConfig, "no bound parameter named '" + name + "'");
}

std::vector<Tensor> BoundParams::collect_grads(const Tape& tape) const {
  std::vector<Tensor> grads;
  grads.reserve(bound.size());
  for (const auto& t : bound) grads.push_back(tape.grad(t));
  return grads;
}

double CorrespondenceMatrix::max_row_sum_error() const {
  double worst = 0.0;
  const double* p = pi.data();
  for (size_t r = 0; r < pi.rows(); ++r) {
    double total = 0.0;
    for (size_t c = 0; c < pi.cols(); ++c) total += p[r * pi.cols() + c];
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

Tensor InterpolationSequence::frame(const Tensor& source_vertices, size_t k) const {
  const Tensor& d = displacements[k];
  Tensor out(d.shape());
  const double* pv = source_vertices.data();
  const double* pd = d.data();
  double* po = out.mutable_data();
  for (size_t i = 0; i < d.size(); ++i) po[i] = pv[i] + pd[i];
  return out;
}

Tensor vertices_tensor(const meshkit::TriMesh& mesh) {
  Tensor t({mesh.vertex_count(), 3});
  double* p = t.mutable_data();
  for (size_t i = 0; i < mesh.vertex_count(); ++i) {
    p[i * 3] = mesh.vertices[i].x();
    p[i * 3 + 1] = mesh.vertices[i].y();
    p[i * 3 + 2] = mesh.vertices[i].z();
  }
  return t;
}

Tensor patches_tensor(const volumes::PatchSet& patches) {
  return Tensor({std::max<size_t>(patches.count, 1), volumes::kPatchSize},
                patches.count ? patches.data : std::vector<double>(volumes::kPatchSize, 0.0));
}

Tensor edgeconv_block(Tape& tape, const Tensor& features, const MeshGraph& graph,
                      const BoundParams& params, const std::string& prefix) {
  if (features.rows() != graph.vertex_count)
    throw Error(ErrorCode::ShapeMismatch, "edgeconv_block: feature rows != vertex count");
  Tensor center = tape.gather_rows(features, graph.centers);
  Tensor neighbor = tape.gather_rows(features, graph.neighbors);
  Tensor diff = tape.sub(neighbor, center);
  Tensor edge_in = tape.concat_cols(center, diff);
  Tensor hidden = tape.relu(linear(tape, edge_in, params, prefix + ".l1"));
  Tensor edge_out = linear(tape, hidden, params, prefix + ".l2");
  std::vector<uint32_t> rows(graph.edge_rows());
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = uint32_t(i);
  Tensor agg = tape.segment_max(edge_out, graph.offsets, std::move(rows));
  return tape.add(features, agg);
}

Tensor image_encoder(Tape& tape, const Tensor& patches, size_t vertex_count,
                     const BoundParams& params, const ModelConfig& config) {
  const size_t n = vertex_count;
  if (patches.rows() != n || patches.cols() != volumes::kPatchSize)
    throw Error(ErrorCode::ShapeMismatch, "image_encoder: patch tensor shape mismatch");

  // Reshape [n, 2527] to one scalar per row: [n*7*19*19, 1].
  Tensor grid({n * volumes::kPatchSize, 1}, std::vector<double>(patches.data(),
                                                                patches.data() + patches.size()));
  Tensor x = tape.constant(std::move(grid));

  StageDims d0{7, 19, 19}, c1{5, 17, 17}, p1{5, 8, 8};
  StageDims c2{3, 6, 6}, p2{3, 3, 3}, c3{1, 1, 1};

  x = tape.relu(conv3d_valid(tape, x, n, d0, c1, params, "img.conv1"));
  x = pool_inplane(tape, x, n, c1, p1);
  x = tape.relu(conv3d_valid(tape, x, n, p1, c2, params, "img.conv2"));
  x = pool_inplane(tape, x, n, c2, p2);
  x = tape.relu(conv3d_valid(tape, x, n, p2, c3, params, "img.conv3"));
  // c3 is 1x1x1, so rows are already one per vertex.
  return linear(tape, x, params, "img.fc");
}

Tensor extract_features(Tape& tape, const meshkit::TriMesh& mesh, const MeshGraph& graph,
                        const Tensor* patches, const BoundParams& params,
                        const ModelConfig& config) {
  Tensor coords = tape.constant(vertices_tensor(mesh));
  Tensor h = linear(tape, coords, params, "geo.lift");
  for (size_t i = 0; i < config.geo_depth; ++i)
    h = edgeconv_block(tape, h, graph, params, "geo.block" + std::to_string(i));
  if (config.use_image_features) {
    if (!patches)
      throw Error(ErrorCode::MissingPatches,
                  "extract_features: image features enabled but no patches supplied");
    Tensor img = image_encoder(tape, *patches, mesh.vertex_count(), params, config);
    h = tape.concat_cols(h, img);
  }
  return h;
}

CorrespondenceMatrix match(Tape& tape, const Tensor& features_x, const Tensor& features_y,
                           double temperature) {
  Tensor logits = tape.matmul_nt(features_x, features_y);
  return {tape.row_softmax(logits, temperature)};
}

Tensor compute_offsets(Tape& tape, const Tensor& pi, const Tensor& vertices_y,
                       const Tensor& vertices_x) {
  if (pi.cols() != vertices_y.rows())
    throw Error(ErrorCode::ShapeMismatch, "compute_offsets: pi columns != target vertex count");
  return tape.sub(tape.matmul(pi, vertices_y), vertices_x);
}

InterpolationSequence interpolate(Tape& tape, const Tensor& vertices_x, const MeshGraph& graph,
                                  const Tensor& delta, const BoundParams& params,
                                  const ModelConfig& config) {
  if (delta.rows() != vertices_x.rows())
    throw Error(ErrorCode::ShapeMismatch, "interpolate: delta rows != vertex count");
  InterpolationSequence seq;
  const size_t n = vertices_x.rows();
  const size_t T = config.time_steps;
  for (size_t k = 1; k <= T; ++k) {
    double t_k = double(k) / double(T);
    Tensor t_col = tape.constant(Tensor::full({n, 1}, t_k));
    Tensor in = tape.concat_cols(tape.concat_cols(vertices_x, delta), t_col);
    Tensor h = linear(tape, in, params, "interp.lift");
    for (size_t i = 0; i < config.geo_depth; ++i)
      h = edgeconv_block(tape, h, graph, params, "interp.block" + std::to_string(i));
    seq.times.push_back(t_k);
    seq.displacements.push_back(linear(tape, h, params, "interp.head"));
  }
  return seq;
}

ForwardResult forward_pair(Tape& tape, const meshkit::TriMesh& mesh_x,
                           const meshkit::TriMesh& mesh_y,
                           const volumes::PatchSet* patches_x,
                           const volumes::PatchSet* patches_y, const BoundParams& params,
                           const ModelConfig& config) {
  MeshGraph graph_x = MeshGraph::build(mesh_x);
  MeshGraph graph_y = MeshGraph::build(mesh_y);

  Tensor px, py;
  const Tensor* ppx = nullptr;
  const Tensor* ppy = nullptr;
  if (config.use_image_features) {
    if (!patches_x || !patches_y)
      throw Error(ErrorCode::MissingPatches, "forward_pair: variant requires patch sets");
    px = patches_tensor(*patches_x);
    py = patches_tensor(*patches_y);
    ppx = &px;
    ppy = &py;
  }

  Tensor fx = extract_features(tape, mesh_x, graph_x, ppx, params, config);
  Tensor fy = extract_features(tape, mesh_y, graph_y, ppy, params, config);
  CorrespondenceMatrix pi = match(tape, fx, fy, config.matching_temperature());

  Tensor vx = tape.constant(vertices_tensor(mesh_x));
  Tensor vy = tape.constant(vertices_tensor(mesh_y));
  Tensor delta = compute_offsets(tape, pi.pi, vy, vx);
  InterpolationSequence seq = interpolate(tape, vx, graph_x, delta, params, config);
  return {std::move(pi), std::move(seq), std::move(vx), std::move(vy)};
}

ForwardResult forward_pair(Tape& tape, const meshkit::TriMesh& mesh_x,
                           const meshkit::TriMesh& mesh_y,
                           const volumes::PatchSet* patches_x,
                           const volumes::PatchSet* patches_y, const NamedTensors& params,
                           const ModelConfig& config) {
  BoundParams bound = BoundParams::bind(tape, params);
  return forward_pair(tape, mesh_x, mesh_y, patches_x, patches_y, bound, config);
}

std::vector<uint32_t> hard_correspondence(const Tensor& pi) {
  std::vector<uint32_t> map(pi.rows());
  const double* p = pi.data();
  const size_t m = pi.cols();
  for (size_t r = 0; r < pi.rows(); ++r) {
    uint32_t best = 0;
    double best_val = p[r * m];
    for (size_t c = 1; c < m; ++c) {
      if (p[r * m + c] > best_val) {
        best_val = p[r * m + c];
        best = uint32_t(c);
      }
    }
    map[r] = best;
  }
  return map;
}

}  // namespace meshcorr::corrnet
