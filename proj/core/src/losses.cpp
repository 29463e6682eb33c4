#include "meshcorr/losses.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "meshcorr/errors.hpp"

namespace meshcorr::losses {

namespace {

// Orthogonal Procrustes over each vertex one-ring: R_i maximises
// sum_j (f_j . R e_j) for source edges e and target edges f, reflection
// corrected to det +1.
std::vector<Eigen::Matrix3d> one_ring_rotations(const corrnet::MeshGraph& graph,
                                                const Tensor& source_frame,
                                                const Tensor& target_frame) {
  const double* ps = source_frame.data();
  const double* pt = target_frame.data();
  auto edge_vec = [](const double* p, uint32_t a, uint32_t b) {
    return Eigen::Vector3d(p[a * 3] - p[b * 3], p[a * 3 + 1] - p[b * 3 + 1],
                           p[a * 3 + 2] - p[b * 3 + 2]);
  };

  std::vector<Eigen::Matrix3d> per_vertex(graph.vertex_count, Eigen::Matrix3d::Identity());
  for (size_t i = 0; i < graph.vertex_count; ++i) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (size_t e = graph.offsets[i]; e < graph.offsets[i + 1]; ++e) {
      uint32_t c = graph.centers[e], nb = graph.neighbors[e];
      h += edge_vec(ps, c, nb) * edge_vec(pt, c, nb).transpose();
    }
    if (h.squaredNorm() <= 0) continue;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU(), v = svd.matrixV();
    Eigen::Matrix3d r = v * u.transpose();
    if (r.determinant() < 0) {
      v.col(2) *= -1.0;
      r = v * u.transpose();
    }
    per_vertex[i] = r;
  }
  return per_vertex;
}

}  // namespace

Tensor registration_loss(Tape& tape, const Tensor& final_frame, const Tensor& pi,
                         const Tensor& vertices_y) {
  if (final_frame.cols() != 3 || vertices_y.cols() != 3 ||
      final_frame.rows() != pi.rows() || pi.cols() != vertices_y.rows())
    throw Error(ErrorCode::ShapeMismatch, "registration_loss: inconsistent shapes");
  Tensor matched = tape.matmul(pi, vertices_y);
  Tensor diff = tape.sub(final_frame, matched);
  return tape.scalar_mul(tape.squared_norm(diff), 1.0 / double(final_frame.rows()));
}

Tensor arap_loss(Tape& tape, const corrnet::MeshGraph& graph, const Tensor& vertices_x,
                 const corrnet::InterpolationSequence& sequence) {
  const size_t n = graph.vertex_count;
  if (vertices_x.rows() != n)
    throw Error(ErrorCode::ShapeMismatch, "arap_loss: vertex count mismatch");

  std::vector<uint32_t> rows(graph.edge_rows());
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = uint32_t(i);

  auto edge_tensor = [&](const Tensor& frame) {
    Tensor c = tape.gather_rows(frame, graph.centers);
    Tensor nb = tape.gather_rows(frame, graph.neighbors);
    return tape.sub(c, nb);
  };

  Tensor total;
  Tensor prev = vertices_x;
  for (size_t k = 0; k < sequence.displacements.size(); ++k) {
    Tensor current = tape.add(vertices_x, sequence.displacements[k]);
    auto rotations = one_ring_rotations(graph, tape.value(prev.node), tape.value(current.node));
    std::vector<Eigen::Matrix3d> per_edge(graph.edge_rows());
    for (size_t e = 0; e < graph.edge_rows(); ++e) per_edge[e] = rotations[graph.centers[e]];

    Tensor source_edges = edge_tensor(prev);
    Tensor target_edges = edge_tensor(current);
    Tensor residual = tape.sub(target_edges, tape.rotate_rows(source_edges, std::move(per_edge)));
    Tensor energy = tape.scalar_mul(tape.squared_norm(residual), 1.0 / double(n));
    total = (k == 0) ? energy : tape.add(total, energy);
    prev = current;
  }
  if (sequence.displacements.empty()) total = tape.constant(Tensor::scalar(0.0));
  return total;
}

Tensor geodesic_loss(Tape& tape, const Tensor& pi, const geodesics::GeodesicTable& d_x,
                     const geodesics::GeodesicTable& d_y,
                     const std::vector<std::pair<uint32_t, uint32_t>>& pairs) {
  const size_t n = pi.rows(), m = pi.cols();
  if (d_x.n != n || d_y.n != m)
    throw Error(ErrorCode::ShapeMismatch, "geodesic_loss: table sizes do not match pi");
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "geodesic_loss: no sampled pairs");

  std::vector<uint32_t> rows_i, rows_j;
  std::vector<double> dx_vals;
  rows_i.reserve(pairs.size());
  rows_j.reserve(pairs.size());
  dx_vals.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    rows_i.push_back(i);
    rows_j.push_back(j);
    dx_vals.push_back(d_x(i, j));
  }

  Tensor dy = tape.constant(Tensor({m, m}, std::vector<double>(d_y.d)));
  Tensor pi_i = tape.gather_rows(pi, std::move(rows_i));
  Tensor pi_j = tape.gather_rows(pi, std::move(rows_j));
  Tensor lifted = tape.matmul(pi_i, dy);                       // k x m
  Tensor prod = tape.elementwise_mul(lifted, pi_j);            // k x m
  Tensor ones = tape.constant(Tensor::full({m, 1}, 1.0));
  Tensor row_dots = tape.matmul(prod, ones);                   // k x 1
  Tensor dx = tape.constant(Tensor({pairs.size(), 1}, std::move(dx_vals)));
  Tensor diff = tape.sub(row_dots, dx);
  return tape.scalar_mul(tape.squared_norm(diff), 1.0 / double(pairs.size()));
}

Tensor imaging_loss(Tape& tape, const Tensor& pi, const Tensor& patches_x,
                    const Tensor& patches_y) {
  if (pi.rows() != patches_x.rows() || pi.cols() != patches_y.rows() ||
      patches_x.cols() != patches_y.cols())
    throw Error(ErrorCode::ShapeMismatch, "imaging_loss: patch rows must match pi dims");
  Tensor matched = tape.matmul(pi, patches_y);
  Tensor diff = tape.sub(matched, patches_x);
  return tape.scalar_mul(tape.squared_norm(diff),
                         1.0 / double(patches_x.rows() * patches_x.cols()));
}

LossBreakdown total_loss(Tape& tape, const Tensor& reg, const Tensor& arap, const Tensor& geo,
                         const Tensor* imaging, const LossWeights& weights) {
  LossBreakdown out;
  out.reg = reg.value();
  out.arap = arap.value();
  out.geo = geo.value();
  Tensor total = tape.add(tape.add(tape.scalar_mul(reg, weights.w_reg),
                                   tape.scalar_mul(arap, weights.w_arap)),
                          tape.scalar_mul(geo, weights.w_geo));
  if (imaging) {
    out.imaging = imaging->value();
    total = tape.add(total, tape.scalar_mul(*imaging, weights.lambda_imaging));
  }
  out.total = total.value();
  out.total_node = total;
  return out;
}

}  // namespace meshcorr::losses
