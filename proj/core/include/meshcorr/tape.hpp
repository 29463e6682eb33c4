#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "meshcorr/tensor.hpp"

namespace meshcorr::autodiff {

// Reverse-mode tape over dense tensors. One tape per training step; a tape
// is confined to a single thread. Ops validate shapes, record a node, and
// return the result attached to the tape. Tensors with node == -1 passed to
// an op are registered as constants on first use.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf registration. Parameters receive gradients; constants do not.
  Tensor parameter(Tensor value);
  Tensor constant(Tensor value);

  Tensor matmul(const Tensor& a, const Tensor& b);
  // A * B^T; the matching layout for feature-matching logits.
  Tensor matmul_nt(const Tensor& a, const Tensor& b);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor elementwise_mul(const Tensor& a, const Tensor& b);
  Tensor scalar_mul(const Tensor& a, double c);
  Tensor concat_cols(const Tensor& a, const Tensor& b);
  Tensor gather_rows(const Tensor& a, std::vector<uint32_t> indices);
  // Column-wise max over segments of rows. Segment s covers
  // indices[offsets[s] .. offsets[s+1]); every segment must be non-empty.
  // The gradient routes to the winning row; ties go to the lowest row index.
  Tensor segment_max(const Tensor& a, std::vector<size_t> offsets,
                     std::vector<uint32_t> indices);
  Tensor relu(const Tensor& a);
  // Softmax of each row of a / temperature.
  Tensor row_softmax(const Tensor& a, double temperature);
  Tensor sum(const Tensor& a);
  Tensor mean(const Tensor& a);
  Tensor squared_norm(const Tensor& a);
  // Applies a fixed 3x3 matrix to each row of an m x 3 tensor. The matrices
  // are treated as constants by the backward pass.
  Tensor rotate_rows(const Tensor& a, std::vector<Eigen::Matrix3d> rotations);

  // Reverse traversal from a scalar loss node. Populates gradients for every
  // reachable node that needs one.
  void backward(const Tensor& loss);

  // Gradient of the loss w.r.t. this tensor's node; zeros when the node was
  // not reached.
  Tensor grad(const Tensor& leaf) const;

  size_t node_count() const { return nodes_.size(); }
  const Tensor& value(int node) const { return values_[size_t(node)]; }

 private:
  struct Node {
    std::vector<int> inputs;
    bool needs_grad = false;
    std::function<void(Tape&, int)> backward;
  };

  int attach(const Tensor& t);
  Tensor record(Tensor value, std::vector<int> inputs, std::function<void(Tape&, int)> backward);
  // Gradient accumulator for a node, allocated on first touch.
  double* bar(int node);
  bool has_bar(int node) const { return size_t(node) < bars_.size() && bars_[size_t(node)].size() > 0; }

  std::vector<Node> nodes_;
  std::vector<Tensor> values_;
  std::vector<Tensor> bars_;
};

}  // namespace meshcorr::autodiff
