#pragma once

#include <memory>
#include <vector>

namespace meshcorr::autodiff {

// Dense row-major tensor of 64-bit floats with value semantics. Buffers are
// shared on copy and cloned on first mutation. `node` is the handle into the
// active tape, or -1 when the tensor is not attached.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<size_t> shape);
  Tensor(std::vector<size_t> shape, std::vector<double> values);

  static Tensor zeros(std::vector<size_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<size_t> shape, double value);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const std::vector<size_t>& shape() const { return shape_; }
  size_t size() const;
  size_t rank() const { return shape_.size(); }
  bool is_scalar() const { return size() == 1; }

  // 2D accessors; a rank-1 tensor counts as a single row.
  size_t rows() const { return rank() >= 2 ? shape_[0] : (shape_.empty() ? 0 : 1); }
  size_t cols() const { return rank() >= 2 ? shape_[1] : (shape_.empty() ? 0 : shape_[0]); }

  const double* data() const { return buffer_ ? buffer_->data() : nullptr; }
  double* mutable_data();

  double value() const { return (*buffer_)[0]; }  // scalar convenience
  double at(size_t i) const { return (*buffer_)[i]; }
  double at(size_t i, size_t j) const { return (*buffer_)[i * cols() + j]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  int node = -1;

 private:
  std::vector<size_t> shape_;
  std::shared_ptr<std::vector<double>> buffer_;
};

}  // namespace meshcorr::autodiff
