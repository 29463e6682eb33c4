#include "meshcorr/tensor.hpp"

#include <cmath>
#include <numeric>

#include "meshcorr/errors.hpp"

namespace meshcorr::autodiff {

namespace {
size_t shape_product(const std::vector<size_t>& shape) {
  size_t p = 1;
  for (size_t d : shape) {
    if (d < 1) throw Error(ErrorCode::ShapeMismatch, "tensor dims must be >= 1");
    p *= d;
  }
  return p;
}
}  // namespace

Tensor::Tensor(std::vector<size_t> shape)
    : shape_(std::move(shape)),
      buffer_(std::make_shared<std::vector<double>>(shape_product(shape_), 0.0)) {}

Tensor::Tensor(std::vector<size_t> shape, std::vector<double> values) : shape_(std::move(shape)) {
  if (shape_product(shape_) != values.size())
    throw Error(ErrorCode::ShapeMismatch, "tensor shape does not match value count");
  buffer_ = std::make_shared<std::vector<double>>(std::move(values));
}

Tensor Tensor::full(std::vector<size_t> shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.buffer_->begin(), t.buffer_->end(), value);
  return t;
}

size_t Tensor::size() const { return buffer_ ? buffer_->size() : 0; }

double* Tensor::mutable_data() {
  if (!buffer_) return nullptr;
  if (buffer_.use_count() > 1) buffer_ = std::make_shared<std::vector<double>>(*buffer_);
  return buffer_->data();
}

bool Tensor::all_finite() const {
  if (!buffer_) return true;
  for (double v : *buffer_)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace meshcorr::autodiff
