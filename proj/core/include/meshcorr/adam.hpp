#pragma once

#include <vector>

#include "meshcorr/tensor.hpp"

namespace meshcorr::autodiff {

// Adam with bias correction. Moment buffers are kept per parameter in
// registration order.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 1e-4;

  // Sizes the moment buffers to match the parameter list; no-op when already
  // matching.
  void ensure_shapes(const std::vector<Tensor>& params);
};

// One Adam update over aligned parameter / gradient lists; increments t.
void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state);

}  // namespace meshcorr::autodiff
