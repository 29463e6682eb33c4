#include "meshcorr/adam.hpp"

#include <cmath>

#include "meshcorr/errors.hpp"

namespace meshcorr::autodiff {

void AdamState::ensure_shapes(const std::vector<Tensor>& params) {
  if (m.size() == params.size() && v.size() == params.size()) {
    bool matches = true;
    for (size_t i = 0; i < params.size(); ++i)
      matches = matches && m[i].same_shape(params[i]) && v[i].same_shape(params[i]);
    if (matches) return;
  }
  m.clear();
  v.clear();
  for (const auto& p : params) {
    m.push_back(Tensor::zeros(p.shape()));
    v.push_back(Tensor::zeros(p.shape()));
  }
  t = 0;
}

void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state) {
  if (params.size() != grads.size())
    throw Error(ErrorCode::ShapeMismatch, "adam_step: parameter/gradient count mismatch");
  state.ensure_shapes(params);
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.t));
  for (size_t p = 0; p < params.size(); ++p) {
    if (!params[p].same_shape(grads[p]))
      throw Error(ErrorCode::ShapeMismatch, "adam_step: gradient shape mismatch at parameter " +
                                                std::to_string(p));
    double* pm = state.m[p].mutable_data();
    double* pv = state.v[p].mutable_data();
    double* px = params[p].mutable_data();
    const double* pg = grads[p].data();
    const size_t size = params[p].size();
    for (size_t i = 0; i < size; ++i) {
      pm[i] = state.beta1 * pm[i] + (1.0 - state.beta1) * pg[i];
      pv[i] = state.beta2 * pv[i] + (1.0 - state.beta2) * pg[i] * pg[i];
      double mhat = pm[i] / bc1;
      double vhat = pv[i] / bc2;
      px[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace meshcorr::autodiff
