#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "meshcorr/adam.hpp"
#include "meshcorr/tensor.hpp"

namespace meshcorr::autodiff {

// Ordered name -> tensor list; order is the registration order and is what
// aligns parameters with Adam moment buffers.
struct NamedTensors {
  std::vector<std::string> names;
  std::vector<Tensor> tensors;

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  void add(const std::string& name, Tensor tensor);
  size_t total_scalars() const;
};

// Binary little-endian checkpoint: manifest of (name, shape) entries followed
// by the concatenated float64 buffers, then an optional AdamState.
void save_checkpoint(const NamedTensors& params, const std::filesystem::path& path,
                     const AdamState* adam = nullptr);
NamedTensors load_checkpoint(const std::filesystem::path& path, AdamState* adam = nullptr);

}  // namespace meshcorr::autodiff
