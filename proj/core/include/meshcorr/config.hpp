#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "meshcorr/losses.hpp"
#include "meshcorr/model.hpp"

namespace meshcorr::pipeline {

enum class Variant { Base, ImageFeatures, ImagingLoss };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant variant);

struct TrainConfig {
  size_t epochs = 75;
  double lr = 1e-4;
  uint64_t seed = 0;
  Variant variant = Variant::Base;
  corrnet::ModelConfig model;
  losses::LossWeights weights;
  size_t geodesic_pair_samples = 1000;
  size_t checkpoint_every = 0;  // extra checkpoints every k epochs; 0 = best only
  std::filesystem::path cache_dir = ".meshcorr_cache";

  bool needs_patches_as_input() const { return variant == Variant::ImageFeatures; }
  bool needs_patches_for_loss() const { return variant == Variant::ImagingLoss; }
  void validate() const;
};

// Flat dotted-key/value view of a config file. Lines are `key = value`,
// `#` starts a comment. CLI flags override by writing keys before apply().
class ConfigTree {
 public:
  ConfigTree() = default;
  static ConfigTree load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;

  // Documented keys: train.epochs, train.lr, train.seed, train.variant,
  // train.geodesic_pair_samples, train.checkpoint_every, train.cache_dir,
  // model.geo_width, model.geo_depth, model.img_width, model.time_steps,
  // model.softmax_temperature, loss.w_reg, loss.w_arap, loss.w_geo,
  // loss.lambda_imaging.
  TrainConfig apply(TrainConfig base = {}) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace meshcorr::pipeline
