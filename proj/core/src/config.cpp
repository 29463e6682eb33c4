#include "meshcorr/config.hpp"

#include <fstream>

#include "meshcorr/errors.hpp"

namespace meshcorr::pipeline {

Variant parse_variant(const std::string& name) {
  if (name == "base") return Variant::Base;
  if (name == "imgfeat" || name == "image_features") return Variant::ImageFeatures;
  if (name == "imgloss" || name == "imaging_loss") return Variant::ImagingLoss;
  throw Error(ErrorCode::BadConfig,
              "unknown variant '" + name + "' (expected base | imgfeat | imgloss)");
}

std::string variant_name(Variant variant) {
  switch (variant) {
    case Variant::Base: return "base";
    case Variant::ImageFeatures: return "imgfeat";
    case Variant::ImagingLoss: return "imgloss";
  }
  return "base";
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::BadConfig, "train: epochs must be >= 1");
  if (lr <= 0) throw Error(ErrorCode::BadConfig, "train: lr must be > 0");
  if (geodesic_pair_samples < 1)
    throw Error(ErrorCode::BadConfig, "train: geodesic_pair_samples must be >= 1");
  model.validate();
}

namespace {
std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  size_t e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}
}  // namespace

ConfigTree ConfigTree::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IOFailure, path.string() + ": cannot open");
  ConfigTree tree;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::BadConfig, path.string() + ":" + std::to_string(line_no) +
                                            ": expected 'key = value'");
    tree.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return tree;
}

void ConfigTree::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool ConfigTree::has(const std::string& key) const { return values_.count(key) > 0; }

std::string ConfigTree::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigTree::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadConfig, "config key '" + key + "': bad number '" + it->second + "'");
  }
}

int64_t ConfigTree::get_int(const std::string& key, int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadConfig, "config key '" + key + "': bad integer '" + it->second + "'");
  }
}

TrainConfig ConfigTree::apply(TrainConfig base) const {
  TrainConfig c = base;
  c.epochs = size_t(get_int("train.epochs", int64_t(base.epochs)));
  c.lr = get_double("train.lr", base.lr);
  c.seed = uint64_t(get_int("train.seed", int64_t(base.seed)));
  if (has("train.variant")) c.variant = parse_variant(get("train.variant", ""));
  c.geodesic_pair_samples =
      size_t(get_int("train.geodesic_pair_samples", int64_t(base.geodesic_pair_samples)));
  c.checkpoint_every = size_t(get_int("train.checkpoint_every", int64_t(base.checkpoint_every)));
  c.cache_dir = get("train.cache_dir", base.cache_dir.string());

  c.model.geo_width = size_t(get_int("model.geo_width", int64_t(base.model.geo_width)));
  c.model.geo_depth = size_t(get_int("model.geo_depth", int64_t(base.model.geo_depth)));
  c.model.img_width = size_t(get_int("model.img_width", int64_t(base.model.img_width)));
  c.model.time_steps = size_t(get_int("model.time_steps", int64_t(base.model.time_steps)));
  c.model.softmax_temperature =
      get_double("model.softmax_temperature", base.model.softmax_temperature);

  c.weights.w_reg = get_double("loss.w_reg", base.weights.w_reg);
  c.weights.w_arap = get_double("loss.w_arap", base.weights.w_arap);
  c.weights.w_geo = get_double("loss.w_geo", base.weights.w_geo);
  c.weights.lambda_imaging = get_double("loss.lambda_imaging", base.weights.lambda_imaging);

  c.model.use_image_features = (c.variant == Variant::ImageFeatures);
  c.validate();
  return c;
}

}  // namespace meshcorr::pipeline
