#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meshcorr/cache.hpp"
#include "meshcorr/config.hpp"
#include "meshcorr/dataset.hpp"
#include "meshcorr/metrics.hpp"
#include "meshcorr/model.hpp"

namespace meshcorr::pipeline {

struct OrganAssets {
  meshkit::TriMesh mesh;
  geodesics::GeodesicTable geo;
  volumes::PatchSet patches;        // populated only when the variant needs them
  std::vector<uint32_t> canonical;  // empty when no ground truth is available
  double surface_area = 0.0;
};

// Lazy per-(patient, organ) asset loader backed by the on-disk cache.
// Geodesic tables and patch sets are computed once per content hash.
class AssetStore {
 public:
  AssetStore(const DatasetManifest& manifest, std::filesystem::path cache_dir,
             bool want_geodesics, bool want_patches);
  const OrganAssets& get(const std::string& patient, const std::string& organ);

 private:
  const DatasetManifest& manifest_;
  AssetCache cache_;
  bool want_geodesics_, want_patches_;
  std::map<std::string, OrganAssets> loaded_;
};

struct TrainResult {
  autodiff::NamedTensors best_params;
  autodiff::NamedTensors final_params;
  double best_val_loss = 0.0;
  size_t best_val_epoch = 0;
  std::vector<double> epoch_mean_train_total;
  std::vector<std::string> log_lines;  // CSV; header first
};

// One fold of the training loop: per pair forward -> losses -> backward ->
// Adam, geodesic tables and patch sets cached across epochs, best-validation
// parameters checkpointed. Single-threaded and bitwise deterministic for a
// fixed seed/config. Throws Error(NanAbort) on a non-finite loss.
TrainResult train_fold(const DatasetManifest& manifest, const Fold& fold,
                       const TrainConfig& config);

// All folds; writes fold{k}_best.ckpt, fold{k}_final.ckpt and
// fold{k}_train_log.csv under out_dir.
void train_all_folds(const DatasetManifest& manifest, const FoldSpec& folds,
                     const TrainConfig& config, const std::filesystem::path& out_dir);

struct InferenceResult {
  autodiff::Tensor pi;
  std::vector<uint32_t> hard_map;
  std::vector<double> times;
  std::vector<autodiff::Tensor> displacements;  // T tensors, n x 3

  std::vector<meshkit::Vec3> frame_positions(const meshkit::TriMesh& mesh_x, size_t k) const;
};

InferenceResult infer(const autodiff::NamedTensors& params, const corrnet::ModelConfig& config,
                      const meshkit::TriMesh& mesh_x, const meshkit::TriMesh& mesh_y,
                      const volumes::PatchSet* patches_x, const volumes::PatchSet* patches_y);

// correspondence.csv (source_index,target_index), soft_matrix.bin
// (magic, n, m, float32 row-major), frame_##.ply per time step and
// displacements.bin (magic, T, n, float32).
void write_inference(const InferenceResult& result, const meshkit::TriMesh& mesh_x,
                     const std::filesystem::path& out_dir);

struct EvalOptions {
  size_t geodesic_pairs = 1000;
  uint64_t seed = 9001;
  // false: normalise the geodesic error by the target mesh area (default);
  // true: by the source mesh area.
  bool normalize_by_source = false;
};

// Metric sweep over the fold's eval pairs using a trained model.
metrics::MetricReport evaluate_model(const DatasetManifest& manifest, const Fold& fold,
                                     const autodiff::NamedTensors& params,
                                     const TrainConfig& config, const EvalOptions& options);

// Nearest-neighbour baseline. deformed_dir holds per-pair deformed source
// meshes named {organ}__{src}__{tgt}.off (or .ply); an empty path evaluates
// the raw (undeformed) source meshes instead.
metrics::MetricReport evaluate_nn(const DatasetManifest& manifest, const Fold& fold,
                                  const std::filesystem::path& deformed_dir,
                                  const TrainConfig& config, const EvalOptions& options);

// metrics.csv, raw_{metric}.csv and curves.csv under out_dir.
void write_report(const metrics::MetricReport& report, const std::filesystem::path& out_dir);
metrics::MetricReport load_report_raws(const std::filesystem::path& out_dir);

}  // namespace meshcorr::pipeline
