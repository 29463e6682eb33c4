#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "meshcorr/trimesh.hpp"

namespace meshcorr::pipeline {

// Named anatomical points in mm.
using LandmarkSet = std::map<std::string, meshkit::Vec3>;

LandmarkSet load_landmarks(const std::filesystem::path& path);
void save_landmarks(const LandmarkSet& landmarks, const std::filesystem::path& path);

// Per-vertex canonical parameterisation ids; two meshes generated from the
// same template correspond where the ids agree. One id per line, line i
// belongs to vertex i.
std::vector<uint32_t> load_canonical_map(const std::filesystem::path& path);
void save_canonical_map(const std::vector<uint32_t>& map, const std::filesystem::path& path);

// Index map a -> b built from two canonical maps.
std::vector<uint32_t> compose_ground_truth(const std::vector<uint32_t>& canonical_a,
                                           const std::vector<uint32_t>& canonical_b);

struct PatientEntry {
  std::string id;
  std::map<std::string, std::filesystem::path> organ_meshes;
  std::filesystem::path volume;     // header file; may be empty
  std::filesystem::path landmarks;  // may be empty
  std::map<std::string, std::filesystem::path> ground_truth;  // canonical maps, synthetic only
};

struct DatasetManifest {
  std::vector<std::string> organs;
  std::vector<PatientEntry> patients;

  static DatasetManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  // Every referenced path exists and the organ list is identical across
  // patients.
  void validate() const;

  const PatientEntry& patient(const std::string& id) const;
  std::vector<std::string> patient_ids() const;
};

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

struct FoldSpec {
  std::vector<Fold> folds;
  // Patients serving in more than one test set (unavoidable when the patient
  // count is not divisible by the fold count at the paper's 24/3/7 split).
  std::vector<std::string> repeated_test_patients;

  static FoldSpec load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  void validate(const std::vector<std::string>& all_patients) const;
};

// Shuffled five-fold split. 34 patients reproduce the 24 train / 3 val /
// 7 test layout (one patient tests twice, flagged); other sizes partition
// the test role exactly with proportionally scaled val sets.
FoldSpec make_folds(std::vector<std::string> patient_ids, uint64_t seed);

struct ScheduledPair {
  std::string patient_a;
  std::string patient_b;
  std::string organ;

  std::string id() const { return organ + "__" + patient_a + "__" + patient_b; }
};

enum class PairPhase { Train, Eval };

// Same-organ ordered pairs over the given patients. Train phase includes
// self-pairs and shuffles by seed; eval phase excludes self-pairs and keeps
// the deterministic organ-major order.
std::vector<ScheduledPair> pair_scheduler(const std::vector<std::string>& patients,
                                          const std::vector<std::string>& organs,
                                          PairPhase phase, uint64_t seed);

}  // namespace meshcorr::pipeline
